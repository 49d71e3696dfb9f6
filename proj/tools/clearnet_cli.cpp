// Command-line front end: limit solutions, parameter sweeps, Monte-Carlo
// estimation, and graph regularity diagnostics over a single JSON config.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "clearnet/config.hpp"
#include "clearnet/finmodel.hpp"
#include "clearnet/mcharness.hpp"
#include "clearnet/netgraph.hpp"

namespace {

using namespace clearnet;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct CliOptions {
    std::string config_path;
    std::string preset;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> paths;
    std::optional<std::size_t> n_override;
    int workers = 0;
    std::string sweep_var;
    std::string grid;
};

int default_workers() {
    if (const char* env = std::getenv("CLEARNET_WORKERS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? int(hw) : 1;
}

config::ExperimentConfig load(const CliOptions& opt, const std::string& kind) {
    config::ExperimentConfig cfg;
    if (!opt.preset.empty()) {
        cfg = config::preset(opt.preset);
    } else if (!opt.config_path.empty()) {
        cfg = config::load_config_file(opt.config_path);
    } else {
        throw std::invalid_argument("either --preset or --config is required");
    }
    cfg.kind = kind;
    if (opt.seed) cfg.seed = *opt.seed;
    if (opt.paths) cfg.paths = *opt.paths;
    if (!opt.sweep_var.empty()) cfg.sweep_var = opt.sweep_var;
    if (!opt.grid.empty()) cfg.grid = config::parse_grid(opt.grid);
    if (opt.n_override) cfg.runs = {config::RunSpec{*opt.n_override, {}, {}}};
    return cfg;
}

void write_file(const std::string& out_dir, const std::string& name,
                const std::string& content) {
    if (out_dir.empty()) return;
    std::filesystem::create_directories(out_dir);
    std::ofstream f(std::filesystem::path(out_dir) / name);
    if (!f) throw std::invalid_argument("cannot write to output directory " + out_dir);
    f << content;
}

std::string fmt(double v) {
    std::ostringstream ss;
    ss.precision(12);
    ss << v;
    return ss.str();
}

finmodel::FinanceParams with_sweep_value(finmodel::FinanceParams f,
                                         const std::string& var, double v) {
    if (var == "yc") {
        f.yc = v;
    } else if (var == "dc") {
        f.dc = v;
    } else if (var == "kappa") {
        f.kappa = v;
    } else if (var == "w") {
        f.w = v;
    } else {
        throw std::invalid_argument("sweep variable must be yc | dc | kappa | w");
    }
    return f;
}

nlohmann::json limit_to_json(const finmodel::LimitSolution& sol,
                             const finmodel::RegimeReport& regime) {
    nlohmann::json j;
    j["x1_inf"] = sol.x1_inf;
    j["x2_inf"] = sol.x2_inf;
    j["pd1"] = sol.pd1;
    j["pd2"] = sol.pd2;
    j["es1"] = sol.es1;
    j["es2"] = sol.es2;
    j["sau2"] = sol.sau2;
    j["mu1"] = sol.mu1;
    j["case_g1"] = finmodel::to_string(sol.case_g1);
    j["case_g2"] = finmodel::to_string(sol.case_g2);
    j["residual1"] = sol.residual1;
    j["residual2"] = sol.residual2;
    j["regime"] = {{"resilient_g1", regime.resilient_g1},
                   {"resilient_g2", regime.resilient_g2},
                   {"systemic_g2", regime.systemic_g2},
                   {"delta_r", regime.delta_r},
                   {"delta_u", regime.delta_u},
                   {"burden", regime.burden},
                   {"slope_es1_sign", regime.slope_es1_sign},
                   {"slope_sau_sign", regime.slope_sau_sign},
                   {"g1_robust_applicable", regime.g1_robust_applicable}};
    return j;
}

int cmd_limit(const CliOptions& opt) {
    const auto cfg = load(opt, "limit");
    const auto sol = finmodel::solve(cfg.finance);
    const auto regime = finmodel::classify_regime(cfg.finance);
    const auto ret = finmodel::portfolio(cfg.finance);
    if (ret.omega1_clipped) {
        std::cerr << "warning: group-1 risky investment clipped to zero "
                     "(yc exceeds available wealth)\n";
    }

    std::cout << "x1_inf  = " << fmt(sol.x1_inf) << "  [" << to_string(sol.case_g1) << "]\n"
              << "x2_inf  = " << fmt(sol.x2_inf) << "  [" << to_string(sol.case_g2) << "]\n"
              << "pd1     = " << fmt(sol.pd1) << "\n"
              << "pd2     = " << fmt(sol.pd2) << "\n"
              << "es1     = " << fmt(sol.es1) << "\n"
              << "es2     = " << fmt(sol.es2) << "\n"
              << "sau2    = " << fmt(sol.sau2) << "\n"
              << "mu1     = " << fmt(sol.mu1) << "\n"
              << "regime  : resilient_g1=" << regime.resilient_g1
              << " resilient_g2=" << regime.resilient_g2
              << " systemic_g2=" << regime.systemic_g2 << "\n"
              << "          delta_r=" << fmt(regime.delta_r)
              << " delta_u=" << fmt(regime.delta_u) << " burden=" << fmt(regime.burden)
              << "\n"
              << "          slope_es1=" << regime.slope_es1_sign
              << " slope_sau=" << regime.slope_sau_sign
              << " g1_robust=" << regime.g1_robust_applicable << "\n";

    write_file(opt.out_dir, "limit.json", limit_to_json(sol, regime).dump(2) + "\n");
    return kExitOk;
}

int cmd_sweep(const CliOptions& opt) {
    auto cfg = load(opt, "sweep");
    if (cfg.grid.empty()) throw std::invalid_argument("sweep: grid is empty");

    std::ostringstream csv;
    csv << cfg.sweep_var
        << ",x1_inf,x2_inf,pd1,pd2,es1,es2,sau2,case_g1,case_g2,status\n";
    for (double v : cfg.grid) {
        csv << fmt(v) << ",";
        try {
            const auto fin = with_sweep_value(cfg.finance, cfg.sweep_var, v);
            const auto sol = finmodel::solve(fin);
            csv << fmt(sol.x1_inf) << "," << fmt(sol.x2_inf) << "," << fmt(sol.pd1) << ","
                << fmt(sol.pd2) << "," << fmt(sol.es1) << "," << fmt(sol.es2) << ","
                << fmt(sol.sau2) << "," << to_string(sol.case_g1) << ","
                << to_string(sol.case_g2) << ",ok\n";
        } catch (const std::exception&) {
            csv << ",,,,,,,,,error\n";
        }
    }
    std::cout << csv.str();
    write_file(opt.out_dir, "sweep.csv", csv.str());
    return kExitOk;
}

mcharness::TheoryValues theory_for(const config::ExperimentConfig& cfg) {
    mcharness::TheoryValues th;
    if (cfg.finance.single_group) {
        try {
            const auto [x_th, es_th] = finmodel::theory_single_group(cfg.finance);
            th.x_th = x_th;
            th.es_th = es_th;
            th.pd_th = cfg.finance.w;
            return th;
        } catch (const std::exception&) {
            // outside the closed-form regime: fall through to the limit solver
        }
    }
    const auto sol = finmodel::solve(cfg.finance);
    const double g = cfg.finance.single_group ? 0.0 : cfg.finance.gamma;
    th.x_th = g * (sol.x1_inf + sol.mu1 * sol.x2_inf) + (1.0 - g) * sol.x2_inf;
    th.pd_th = g * sol.pd1 + (1.0 - g) * sol.pd2;
    th.es_th = g * sol.es1 + (1.0 - g) * sol.es2;
    return th;
}

int cmd_mc(const CliOptions& opt, int workers) {
    auto cfg = load(opt, "mc");
    if (cfg.runs.empty()) throw std::invalid_argument("mc: no network sizes configured");
    const auto theory = theory_for(cfg);

    std::ostringstream csv;
    csv << "n,measure,estimate,half_width,theory,error_pct,paths_used,paths_failed\n";
    std::size_t all_failed = 0;
    for (const auto& run : cfg.runs) {
        const auto mp = finmodel::graph_params(cfg.finance, cfg.model.p1, cfg.model.p2,
                                               cfg.model.pc2, cfg.model.eta_mode);
        const auto kind = cfg.graph_kind(run);
        mcharness::MCReport rep;
        try {
            rep = mcharness::estimate(mp, cfg.finance, run.n, kind, cfg.paths, workers,
                                      cfg.seed, theory, cfg.fp);
        } catch (const std::exception& e) {
            std::cerr << "n=" << run.n << ": " << e.what() << "\n";
            ++all_failed;
            continue;
        }
        auto row = [&](const char* name, const mcharness::MeasureStats& m) {
            csv << run.n << "," << name << "," << fmt(m.mean) << "," << fmt(m.half_width)
                << "," << fmt(m.theory) << "," << fmt(m.error_pct) << "," << rep.paths_used
                << "," << rep.paths_failed << "\n";
        };
        row("x", rep.x);
        row("pd", rep.pd);
        row("es", rep.es);
        std::cout << "n=" << run.n << "  x=" << fmt(rep.x.mean) << " (hw "
                  << fmt(rep.x.half_width) << ", err% " << fmt(rep.x.error_pct) << ")"
                  << "  pd=" << fmt(rep.pd.mean) << " (hw " << fmt(rep.pd.half_width)
                  << ")  es=" << fmt(rep.es.mean) << " (hw " << fmt(rep.es.half_width)
                  << ")  paths=" << rep.paths_used << "/" << rep.paths_requested << "\n";
    }
    if (all_failed == cfg.runs.size()) {
        throw std::runtime_error("mc: every configured run failed");
    }
    write_file(opt.out_dir, "mc.csv", csv.str());
    if (opt.out_dir.empty()) std::cout << csv.str();
    return kExitOk;
}

int cmd_graph_diag(const CliOptions& opt) {
    auto cfg = load(opt, "graph-diag");
    if (cfg.runs.empty()) throw std::invalid_argument("graph-diag: no network sizes configured");
    std::cout << "n,max_dev_g1,max_dev_g2,set_e_sum_g1,set_e_sum_g2,isolated\n";
    std::uint64_t stream = 0;
    for (const auto& run : cfg.runs) {
        const auto g = netgraph::sample_graph(cfg.model, run.n, sub_seed(cfg.seed, stream++));
        const auto rep = netgraph::regularity_diagnostic(g, cfg.model);
        std::cout << run.n << "," << fmt(rep.max_dev_g1) << "," << fmt(rep.max_dev_g2) << ","
                  << fmt(rep.set_e_sum_g1) << "," << fmt(rep.set_e_sum_g2) << ","
                  << rep.isolated_borrowers << "\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"clearnet: clearing vectors and systemic risk on random liability graphs"};
    app.require_subcommand(1);

    CliOptions opt;
    app.add_option("--config", opt.config_path, "JSON config path");
    app.add_option("--preset", opt.preset, "named experiment preset");
    app.add_option("--seed", opt.seed, "master seed override");
    app.add_option("--out", opt.out_dir, "output directory for CSV/JSON");
    app.add_option("--paths", opt.paths, "Monte-Carlo paths override");
    app.add_option("--workers", opt.workers, "worker threads (default: CLEARNET_WORKERS)");
    app.add_option("--n", opt.n_override, "single network size override");
    app.add_option("--sweep", opt.sweep_var, "sweep variable: yc | dc | kappa | w");
    app.add_option("--grid", opt.grid, "sweep grid a:b:step");

    auto* limit = app.add_subcommand("limit", "solve the limit system and print measures");
    auto* sweep = app.add_subcommand("sweep", "sweep a parameter, emit CSV trend data");
    auto* mc = app.add_subcommand("mc", "Monte-Carlo estimates vs theory");
    auto* diag = app.add_subcommand("graph-diag", "graph regularity statistics");
    auto* presets = app.add_subcommand("presets", "list available presets");

    CLI11_PARSE(app, argc, argv);

    try {
        if (presets->parsed()) {
            for (const auto& name : config::preset_names()) std::cout << name << "\n";
            return kExitOk;
        }
        const int workers = opt.workers > 0 ? opt.workers : default_workers();
        if (limit->parsed()) return cmd_limit(opt);
        if (sweep->parsed()) return cmd_sweep(opt);
        if (mc->parsed()) return cmd_mc(opt, workers);
        if (diag->parsed()) return cmd_graph_diag(opt);
        std::cerr << "no subcommand\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    }
}
