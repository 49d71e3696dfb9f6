#include "clearnet/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace clearnet::config {

namespace {

using nlohmann::json;

netgraph::EtaMode parse_eta(const std::string& s) {
    if (s == "bernoulli") return netgraph::EtaMode::Bernoulli;
    if (s == "constant") return netgraph::EtaMode::Constant;
    throw std::invalid_argument("config: eta_mode must be 'bernoulli' or 'constant'");
}

netgraph::WeightModel parse_weight_model(const std::string& s) {
    if (s == "shared_all") return netgraph::WeightModel::SharedAll;
    if (s == "group_split") return netgraph::WeightModel::GroupSplit;
    if (s == "fixed_denominator") return netgraph::WeightModel::FixedDenominator;
    throw std::invalid_argument(
        "config: weight_model must be shared_all | group_split | fixed_denominator");
}

template <typename T>
void read(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

netgraph::ModelParams parse_model(const json& j) {
    netgraph::ModelParams m;
    read(j, "gamma", m.gamma);
    read(j, "p1", m.p1);
    read(j, "p2", m.p2);
    read(j, "pc1", m.pc1);
    read(j, "pc2", m.pc2);
    read(j, "p_sb1", m.p_sb1);
    read(j, "p_sb2", m.p_sb2);
    read(j, "lambda1", m.lambda1);
    read(j, "lambda2", m.lambda2);
    read(j, "single_group", m.single_group);
    if (j.contains("eta_mode")) m.eta_mode = parse_eta(j.at("eta_mode").get<std::string>());
    if (j.contains("weight_model")) {
        m.weight_model = parse_weight_model(j.at("weight_model").get<std::string>());
    }
    if (m.single_group) {
        m.p1 = m.p2;
        m.pc1 = m.pc2 = 0.0;
        m.gamma = 0.5;
        m.p_sb1 = m.p_sb2;
        m.lambda1 = m.lambda2 = 1.0;
    }
    return m;
}

finmodel::FinanceParams parse_finance(const json& j) {
    finmodel::FinanceParams f;
    read(j, "k0", f.k0);
    read(j, "y1", f.y1);
    read(j, "y2", f.y2);
    read(j, "yc", f.yc);
    read(j, "r1", f.r1);
    read(j, "r2", f.r2);
    read(j, "u", f.u);
    read(j, "d", f.d);
    read(j, "w", f.w);
    read(j, "dc", f.dc);
    read(j, "p_sb1", f.p_sb1);
    read(j, "p_sb2", f.p_sb2);
    read(j, "gamma", f.gamma);
    read(j, "single_group", f.single_group);
    read(j, "k_b", f.k_b);
    const bool has_kappa = j.contains("kappa");
    const bool has_v = j.contains("v1") || j.contains("v2");
    if (has_kappa && has_v) {
        throw std::invalid_argument("config: kappa and explicit v1/v2 are mutually exclusive");
    }
    if (has_v) {
        f.tax_mode = finmodel::TaxMode::Explicit;
        read(j, "v1", f.v1);
        read(j, "v2", f.v2);
    } else {
        f.tax_mode = finmodel::TaxMode::Proportional;
        read(j, "kappa", f.kappa);
    }
    return f;
}

std::vector<RunSpec> parse_runs(const json& j) {
    std::vector<RunSpec> runs;
    for (const auto& r : j) {
        RunSpec spec;
        if (r.is_number()) {
            spec.n = r.get<std::size_t>();
        } else {
            spec.n = r.at("n").get<std::size_t>();
            if (r.contains("lender_dev")) {
                spec.lender_dev = r.at("lender_dev").get<std::uint32_t>();
            }
            if (r.contains("borrower_dev")) {
                spec.borrower_dev = r.at("borrower_dev").get<std::uint32_t>();
            }
        }
        runs.push_back(spec);
    }
    return runs;
}

const std::map<std::string, std::string>& preset_table();

}  // namespace

mcharness::GraphKind ExperimentConfig::graph_kind(const RunSpec& run) const {
    if (graph != "regular") return mcharness::GraphKind::er();
    const double mean = double(run.n) * model.gamma_p2();
    const auto center = std::int64_t(std::llround(mean));
    netgraph::DegreeWindow lender, borrower;
    const std::uint32_t ldev = run.lender_dev.value_or(2);
    lender.lo = std::uint32_t(std::max<std::int64_t>(0, center - ldev));
    lender.hi = std::uint32_t(center + ldev);
    if (run.borrower_dev) {
        borrower.lo = std::uint32_t(std::max<std::int64_t>(0, center - *run.borrower_dev));
        borrower.hi = std::uint32_t(center + *run.borrower_dev);
    }
    return mcharness::GraphKind::regular(lender, borrower);
}

ExperimentConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: malformed JSON: ") + e.what());
    }
    try {
        ExperimentConfig cfg;
        if (j.contains("model")) cfg.model = parse_model(j.at("model"));
        if (j.contains("finance")) cfg.finance = parse_finance(j.at("finance"));
        if (j.contains("experiment")) {
            const auto& e = j.at("experiment");
            read(e, "kind", cfg.kind);
            read(e, "graph", cfg.graph);
            read(e, "paths", cfg.paths);
            read(e, "seed", cfg.seed);
            read(e, "sweep_var", cfg.sweep_var);
            if (e.contains("runs")) cfg.runs = parse_runs(e.at("runs"));
            if (e.contains("grid")) {
                if (e.at("grid").is_string()) {
                    cfg.grid = parse_grid(e.at("grid").get<std::string>());
                } else {
                    cfg.grid = e.at("grid").get<std::vector<double>>();
                }
            }
            if (e.contains("fp")) {
                const auto& f = e.at("fp");
                read(f, "eps", cfg.fp.step_eps);
                read(f, "delta", cfg.fp.tol_delta);
                read(f, "window", cfg.fp.window_k);
                read(f, "max_iters", cfg.fp.max_iters);
            }
        }
        if (cfg.kind != "limit" && cfg.kind != "mc" && cfg.kind != "sweep" &&
            cfg.kind != "graph-diag") {
            throw std::invalid_argument("config: kind must be limit | mc | sweep | graph-diag");
        }
        if (cfg.graph != "er" && cfg.graph != "regular") {
            throw std::invalid_argument("config: graph must be er | regular");
        }
        return cfg;
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::vector<double> parse_grid(const std::string& text) {
    double a = 0, b = 0, step = 0;
    char c1 = 0, c2 = 0;
    std::istringstream ss(text);
    if (!(ss >> a >> c1 >> b >> c2 >> step) || c1 != ':' || c2 != ':' || step <= 0.0) {
        throw std::invalid_argument("grid: expected a:b:step with step > 0");
    }
    if (b < a) throw std::invalid_argument("grid: needs b >= a");
    std::vector<double> grid;
    const auto count = std::size_t(std::floor((b - a) / step + 1e-9)) + 1;
    grid.reserve(count);
    for (std::size_t i = 0; i < count; ++i) grid.push_back(a + double(i) * step);
    return grid;
}

namespace {

// Shared parameter fragments for the embedded presets.
constexpr const char* kSingleGroupFinance =
    R"("finance": {"k0": 12.46875, "y1": 0.0, "y2": 31.25, "yc": 0.0,
                   "r1": 0.1, "r2": 0.12, "u": 0.2, "d": -0.6, "w": 0.2,
                   "dc": 0.0, "kappa": 0.56, "p_sb1": 0.001, "p_sb2": 0.001,
                   "single_group": true})";

std::string single_group_model(double p2) {
    std::ostringstream ss;
    ss << R"("model": {"single_group": true, "p2": )" << p2
       << R"(, "p_sb2": 0.001, "eta_mode": "bernoulli"})";
    return ss.str();
}

std::string figure_preset(double u, double d, double dc, double kappa) {
    std::ostringstream ss;
    const double k0 = 40.0 / (1.0 + u - dc);
    ss.precision(17);
    ss << R"({"model": {"gamma": 0.5, "p1": 0.05, "p2": 0.05, "pc1": 0.0, "pc2": 0.05,
                "p_sb1": 0.01, "p_sb2": 0.2},
       "finance": {"k0": )"
       << k0
       << R"(, "y1": 45.45454545454545, "y2": 44.642857142857146, "yc": 0.0,
                "r1": 0.1, "r2": 0.12, "u": )"
       << u << R"(, "d": )" << d << R"(, "w": 0.1, "dc": )" << dc << R"(, "kappa": )"
       << kappa
       << R"(, "p_sb1": 0.01, "p_sb2": 0.2, "gamma": 0.5},
       "experiment": {"kind": "sweep", "sweep_var": "yc", "grid": "0:20:1"}})";
    return ss.str();
}

std::string mc_preset(double p2, const char* graph, const char* runs, std::size_t paths) {
    std::ostringstream ss;
    ss << "{" << single_group_model(p2) << ",\n " << kSingleGroupFinance
       << ",\n \"experiment\": {\"kind\": \"mc\", \"graph\": \"" << graph
       << "\", \"runs\": " << runs << ", \"paths\": " << paths
       << ", \"seed\": 20250809, \"fp\": {\"eps\": 0.5, \"delta\": 1e-4, \"window\": 100}}}";
    return ss.str();
}

const std::map<std::string, std::string>& preset_table() {
    static const std::map<std::string, std::string> table = [] {
        std::map<std::string, std::string> t;
        t["table1-theory"] =
            std::string("{") + single_group_model(0.05) + ",\n " + kSingleGroupFinance +
            ",\n \"experiment\": {\"kind\": \"limit\"}}";
        t["table1"] = mc_preset(0.05, "er", "[600, 700, 800, 900, 1000]", 1);
        t["table2-regular"] =
            mc_preset(0.05, "regular",
                      R"([{"n":500,"lender_dev":2},{"n":1000,"lender_dev":2},
                          {"n":2000,"lender_dev":2},{"n":5000,"lender_dev":2}])",
                      200);
        t["table2-er"] = mc_preset(0.05, "er", "[500, 1000, 2000, 5000]", 200);
        t["table2-regular-p03"] =
            mc_preset(0.03, "regular",
                      R"([{"n":500,"lender_dev":2},{"n":1000,"lender_dev":2},
                          {"n":2000,"lender_dev":2},{"n":5000,"lender_dev":2}])",
                      200);
        t["table2-er-p03"] = mc_preset(0.03, "er", "[500, 1000, 2000, 5000]", 200);
        t["table4-regular-small"] =
            mc_preset(0.05, "regular",
                      R"([{"n":200,"lender_dev":1,"borrower_dev":6},
                          {"n":300,"lender_dev":2,"borrower_dev":9},
                          {"n":400,"lender_dev":2,"borrower_dev":12}])",
                      200);
        t["fig2a"] = figure_preset(0.5, -0.35, 0.1, 0.175);
        t["fig2b"] = figure_preset(0.5, -0.15, 0.1, 0.245);
        t["fig2c"] = figure_preset(0.5, -0.20, 0.1, 0.35);
        t["fig2d"] = figure_preset(0.5, -0.01, 0.1, 0.77);
        t["fig1a"] = figure_preset(0.7, -0.7, 0.1, 0.32);
        t["fig1b"] = figure_preset(0.6, -0.7, 0.1, 0.30);
        t["fig1c"] = figure_preset(0.6, -0.7, 0.1, 0.375);
        t["fig1d"] = figure_preset(0.4, -0.7, 0.1, 0.65);
        t["graph-diag-er"] =
            std::string("{") + single_group_model(0.05) +
            ",\n \"experiment\": {\"kind\": \"graph-diag\", "
            "\"runs\": [500, 2000, 8000], \"seed\": 7}}";
        return t;
    }();
    return table;
}

}  // namespace

ExperimentConfig preset(const std::string& name) {
    ExperimentConfig cfg = parse_config(preset_json(name));
    cfg.preset_name = name;
    return cfg;
}

std::vector<std::string> preset_names() {
    std::vector<std::string> names;
    for (const auto& [k, v] : preset_table()) names.push_back(k);
    return names;
}

std::string preset_json(const std::string& name) {
    const auto& table = preset_table();
    auto it = table.find(name);
    if (it == table.end()) {
        throw std::invalid_argument("unknown preset '" + name + "'");
    }
    return it->second;
}

}  // namespace clearnet::config
