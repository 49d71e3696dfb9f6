#include "clearnet/mcharness.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace clearnet::mcharness {

namespace {

double pos(double x) { return x > 0.0 ? x : 0.0; }

MeasureStats aggregate(const std::vector<double>& values, double theory) {
    MeasureStats s;
    const std::size_t n = values.size();
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / double(n);
    if (n >= 2) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        const double var = ss / double(n - 1);
        s.half_width = 1.96 * std::sqrt(var / double(n));
    }
    s.theory = theory;
    if (std::isfinite(theory) && theory != 0.0) {
        s.error_pct = std::abs(theory - s.mean) / std::abs(theory) * 100.0;
    }
    return s;
}

}  // namespace

PathStats run_path(const netgraph::ModelParams& mp, const finmodel::FinanceParams& fp,
                   std::size_t n, const GraphKind& kind, std::uint64_t seed,
                   const fpcore::FPConfig& cfg) {
    const std::uint64_t graph_seed = sub_seed(seed, 0);
    const std::uint64_t shock_seed = sub_seed(seed, 1);

    netgraph::GraphSample g =
        kind.type == GraphKind::Type::Regular
            ? netgraph::sample_regular_graph(mp, n, kind.lender, kind.borrower, graph_seed)
            : netgraph::sample_graph(mp, n, graph_seed);

    const finmodel::ShockReturns ret = finmodel::portfolio(fp);
    const std::vector<double> shocks = finmodel::sample_shocks(g, fp, ret, shock_seed);
    finmodel::ClearingProblem prob = finmodel::finite_clearing_map(g, shocks, fp);

    const fpcore::FPResult fpres = fpcore::iterate_fp(prob.map, prob.box_upper, cfg);

    PathStats st;
    st.iterations = fpres.iterations;
    st.converged = fpres.converged;

    const auto claims = finmodel::incoming_claims(g, fpres.solution);
    double x_sum = 0.0, es_sum = 0.0;
    std::size_t defaults = 0, shocked = 0;
    for (std::size_t i = 0; i < g.n; ++i) {
        x_sum += claims[i];
        es_sum += pos(shocks[i] + claims[i] - prob.taxes[i] - prob.box_upper[i]);
        if (fpres.solution[i] < prob.box_upper[i] - 1e-9) ++defaults;
        const bool in_g1 = g.group_of(i) == 1;
        if (shocks[i] == (in_g1 ? ret.kd1 : ret.kd2)) ++shocked;
    }
    st.x_hat = x_sum / double(g.n);
    st.es_hat = es_sum / double(g.n);
    st.pd_hat = double(defaults) / double(g.n);
    st.shock_frac = double(shocked) / double(g.n);
    return st;
}

MCReport estimate(const netgraph::ModelParams& mp, const finmodel::FinanceParams& fp,
                  std::size_t n, const GraphKind& kind, std::size_t n_paths,
                  int workers, std::uint64_t master_seed, const TheoryValues& theory,
                  const fpcore::FPConfig& cfg) {
    if (n_paths < 1) throw std::invalid_argument("estimate: n_paths must be >= 1");
    if (workers < 1) workers = 1;

    std::vector<PathStats> paths(n_paths);
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto work = [&]() {
        for (;;) {
            const std::size_t idx = next.fetch_add(1);
            if (idx >= n_paths) return;
            try {
                // seeds come from the path index, never from scheduling order
                paths[idx] = run_path(mp, fp, n, kind, sub_seed(master_seed, idx), cfg);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int t = 0; t < workers; ++t) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    MCReport rep;
    rep.n = n;
    rep.paths_requested = n_paths;
    rep.paths = paths;

    std::vector<double> xs, pds, ess;
    xs.reserve(n_paths);
    for (const auto& p : paths) {
        if (!p.converged) {
            ++rep.paths_failed;
            continue;
        }
        xs.push_back(p.x_hat);
        pds.push_back(p.pd_hat);
        ess.push_back(p.es_hat);
    }
    rep.paths_used = xs.size();
    if (rep.paths_used == 0) {
        throw std::runtime_error("estimate: every sample path failed to converge");
    }
    rep.x = aggregate(xs, theory.x_th);
    rep.pd = aggregate(pds, theory.pd_th);
    rep.es = aggregate(ess, theory.es_th);
    return rep;
}

double correlation_defaults_vs_shocks(const std::vector<PathStats>& paths) {
    std::vector<double> a, b;
    for (const auto& p : paths) {
        if (!p.converged) continue;
        a.push_back(p.pd_hat);
        b.push_back(p.shock_frac);
    }
    if (a.size() < 2) {
        throw std::invalid_argument("correlation: need at least two converged paths");
    }
    const double n = double(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) {
        throw std::invalid_argument("correlation: a series has zero variance");
    }
    return sab / std::sqrt(saa * sbb);
}

}  // namespace clearnet::mcharness
