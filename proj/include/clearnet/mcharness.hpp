#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "clearnet/finmodel.hpp"
#include "clearnet/fpcore.hpp"
#include "clearnet/netgraph.hpp"

namespace clearnet::mcharness {

struct GraphKind {
    enum class Type { ER, Regular };
    Type type = Type::ER;
    netgraph::DegreeWindow lender;
    netgraph::DegreeWindow borrower;

    static GraphKind er() { return {}; }
    static GraphKind regular(netgraph::DegreeWindow lender,
                             netgraph::DegreeWindow borrower = {}) {
        return {Type::Regular, lender, borrower};
    }
};

struct PathStats {
    double x_hat = 0.0;       // mean incoming claim per creditor
    double pd_hat = 0.0;      // fraction of banks paying short of their liability
    double es_hat = 0.0;      // mean surplus per bank
    double shock_frac = 0.0;  // fraction of banks hit by the down move
    long iterations = 0;
    bool converged = false;
};

// One seeded sample path: graph, shocks, clearing vector, measures.
// Deterministic in (params, n, kind, seed).
PathStats run_path(const netgraph::ModelParams& mp, const finmodel::FinanceParams& fp,
                   std::size_t n, const GraphKind& kind, std::uint64_t seed,
                   const fpcore::FPConfig& cfg = {});

struct TheoryValues {
    double x_th = std::nan("");
    double pd_th = std::nan("");
    double es_th = std::nan("");
};

struct MeasureStats {
    double mean = 0.0;
    double half_width = 0.0;  // 1.96 * sqrt(sample variance / paths)
    double theory = std::nan("");
    double error_pct = std::nan("");  // |theory - mean| / theory * 100
};

struct MCReport {
    std::size_t n = 0;
    std::size_t paths_requested = 0;
    std::size_t paths_used = 0;
    std::size_t paths_failed = 0;
    MeasureStats x, pd, es;
    std::vector<PathStats> paths;  // per-path stats, in path-index order
};

// Runs `n_paths` independent paths on counter-split seeds across `workers`
// threads. The report is identical for any worker count. Non-converged paths
// are dropped from the aggregates and counted in paths_failed; throws
// std::runtime_error when every path fails.
MCReport estimate(const netgraph::ModelParams& mp, const finmodel::FinanceParams& fp,
                  std::size_t n, const GraphKind& kind, std::size_t n_paths,
                  int workers, std::uint64_t master_seed,
                  const TheoryValues& theory = {},
                  const fpcore::FPConfig& cfg = {});

// Sample correlation between per-path default fraction and shock fraction.
// Throws std::invalid_argument with fewer than two usable paths or when
// either series has zero variance.
double correlation_defaults_vs_shocks(const std::vector<PathStats>& paths);

}  // namespace clearnet::mcharness
