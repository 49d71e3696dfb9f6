#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "clearnet/netgraph.hpp"
#include "clearnet/rng.hpp"

namespace clearnet::fpcore {

// y = f(x); both vectors have the same length and y is caller-allocated.
using VectorMap = std::function<void(const std::vector<double>&, std::vector<double>&)>;

struct FPConfig {
    double step_eps = 0.5;    // damping; 1 is a plain Picard sweep
    double tol_delta = 1e-4;  // per-node tolerance
    int window_k = 100;       // consecutive passing steps before stopping
    long max_iters = 200000;
    void validate() const;
};

struct FPResult {
    std::vector<double> solution;
    long iterations = 0;
    double residual = 0.0;  // max_i |f_i(x) - x_i| at the returned point
    bool converged = false;
};

// Damped fixed-point iteration x <- x + eps (f(x) - x), started at the upper
// corner of the box. Stops once the summed per-step change stays below
// n*tol_delta for window_k consecutive steps and a fresh residual evaluation
// confirms it. Throws std::domain_error if the map leaves the box.
FPResult iterate_fp(const VectorMap& map, const std::vector<double>& box_upper,
                    const FPConfig& cfg);

// High-precision solver for low-dimensional (k <= 3) monotone maps on a box:
// Picard from the upper corner, with per-coordinate bisection passes when the
// contraction is too weak to reach `tol`. Returns x with max residual < tol.
// When check_monotone is set, verifies that the Picard iterates decrease.
std::vector<double> solve_limit_system(const VectorMap& map,
                                       const std::vector<double>& box_upper,
                                       double tol = 1e-12,
                                       bool check_monotone = false);

struct ContractionReport {
    double rho = 0.0;        // aggregate-coupling coefficient
    double sigma_eta = 0.0;  // sigma * (1 - eta_lower + varsigma * eta_lower)
    bool satisfied_b4 = false;        // rho <= 1
    bool unique_fp_condition = false; // sigma_eta < 1
};

ContractionReport contraction_model_a(const netgraph::ModelParams& params,
                                      double sigma, double varsigma, double eta_lower);
ContractionReport contraction_model_b(const netgraph::ModelParams& params,
                                      double sigma, double varsigma, double eta_lower);

struct LlnPoint {
    std::size_t n = 0;
    double zeta = 0.0;       // realized weighted sum (mean over replicas)
    double limit = 0.0;      // E[M] * gamma_m (1 - p_sb_m) / gamma_p_m
    double deviation = 0.0;  // mean |zeta - limit| over replicas
};

// Empirical check that group sums of M_j (1-eta_j) / lender_count settle at
// their deterministic limit as n grows. `m_sampler` draws one bounded i.i.d.
// M_j; `m_mean` is its expectation. Several replicas per n smooth the
// deviation estimate; sampling stays on the (seed, replica) counter grid.
std::vector<LlnPoint> lln_diagnostic(const netgraph::ModelParams& params, int group,
                                     const std::vector<std::size_t>& n_values,
                                     std::uint64_t seed,
                                     const std::function<double(Rng&)>& m_sampler,
                                     double m_mean, int replicas = 1);

}  // namespace clearnet::fpcore
