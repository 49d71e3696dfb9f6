// Test-only reference solvers, kept independent of the library's fixed-point
// machinery: plain undamped Picard sweeps with their own loop logic.
#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace oracles {

// Undamped vector Picard iteration from a given start point.
inline std::vector<double> picard_vector(
    const std::function<std::vector<double>(const std::vector<double>&)>& f,
    std::vector<double> x, double tol = 1e-12, long max_iters = 2000000) {
    for (long t = 0; t < max_iters; ++t) {
        std::vector<double> fx = f(x);
        double gap = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) gap = std::max(gap, std::abs(fx[i] - x[i]));
        x = std::move(fx);
        if (gap < tol) return x;
    }
    throw std::runtime_error("picard_vector: no convergence");
}

// Scalar fixed point of x = rhs(x) on [0, upper] by bisection on g(t) =
// rhs(t) - t (monotone nonincreasing for the clearing-style maps used here).
inline double bisect_scalar(const std::function<double(double)>& rhs, double upper) {
    double lo = 0.0, hi = upper;
    if (rhs(lo) - lo <= 0.0) return lo;
    if (rhs(hi) - hi >= 0.0) return hi;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        if (rhs(mid) - mid > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// Group-2 limit equation x = E[min{(K2 + x - v2)^+, ybar2}] (1-p_sb2) lambda2
// solved to near machine precision.
inline double g2_limit_oracle(double ybar2, double v2, double kd2, double ku2, double w,
                              double p_sb2, double lambda2) {
    auto rhs = [&](double x) {
        auto clip = [&](double k) {
            const double v = k - v2 + x;
            return std::min(std::max(v, 0.0), ybar2);
        };
        return (w * clip(kd2) + (1.0 - w) * clip(ku2)) * (1.0 - p_sb2) * lambda2;
    };
    return bisect_scalar(rhs, ybar2 * (1.0 - p_sb2) * lambda2);
}

// Group-1 limit equation with the coupling term beta = mu1 * x2.
inline double g1_limit_oracle(double ybar1, double v1, double kd1, double ku1, double w,
                              double p_sb1, double beta) {
    auto rhs = [&](double x) {
        auto clip = [&](double k) {
            const double v = k - v1 + beta + x;
            return std::min(std::max(v, 0.0), ybar1);
        };
        return (w * clip(kd1) + (1.0 - w) * clip(ku1)) * (1.0 - p_sb1);
    };
    return bisect_scalar(rhs, ybar1 * (1.0 - p_sb1));
}

// Two-pass sample variance for the half-width cross-check.
inline double half_width_oracle(const std::vector<double>& v) {
    const double n = double(v.size());
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return 1.96 * std::sqrt(ss / (n - 1.0) / n);
}

}  // namespace oracles
