#include "clearnet/fpcore.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace clearnet::fpcore {

namespace {

constexpr double kBoxSlack = 1e-9;  // tolerated numeric overshoot of the box

void check_in_box(const std::vector<double>& y, const std::vector<double>& box_upper) {
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!(y[i] >= -kBoxSlack && y[i] <= box_upper[i] + kBoxSlack) || !std::isfinite(y[i])) {
            throw std::domain_error("fpcore: map output left the [0, upper] box");
        }
    }
}

void clip_to_box(std::vector<double>& x, const std::vector<double>& box_upper) {
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = std::clamp(x[i], 0.0, box_upper[i]);
    }
}

}  // namespace

void FPConfig::validate() const {
    if (!(step_eps > 0.0 && step_eps <= 1.0)) {
        throw std::invalid_argument("FPConfig: step_eps must lie in (0,1]");
    }
    if (!(tol_delta > 0.0)) throw std::invalid_argument("FPConfig: tol_delta must be > 0");
    if (window_k < 1) throw std::invalid_argument("FPConfig: window_k must be >= 1");
    if (max_iters < window_k) {
        throw std::invalid_argument("FPConfig: max_iters must be >= window_k");
    }
}

FPResult iterate_fp(const VectorMap& map, const std::vector<double>& box_upper,
                    const FPConfig& cfg) {
    cfg.validate();
    const std::size_t n = box_upper.size();
    const double pass_level = double(n) * cfg.tol_delta;

    FPResult res;
    std::vector<double> x = box_upper;
    std::vector<double> fx(n, 0.0);

    int streak = 0;
    long t = 0;
    for (; t < cfg.max_iters; ++t) {
        map(x, fx);
        check_in_box(fx, box_upper);
        double change = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double step = cfg.step_eps * (fx[i] - x[i]);
            change += std::abs(step);
            x[i] += step;
        }
        streak = change < pass_level ? streak + 1 : 0;
        if (streak >= cfg.window_k) {
            ++t;
            break;
        }
    }
    res.iterations = t;

    // fresh evaluation: report the true residual and confirm the stop
    map(x, fx);
    double sum_gap = 0.0, max_gap = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double gap = std::abs(fx[i] - x[i]);
        sum_gap += gap;
        max_gap = std::max(max_gap, gap);
    }
    res.residual = max_gap;
    res.converged = streak >= cfg.window_k && cfg.step_eps * sum_gap < pass_level;
    clip_to_box(x, box_upper);
    res.solution = std::move(x);
    return res;
}

std::vector<double> solve_limit_system(const VectorMap& map,
                                       const std::vector<double>& box_upper,
                                       double tol, bool check_monotone) {
    const std::size_t k = box_upper.size();
    if (k == 0 || k > 3) {
        throw std::invalid_argument("solve_limit_system: dimension must be 1..3");
    }

    std::vector<double> x = box_upper;
    std::vector<double> fx(k, 0.0);

    auto residual = [&](const std::vector<double>& p) {
        map(p, fx);
        check_in_box(fx, box_upper);
        double r = 0.0;
        for (std::size_t i = 0; i < k; ++i) r = std::max(r, std::abs(fx[i] - p[i]));
        return r;
    };

    // Picard phase; for these min/(.)^+ maps the iterates fall monotonically
    // from the upper corner.
    constexpr long kPicardIters = 400000;
    for (long t = 0; t < kPicardIters; ++t) {
        map(x, fx);
        check_in_box(fx, box_upper);
        double gap = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            gap = std::max(gap, std::abs(fx[i] - x[i]));
            if (check_monotone && fx[i] > x[i] + 1e-12) {
                throw std::logic_error("solve_limit_system: Picard iterate increased");
            }
        }
        x = fx;
        if (gap < tol) {
            if (residual(x) < tol) return x;
        }
    }

    // Weak contraction: finish with per-coordinate bisection on
    // g(t) = f_i(x | x_i = t) - t, which is monotone nonincreasing in t.
    std::vector<double> probe = x;
    for (int pass = 0; pass < 500; ++pass) {
        for (std::size_t i = 0; i < k; ++i) {
            double lo = 0.0, hi = box_upper[i];
            auto g = [&](double t) {
                probe[i] = t;
                map(probe, fx);
                return fx[i] - t;
            };
            if (g(lo) <= 0.0) {
                x[i] = lo;
            } else if (g(hi) >= 0.0) {
                x[i] = hi;
            } else {
                for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    if (mid == lo || mid == hi) break;
                    (g(mid) > 0.0 ? lo : hi) = mid;
                }
                x[i] = 0.5 * (lo + hi);
            }
            probe = x;
        }
        if (residual(x) < tol) return x;
    }
    throw std::runtime_error("solve_limit_system: did not reach the requested tolerance");
}

ContractionReport contraction_model_a(const netgraph::ModelParams& params, double sigma,
                                      double varsigma, double eta_lower) {
    const double gp1 = params.single_group ? params.p2 : params.gamma_p1();
    const double gp2 = params.gamma_p2();
    if (gp1 <= 0.0 || gp2 <= 0.0) {
        throw std::invalid_argument("contraction_model_a: gamma_p1 and gamma_p2 must be > 0");
    }
    const double gamma = params.single_group ? 0.5 : params.gamma;
    // in the pooled single-group reduction both halves carry the group's values
    const double p1 = params.p1, p2 = params.p2;
    const double pc1 = params.pc1, pc2 = params.pc2;
    const double q1 = 1.0 - params.p_sb1;
    const double q2 = 1.0 - params.p_sb2;

    double a, b;
    if (params.single_group) {
        a = b = q2;  // cross terms vanish and gamma_p reduces to the group's own p
    } else {
        a = gamma * pc1 * q1 / gp1 + (1.0 - gamma) * p2 * q2 / gp2;
        b = gamma * p1 * q1 / gp1 + (1.0 - gamma) * pc2 * q2 / gp2;
    }
    ContractionReport rep;
    rep.rho = std::max(a, b) + (gamma * params.p_sb1 + (1.0 - gamma) * params.p_sb2);
    rep.sigma_eta = sigma * (1.0 - eta_lower + varsigma * eta_lower);
    rep.satisfied_b4 = rep.rho <= 1.0 + 1e-12;
    rep.unique_fp_condition = rep.sigma_eta < 1.0;
    return rep;
}

ContractionReport contraction_model_b(const netgraph::ModelParams& params, double sigma,
                                      double varsigma, double eta_lower) {
    const double gamma = params.single_group ? 0.5 : params.gamma;
    if (gamma <= 0.0 || gamma >= 1.0) {
        throw std::invalid_argument("contraction_model_b: gamma must lie in (0,1)");
    }
    const double l1 = params.lambda1, l2 = params.lambda2;
    const double q1 = 1.0 - params.p_sb1;
    const double q2 = 1.0 - params.p_sb2;
    const double cross2 = params.pc2 > 0.0 ? (1.0 - gamma) / gamma * (1.0 - l2) : 0.0;
    const double cross1 = params.pc1 > 0.0 ? gamma / (1.0 - gamma) * (1.0 - l1) : 0.0;

    ContractionReport rep;
    rep.rho = std::max(l1 * q1 + cross2, cross1 + l2 * q2) +
              (gamma * l1 * params.p_sb1 + (1.0 - gamma) * l2 * params.p_sb2);
    rep.sigma_eta = sigma * (1.0 - eta_lower + varsigma * eta_lower);
    rep.satisfied_b4 = rep.rho <= 1.0 + 1e-12;
    rep.unique_fp_condition = rep.sigma_eta < 1.0;
    return rep;
}

std::vector<LlnPoint> lln_diagnostic(const netgraph::ModelParams& params, int group,
                                     const std::vector<std::size_t>& n_values,
                                     std::uint64_t seed,
                                     const std::function<double(Rng&)>& m_sampler,
                                     double m_mean, int replicas) {
    if (group != 1 && group != 2) {
        throw std::invalid_argument("lln_diagnostic: group must be 1 or 2");
    }
    if (replicas < 1) throw std::invalid_argument("lln_diagnostic: replicas must be >= 1");

    const double frac = group == 1 ? params.frac1() : params.frac2();
    const double p_sb = group == 1 ? params.p_sb1 : params.p_sb2;
    const double gp = group == 1 ? params.gamma_p1() : params.gamma_p2();
    if (gp <= 0.0 || frac <= 0.0) {
        throw std::invalid_argument("lln_diagnostic: the chosen group has no mass");
    }
    const double limit = m_mean * frac * (1.0 - p_sb) / gp;

    std::vector<LlnPoint> table;
    table.reserve(n_values.size());
    std::uint64_t stream = 0;
    for (std::size_t n : n_values) {
        double zeta_sum = 0.0, dev_sum = 0.0;
        for (int r = 0; r < replicas; ++r) {
            const std::uint64_t s = sub_seed(seed, stream++);
            auto g = netgraph::sample_graph(params, n, s);
            Rng mrng = make_rng(s, 0x4d5f6a7bULL);
            double zeta = 0.0;
            for (std::size_t j = 0; j < g.n; ++j) {
                if (g.group_of(j) != group) continue;
                const double m = m_sampler(mrng);
                const double a = g.lender_count(j);
                if (a > 0.0) zeta += m * (1.0 - g.eta_sb[j]) / a;
            }
            zeta_sum += zeta;
            dev_sum += std::abs(zeta - limit);
        }
        LlnPoint pt;
        pt.n = n;
        pt.zeta = zeta_sum / replicas;
        pt.limit = limit;
        pt.deviation = dev_sum / replicas;
        table.push_back(pt);
    }
    return table;
}

}  // namespace clearnet::fpcore
