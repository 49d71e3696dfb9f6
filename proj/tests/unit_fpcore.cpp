#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "clearnet/fpcore.hpp"
#include "clearnet/netgraph.hpp"
#include "oracles.hpp"

using namespace clearnet;
using fpcore::FPConfig;

namespace {

// group-2 clearing rhs with the Table-1 parameters
double table1_rhs(double x) {
    const double kd2 = 5.0, ku2 = 15.0, v2 = 7.0, ybar2 = 35.0, w = 0.2, psb2 = 0.001;
    auto clip = [&](double k) {
        return std::min(std::max(k - v2 + x, 0.0), ybar2);
    };
    return (w * clip(kd2) + (1.0 - w) * clip(ku2)) * (1.0 - psb2);
}

}  // namespace

TEST_CASE("constant map converges to the constant in one effective step") {
    const std::vector<double> c = {1.5, 0.25, 3.0};
    fpcore::VectorMap map = [&](const std::vector<double>&, std::vector<double>& y) {
        y = c;
    };
    FPConfig cfg;
    cfg.step_eps = 1.0;
    cfg.tol_delta = 1e-10;
    cfg.window_k = 3;
    auto res = fpcore::iterate_fp(map, {4.0, 4.0, 4.0}, cfg);
    CHECK(res.converged);
    for (std::size_t i = 0; i < c.size(); ++i) CHECK(res.solution[i] == doctest::Approx(c[i]).epsilon(1e-12));
}

TEST_CASE("uncoupled scalar clearing equals its closed expression") {
    const double K = 9.0, v = 2.0, ybar = 5.0;
    fpcore::VectorMap map = [&](const std::vector<double>& x, std::vector<double>& y) {
        y[0] = std::min(std::max(K - v + 0.0 * x[0], 0.0), ybar);
    };
    FPConfig cfg;
    cfg.tol_delta = 1e-12;
    cfg.window_k = 2;
    auto res = fpcore::iterate_fp(map, {ybar}, cfg);
    CHECK(res.converged);
    CHECK(res.solution[0] == doctest::Approx(std::min(std::max(K - v, 0.0), ybar)));
}

TEST_CASE("damped iteration matches the undamped Picard oracle") {
    // random monotone coupled map on a 6-dim box
    std::mt19937_64 rng(71);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int rep = 0; rep < 10; ++rep) {
        const std::size_t n = 6;
        std::vector<double> k(n), box(n, 8.0);
        std::vector<std::vector<double>> wmat(n, std::vector<double>(n, 0.0));
        for (std::size_t i = 0; i < n; ++i) {
            k[i] = 6.0 * uni(rng);
            double row = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                wmat[i][j] = uni(rng);
                row += wmat[i][j];
            }
            for (std::size_t j = 0; j < n; ++j) wmat[i][j] *= 0.95 / row;
        }
        auto apply = [&](const std::vector<double>& x) {
            std::vector<double> y(n, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                double acc = k[i];
                for (std::size_t j = 0; j < n; ++j) acc += wmat[i][j] * x[j];
                y[i] = std::min(std::max(acc - 3.0, 0.0), box[i]);
            }
            return y;
        };
        fpcore::VectorMap map = [&](const std::vector<double>& x, std::vector<double>& y) {
            y = apply(x);
        };
        FPConfig cfg;
        cfg.step_eps = 0.5;
        cfg.tol_delta = 1e-11;
        cfg.window_k = 5;
        cfg.max_iters = 2000000;
        auto res = fpcore::iterate_fp(map, box, cfg);
        REQUIRE(res.converged);
        auto ref = oracles::picard_vector(apply, box, 1e-13);
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(std::abs(res.solution[i] - ref[i]) < 1e-8);
        }
    }
}

TEST_CASE("pure Picard and damped runs return the same fixed point") {
    fpcore::VectorMap map = [](const std::vector<double>& x, std::vector<double>& y) {
        y[0] = table1_rhs(x[0]);
    };
    FPConfig a;
    a.step_eps = 1.0;
    a.tol_delta = 1e-12;
    a.window_k = 4;
    a.max_iters = 1000000;
    FPConfig b = a;
    b.step_eps = 0.5;
    auto ra = fpcore::iterate_fp(map, {35.0}, a);
    auto rb = fpcore::iterate_fp(map, {35.0}, b);
    CHECK(ra.converged);
    CHECK(rb.converged);
    CHECK(std::abs(ra.solution[0] - rb.solution[0]) < 10.0 * 1e-12 * 35.0);
}

TEST_CASE("map leaving the box is reported as a contract violation") {
    fpcore::VectorMap map = [](const std::vector<double>& x, std::vector<double>& y) {
        y[0] = x[0] + 1.0;
    };
    CHECK_THROWS_AS(fpcore::iterate_fp(map, {1.0}, FPConfig{}), std::domain_error);
}

TEST_CASE("limit solver: zero map and the Table-1 scalar equation") {
    fpcore::VectorMap zero = [](const std::vector<double>& x, std::vector<double>& y) {
        for (auto& v : y) v = 0.0;
        (void)x;
    };
    auto z = fpcore::solve_limit_system(zero, {3.0, 1.0}, 1e-12);
    CHECK(z[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(z[1] == doctest::Approx(0.0).epsilon(1e-12));

    fpcore::VectorMap map = [](const std::vector<double>& x, std::vector<double>& y) {
        y[0] = table1_rhs(x[0]);
    };
    const double box = 35.0 * 0.999;
    auto sol = fpcore::solve_limit_system(map, {box}, 1e-12, /*check_monotone=*/true);
    CHECK(std::abs(sol[0] - 34.45688577855536) < 1e-6);
    const double ref = oracles::g2_limit_oracle(35.0, 7.0, 5.0, 15.0, 0.2, 0.001, 1.0);
    CHECK(std::abs(sol[0] - ref) < 1e-9);
}

TEST_CASE("decoupled two-group map solves as two scalar problems") {
    auto f1 = [](double x) { return std::min(std::max(4.0 - 1.0 + 0.9 * x, 0.0), 6.0) * 0.98; };
    auto f2 = [](double x) { return std::min(std::max(2.0 - 0.5 + 0.8 * x, 0.0), 5.0) * 0.95; };
    fpcore::VectorMap joint = [&](const std::vector<double>& x, std::vector<double>& y) {
        y[0] = f1(x[0]);
        y[1] = f2(x[1]);
    };
    auto sol = fpcore::solve_limit_system(joint, {6.0, 5.0}, 1e-12);
    const double s1 = oracles::bisect_scalar(f1, 6.0);
    const double s2 = oracles::bisect_scalar(f2, 5.0);
    CHECK(std::abs(sol[0] - s1) < 1e-10);
    CHECK(std::abs(sol[1] - s2) < 1e-10);
}

TEST_CASE("coupling coefficient, shared-weight model") {
    netgraph::ModelParams p;
    p.gamma = 0.5;
    p.p1 = p.p2 = p.pc1 = p.pc2 = 0.3;
    p.p_sb1 = p.p_sb2 = 0.1;
    p.weight_model = netgraph::WeightModel::SharedAll;
    auto rep = fpcore::contraction_model_a(p, 1.0, 0.5, 0.05);
    CHECK(rep.rho == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.satisfied_b4);

    auto single = netgraph::ModelParams::single(0.05, 0.2);
    auto rs = fpcore::contraction_model_a(single, 1.0, 0.5, 0.0);
    CHECK(rs.rho == doctest::Approx(1.0).epsilon(1e-12));

    auto degenerate = fpcore::contraction_model_a(p, 1.0, 1.0, 0.0);
    CHECK(degenerate.sigma_eta == doctest::Approx(1.0));
    CHECK_FALSE(degenerate.unique_fp_condition);
}

TEST_CASE("coupling coefficient, group-split model") {
    netgraph::ModelParams p;
    p.gamma = 0.5;
    p.p1 = p.p2 = 0.2;
    p.pc1 = p.pc2 = 0.1;
    p.lambda1 = p.lambda2 = 0.7;
    p.p_sb1 = p.p_sb2 = 0.15;
    auto rep = fpcore::contraction_model_b(p, 1.0, 0.5, 0.05);
    CHECK(rep.rho == doctest::Approx(1.0).epsilon(1e-12));

    // dedicated fractions lambda = 1: no cross terms remain
    netgraph::ModelParams q = p;
    q.lambda1 = q.lambda2 = 1.0;
    q.p_sb1 = 0.1;
    q.p_sb2 = 0.3;
    auto rq = fpcore::contraction_model_b(q, 1.0, 0.5, 0.0);
    const double expect = std::max(1.0 - 0.1, 1.0 - 0.3) + 0.5 * 0.1 + 0.5 * 0.3;
    CHECK(rq.rho == doctest::Approx(expect).epsilon(1e-12));

    // liability-network mapping: group 1 keeps everything in-group, so only
    // the group-2 cross share contributes
    netgraph::ModelParams fin = p;
    fin.lambda1 = 1.0;
    fin.pc1 = 0.0;
    fin.lambda2 = 0.8;
    fin.pc2 = 0.1;
    fin.p_sb1 = 0.01;
    fin.p_sb2 = 0.2;
    auto rf = fpcore::contraction_model_b(fin, 1.0, 0.5, 0.0);
    const double lhs = 1.0 * (1.0 - 0.01) + (0.5 / 0.5) * (1.0 - 0.8);
    const double rhs = 0.0 + 0.8 * (1.0 - 0.2);
    const double tail = 0.5 * 1.0 * 0.01 + 0.5 * 0.8 * 0.2;
    CHECK(rf.rho == doctest::Approx(std::max(lhs, rhs) + tail).epsilon(1e-12));
}

TEST_CASE("symmetric parameters keep rho at one" * doctest::description("property")) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> uni(0.05, 0.95);
    for (int i = 0; i < 200; ++i) {
        netgraph::ModelParams p;
        p.gamma = 0.5;
        p.p1 = p.p2 = p.pc1 = p.pc2 = uni(rng);
        p.p_sb1 = p.p_sb2 = uni(rng);
        p.lambda1 = p.lambda2 = uni(rng);
        auto ra = fpcore::contraction_model_a(p, 1.0, 0.5, 0.0);
        CHECK(ra.rho == doctest::Approx(1.0).epsilon(1e-10));
        auto rb = fpcore::contraction_model_b(p, 1.0, 0.5, 0.0);
        CHECK(rb.rho == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("group sums: complete graph with constant eta is exact") {
    netgraph::ModelParams p;
    p.gamma = 0.25;
    p.p1 = p.p2 = p.pc1 = p.pc2 = 1.0;
    p.p_sb1 = p.p_sb2 = 0.3;
    p.eta_mode = netgraph::EtaMode::Constant;
    p.weight_model = netgraph::WeightModel::SharedAll;
    auto pts = fpcore::lln_diagnostic(
        p, 1, {200}, 5, [](Rng&) { return 1.0; }, 1.0);
    // every lender count equals n, so the sum collapses to gamma (1 - p_sb)
    CHECK(pts[0].zeta == doctest::Approx(0.25 * 0.7).epsilon(1e-12));
    CHECK(pts[0].deviation < 1e-12);
}

TEST_CASE("group sums shrink toward the limit as n grows") {
    auto p = netgraph::ModelParams::single(0.05, 0.2, netgraph::EtaMode::Bernoulli,
                                           netgraph::WeightModel::SharedAll);
    auto pts = fpcore::lln_diagnostic(
        p, 2, {500, 2000, 8000}, 91,
        [](Rng& r) { return std::uniform_real_distribution<double>(0.0, 1.0)(r); }, 0.5,
        /*replicas=*/4);
    REQUIRE(pts.size() == 3);
    CHECK(pts[1].deviation < pts[0].deviation);
    CHECK(pts[2].deviation < pts[1].deviation);
    // limit uses E[M] = 0.5
    CHECK(pts[0].limit == doctest::Approx(0.5 * (1.0 - 0.2) / 0.05 * 1.0).epsilon(1e-12));
}
