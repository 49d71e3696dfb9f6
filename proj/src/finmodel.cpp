#include "clearnet/finmodel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace clearnet::finmodel {

namespace {

constexpr double kSelfCheckTol = 1e-9;   // closed forms must satisfy their equation
constexpr double kDefaultSlack = 1e-9;   // full payment up to this absolute slack

double pos(double x) { return x > 0.0 ? x : 0.0; }

// right-hand side of the group-2 limit equation at aggregate claim x
double g2_rhs(const G2Inputs& in, double x) {
    const double down = std::min(pos(in.kd2 - in.v2 + x), in.ybar2);
    const double up = std::min(pos(in.ku2 - in.v2 + x), in.ybar2);
    return (in.w * down + (1.0 - in.w) * up) * (1.0 - in.p_sb2) * in.lambda2;
}

double g1_rhs(const G1Inputs& in, double x) {
    const double down = std::min(pos(in.kd1 - in.v1 + in.beta + x), in.ybar1);
    const double up = std::min(pos(in.ku1 - in.v1 + in.beta + x), in.ybar1);
    return (in.w * down + (1.0 - in.w) * up) * (1.0 - in.p_sb1);
}

// default probability by direct comparison of both shock outcomes at x
double g2_pd_at(const G2Inputs& in, double x) {
    double pd = 0.0;
    if (in.kd2 - in.v2 + x < in.ybar2 - kDefaultSlack) pd += in.w;
    if (in.ku2 - in.v2 + x < in.ybar2 - kDefaultSlack) pd += 1.0 - in.w;
    return pd;
}

double g1_pd_at(const G1Inputs& in, double x) {
    double pd = 0.0;
    if (in.kd1 - in.v1 + in.beta + x < in.ybar1 - kDefaultSlack) pd += in.w;
    if (in.ku1 - in.v1 + in.beta + x < in.ybar1 - kDefaultSlack) pd += 1.0 - in.w;
    return pd;
}

template <typename Case>
struct Candidate {
    double x = 0.0;
    double branch_pd = 0.0;
    Case tag{};
    bool condition = false;  // branch hypothesis holds (up to a small margin)
    bool valid = false;      // finite and inside the box
    double residual = std::numeric_limits<double>::infinity();
};

// Smallest residual wins; near-ties go to the branch whose hypothesis holds,
// then to the branch with fewer defaults.
template <typename Case>
const Candidate<Case>* pick(const std::vector<Candidate<Case>>& cands) {
    const Candidate<Case>* best = nullptr;
    for (const auto& c : cands) {
        if (!c.valid) continue;
        if (!best) {
            best = &c;
            continue;
        }
        const double margin = 1e-12 * (1.0 + std::abs(best->x));
        if (c.residual < best->residual - margin) {
            best = &c;
        } else if (c.residual < best->residual + margin) {
            if ((c.condition && !best->condition) ||
                (c.condition == best->condition && c.branch_pd < best->branch_pd)) {
                best = &c;
            }
        }
    }
    return best;
}

}  // namespace

std::string to_string(G2Case c) {
    switch (c) {
        case G2Case::Resilient: return "g2_resilient";
        case G2Case::ShockDefault: return "g2_shock_default";
        case G2Case::AllDefault: return "g2_all_default";
        case G2Case::ShockDefaultFloor: return "g2_shock_default_floor";
        case G2Case::AllDefaultBelowCap: return "g2_all_default_below_cap";
        case G2Case::AllDefaultMid: return "g2_all_default_mid";
        case G2Case::Numeric: return "g2_numeric";
    }
    return "g2_unknown";
}

std::string to_string(G1Case c) {
    switch (c) {
        case G1Case::Resilient: return "g1_resilient";
        case G1Case::ShockDefault: return "g1_shock_default";
        case G1Case::AllDefault: return "g1_all_default";
        case G1Case::Numeric: return "g1_numeric";
    }
    return "g1_unknown";
}

double FinanceParams::mu1() const {
    if (yc == 0.0 || single_group) return 0.0;
    return (1.0 - gamma) / gamma * (yc / y2) / (1.0 - p_sb2);
}

void FinanceParams::validate() const {
    auto fin = [&](double v, const char* name) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument(std::string("FinanceParams: ") + name +
                                        " must be finite");
        }
    };
    fin(k0, "k0"); fin(y1, "y1"); fin(y2, "y2"); fin(yc, "yc");
    fin(r1, "r1"); fin(r2, "r2"); fin(u, "u"); fin(d, "d");
    fin(w, "w"); fin(dc, "dc");
    if (!(d < r1 && r1 < r2 && r2 < u)) {
        throw std::invalid_argument("FinanceParams: need d < r1 < r2 < u");
    }
    if (w < 0.0 || w > 1.0) throw std::invalid_argument("FinanceParams: w must lie in [0,1]");
    if (y2 <= 0.0) throw std::invalid_argument("FinanceParams: y2 must be > 0");
    if (yc < 0.0) throw std::invalid_argument("FinanceParams: yc must be >= 0");
    if (k0 < 0.0) throw std::invalid_argument("FinanceParams: k0 must be >= 0");
    if (p_sb1 < 0.0 || p_sb1 > 1.0 || p_sb2 < 0.0 || p_sb2 > 1.0) {
        throw std::invalid_argument("FinanceParams: p_sb must lie in [0,1]");
    }
    if (tax_mode == TaxMode::Proportional && kappa < 0.0) {
        throw std::invalid_argument("FinanceParams: kappa must be >= 0");
    }
    if (tax_mode == TaxMode::Explicit && (v1 < 0.0 || v2 < 0.0)) {
        throw std::invalid_argument("FinanceParams: explicit taxes must be >= 0");
    }
    if (single_group) {
        if (yc != 0.0) {
            throw std::invalid_argument("FinanceParams: single-group mode requires yc = 0");
        }
    } else if (gamma <= 0.0 || gamma >= 1.0) {
        throw std::invalid_argument("FinanceParams: gamma must lie in (0,1)");
    }
}

ShockReturns portfolio(const FinanceParams& params) {
    params.validate();
    ShockReturns ret;
    const double cross_out = params.single_group
                                 ? 0.0
                                 : (1.0 - params.gamma) / params.gamma * params.yc;
    const double omega1_raw = params.k0 + params.y1 * params.p_sb1 - cross_out;
    ret.omega1 = pos(omega1_raw);
    ret.omega1_clipped = omega1_raw < 0.0;
    ret.omega2 = params.k0 + params.y2 * params.p_sb2 + params.yc;

    const double down = 1.0 + params.d - params.dc;
    const double up = 1.0 + params.u - params.dc;
    ret.kd1 = ret.omega1 * down;
    ret.ku1 = ret.omega1 * up;
    ret.kd2 = ret.omega2 * down;
    ret.ku2 = ret.omega2 * up;
    ret.lbar1 = params.w * ret.kd1 + (1.0 - params.w) * ret.ku1;
    ret.lbar2 = params.w * ret.kd2 + (1.0 - params.w) * ret.ku2;

    if (params.tax_mode == TaxMode::Proportional) {
        ret.v1 = params.kappa * ret.omega1;
        ret.v2 = params.kappa * ret.omega2;
    } else {
        ret.v1 = params.v1;
        ret.v2 = params.v2;
    }
    return ret;
}

ClosedForm2 closed_form_g2_core(const G2Inputs& in) {
    const double q = 1.0 - in.p_sb2;
    const double delta = q * in.lambda2;  // weight carried by small creditors
    const double box = in.ybar2 * delta;

    std::vector<Candidate<G2Case>> cands;
    auto add = [&](double x, double pd, G2Case tag, bool condition) {
        Candidate<G2Case> c;
        c.x = x;
        c.branch_pd = pd;
        c.tag = tag;
        c.condition = condition;
        c.valid = std::isfinite(x) && x >= -1e-12 && x <= box * (1.0 + 1e-12) + 1e-12;
        if (c.valid) c.residual = std::abs(g2_rhs(in, x) - x);
        cands.push_back(c);
    };

    if (in.kd2 >= in.v2) {
        // moderate shocks: the down move alone cannot push a bank below zero
        const double resilient_bound =
            q > 0.0 ? (in.ybar2 + in.v2 - in.kd2) / (in.ybar2 * q)
                    : std::numeric_limits<double>::infinity();
        const double spread = in.ybar2 - in.w * (in.ku2 - in.kd2);
        const double beta0 = spread > 0.0 && q > 0.0
                                 ? (in.ybar2 + in.v2 - in.ku2) / (spread * q)
                                 : 0.0;

        add(in.ybar2 * delta, 0.0, G2Case::Resilient, in.lambda2 >= resilient_bound);
        {
            const double denom = 1.0 - in.w * delta;
            add(denom > 0.0 ? (in.ybar2 * (1.0 - in.w) + in.w * (in.kd2 - in.v2)) * delta / denom
                            : std::numeric_limits<double>::quiet_NaN(),
                in.w, G2Case::ShockDefault,
                in.lambda2 > beta0 && in.lambda2 < resilient_bound);
        }
        {
            const double denom = 1.0 - delta;
            add(denom > 0.0 ? pos(in.lbar2 - in.v2) * delta / denom
                            : std::numeric_limits<double>::quiet_NaN(),
                1.0, G2Case::AllDefault, in.lambda2 < beta0);
        }
    } else {
        // large shocks: shocked banks always default; four payout patterns
        const double beta1 = (in.v2 - in.kd2) / (in.ybar2 * (1.0 - in.w) * q);
        const double beta2 =
            (in.ybar2 + in.v2 - in.ku2) / ((in.ybar2 - in.w * (in.ku2 - in.kd2)) * q);
        const double beta3 =
            (in.v2 - in.kd2) / ((1.0 - in.w) * (in.ku2 - in.kd2) * q);
        const double beta4 = (in.ybar2 - in.ku2 + in.v2) / (in.ybar2 * (1.0 - in.w) * q);

        add(in.ybar2 * (1.0 - in.w) * delta, in.w, G2Case::ShockDefaultFloor,
            beta4 < in.lambda2 && in.lambda2 <= beta1);
        {
            const double denom = 1.0 - delta * (1.0 - in.w);
            add(denom > 0.0 ? pos(in.ku2 - in.v2) * (1.0 - in.w) * delta / denom
                            : std::numeric_limits<double>::quiet_NaN(),
                1.0, G2Case::AllDefaultBelowCap,
                in.lambda2 < std::min(beta4, beta3));
        }
        {
            const double denom = 1.0 - in.w * delta;
            add(denom > 0.0 ? (in.w * (in.kd2 - in.v2) + in.ybar2 * (1.0 - in.w)) * delta / denom
                            : std::numeric_limits<double>::quiet_NaN(),
                in.w, G2Case::ShockDefault,
                in.lambda2 > std::max(beta2, beta1));
        }
        {
            const double denom = 1.0 - delta;
            add(denom > 0.0 ? pos(in.lbar2 - in.v2) * delta / denom
                            : std::numeric_limits<double>::quiet_NaN(),
                1.0, G2Case::AllDefaultMid,
                beta3 < in.lambda2 && in.lambda2 < beta2);
        }
    }

    const auto* best = pick(cands);
    ClosedForm2 out;
    if (!best) {
        out.tag = G2Case::Numeric;
        out.residual = std::numeric_limits<double>::infinity();
        return out;
    }
    out.x2_inf = std::clamp(best->x, 0.0, box);
    out.tag = best->tag;
    out.residual = best->residual;
    out.pd2 = g2_pd_at(in, out.x2_inf);
    return out;
}

ClosedForm1 closed_form_g1_core(const G1Inputs& in) {
    const double q = 1.0 - in.p_sb1;
    const double box = in.ybar1 * q;
    const double e1 = in.v1 - in.kd1 + in.ybar1 * in.p_sb1;
    const double lbar1 = in.w * in.kd1 + (1.0 - in.w) * in.ku1;
    const double e2 =
        in.v1 - lbar1 + in.p_sb1 * (in.ybar1 + in.w * (in.kd1 - in.ku1));

    std::vector<Candidate<G1Case>> cands;
    auto add = [&](double x, double pd, G1Case tag, bool condition) {
        Candidate<G1Case> c;
        c.x = x;
        c.branch_pd = pd;
        c.tag = tag;
        c.condition = condition;
        c.valid = std::isfinite(x) && x >= -1e-12 && x <= box * (1.0 + 1e-12) + 1e-12;
        if (c.valid) c.residual = std::abs(g1_rhs(in, x) - x);
        cands.push_back(c);
    };

    add(in.ybar1 * q, 0.0, G1Case::Resilient, in.beta >= e1);
    {
        const double denom = 1.0 - in.w * q;
        add(denom > 0.0
                ? (in.ybar1 * (1.0 - in.w) + in.w * (in.kd1 - in.v1 + in.beta)) * q / denom
                : std::numeric_limits<double>::quiet_NaN(),
            in.w, G1Case::ShockDefault, e2 <= in.beta && in.beta < e1);
    }
    if (in.p_sb1 > 0.0) {
        add((lbar1 - in.v1 + in.beta) * q / in.p_sb1, 1.0, G1Case::AllDefault,
            in.beta <= e2);
    }

    const auto* best = pick(cands);
    ClosedForm1 out;
    if (!best) {
        out.tag = G1Case::Numeric;
        out.residual = std::numeric_limits<double>::infinity();
        return out;
    }
    out.x1_inf = std::clamp(best->x, 0.0, box);
    out.tag = best->tag;
    out.residual = best->residual;
    out.pd1 = g1_pd_at(in, out.x1_inf);
    return out;
}

namespace {

G2Inputs g2_inputs(const FinanceParams& params, const ShockReturns& ret) {
    return {params.ybar2(), ret.v2, ret.kd2, ret.ku2, params.w, params.p_sb2,
            params.lambda2()};
}

G1Inputs g1_inputs(const FinanceParams& params, const ShockReturns& ret, double beta) {
    return {params.ybar1(), ret.v1, ret.kd1, ret.ku1, params.w, params.p_sb1, beta};
}

double solve_g2_numeric(const G2Inputs& in) {
    fpcore::VectorMap map = [&in](const std::vector<double>& x, std::vector<double>& y) {
        y[0] = g2_rhs(in, x[0]);
    };
    const double box = in.ybar2 * (1.0 - in.p_sb2) * in.lambda2;
    return fpcore::solve_limit_system(map, {box}, 1e-12)[0];
}

double solve_g1_numeric(const G1Inputs& in) {
    fpcore::VectorMap map = [&in](const std::vector<double>& x, std::vector<double>& y) {
        y[0] = g1_rhs(in, x[0]);
    };
    const double box = in.ybar1 * (1.0 - in.p_sb1);
    return fpcore::solve_limit_system(map, {box}, 1e-12)[0];
}

}  // namespace

ClosedForm2 closed_form_g2(const FinanceParams& params) {
    params.validate();
    const ShockReturns ret = portfolio(params);
    const G2Inputs in = g2_inputs(params, ret);

    const bool small_shock = ret.kd2 >= ret.v2;
    const bool large_shock =
        ret.v2 > ret.kd2 && in.ybar2 > in.w * (in.ku2 - in.kd2);
    if (small_shock || large_shock) {
        ClosedForm2 cf = closed_form_g2_core(in);
        if (cf.residual < kSelfCheckTol) return cf;
    }
    ClosedForm2 out;
    out.x2_inf = solve_g2_numeric(in);
    out.tag = G2Case::Numeric;
    out.residual = std::abs(g2_rhs(in, out.x2_inf) - out.x2_inf);
    out.pd2 = g2_pd_at(in, out.x2_inf);
    return out;
}

ClosedForm1 closed_form_g1(const FinanceParams& params, double x2_inf) {
    params.validate();
    const ShockReturns ret = portfolio(params);
    const G1Inputs in = g1_inputs(params, ret, params.mu1() * x2_inf);

    if (ret.kd1 - ret.v1 + in.beta >= 0.0) {
        ClosedForm1 cf = closed_form_g1_core(in);
        if (cf.residual < kSelfCheckTol) return cf;
    }
    ClosedForm1 out;
    out.x1_inf = solve_g1_numeric(in);
    out.tag = G1Case::Numeric;
    out.residual = std::abs(g1_rhs(in, out.x1_inf) - out.x1_inf);
    out.pd1 = g1_pd_at(in, out.x1_inf);
    return out;
}

std::pair<double, double> limit_aggregates_numeric(const FinanceParams& params) {
    params.validate();
    const ShockReturns ret = portfolio(params);
    const double x2 = solve_g2_numeric(g2_inputs(params, ret));
    const double x1 = solve_g1_numeric(g1_inputs(params, ret, params.mu1() * x2));
    return {x1, x2};
}

SystemicMeasures measures(const FinanceParams& params, double x1_inf, double x2_inf) {
    const ShockReturns ret = portfolio(params);
    const double beta = params.mu1() * x2_inf;
    SystemicMeasures m;
    m.es1 = params.w * pos(ret.kd1 + x1_inf + beta - ret.v1 - params.ybar1()) +
            (1.0 - params.w) * pos(ret.ku1 + x1_inf + beta - ret.v1 - params.ybar1());
    m.es2 = params.w * pos(ret.kd2 + x2_inf - ret.v2 - params.ybar2()) +
            (1.0 - params.w) * pos(ret.ku2 + x2_inf - ret.v2 - params.ybar2());
    m.sau2 = pos(ret.ku2 + x2_inf - ret.v2 - params.ybar2());
    m.pd1 = g1_pd_at(g1_inputs(params, ret, beta), x1_inf);
    m.pd2 = g2_pd_at(g2_inputs(params, ret), x2_inf);
    return m;
}

LimitSolution solve(const FinanceParams& params) {
    const ClosedForm2 cf2 = closed_form_g2(params);
    const ClosedForm1 cf1 = closed_form_g1(params, cf2.x2_inf);
    const SystemicMeasures m = measures(params, cf1.x1_inf, cf2.x2_inf);

    LimitSolution sol;
    sol.x1_inf = cf1.x1_inf;
    sol.x2_inf = cf2.x2_inf;
    sol.pd1 = cf1.pd1;
    sol.pd2 = cf2.pd2;
    sol.es1 = m.es1;
    sol.es2 = m.es2;
    sol.sau2 = m.sau2;
    sol.mu1 = params.mu1();
    sol.case_g1 = cf1.tag;
    sol.case_g2 = cf2.tag;
    sol.residual1 = cf1.residual;
    sol.residual2 = cf2.residual;
    return sol;
}

RegimeReport classify_regime(const FinanceParams& params) {
    params.validate();
    const LimitSolution sol = solve(params);

    RegimeReport rep;
    rep.resilient_g1 = sol.pd1 == 0.0;
    rep.resilient_g2 = sol.pd2 == 0.0;
    rep.systemic_g2 = sol.pd2 == 1.0;

    const double rbar = params.u * (1.0 - params.w) + params.d * params.w;
    rep.delta_r = rbar - params.r2;
    rep.delta_u = params.u - params.r2;
    rep.burden = params.dc + (params.tax_mode == TaxMode::Proportional ? params.kappa : 0.0);

    auto sign = [](double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); };
    rep.slope_es1_sign = sign(rep.burden - rep.delta_r);
    rep.slope_sau_sign = sign(rep.delta_u - rep.burden);
    rep.g1_robust_applicable = params.tax_mode == TaxMode::Proportional &&
                               params.y1 * params.p_sb1 < params.y2 * params.p_sb2;
    return rep;
}

std::pair<double, double> theory_single_group(const FinanceParams& params) {
    params.validate();
    if (params.yc != 0.0) {
        throw std::invalid_argument("theory_single_group: requires yc = 0");
    }
    const ShockReturns ret = portfolio(params);
    const double q = 1.0 - params.p_sb2;
    const double x_th = (params.ybar2() * (1.0 - params.w) +
                         (ret.kd2 - ret.v2) * params.w) /
                        (1.0 - params.w * q) * q;
    const double es_th = (ret.ku2 - ret.v2 + x_th - params.ybar2()) * (1.0 - params.w);

    const G2Inputs in = g2_inputs(params, ret);
    if (std::abs(g2_rhs(in, x_th) - x_th) >= kSelfCheckTol) {
        throw std::domain_error(
            "theory_single_group: parameters leave the shocked-banks-default regime");
    }
    return {x_th, es_th};
}

netgraph::ModelParams graph_params(const FinanceParams& params, double p1, double p2,
                                   double pc, netgraph::EtaMode eta) {
    params.validate();
    if (params.single_group) {
        return netgraph::ModelParams::single(p2, params.p_sb2, eta);
    }
    netgraph::ModelParams mp;
    mp.gamma = params.gamma;
    mp.p1 = p1;
    mp.p2 = p2;
    mp.pc1 = 0.0;  // group 1 never borrows from group 2
    mp.pc2 = pc;
    mp.p_sb1 = params.p_sb1;
    mp.p_sb2 = params.p_sb2;
    mp.lambda1 = 1.0;
    mp.lambda2 = params.lambda2();
    mp.eta_mode = eta;
    mp.weight_model = netgraph::WeightModel::GroupSplit;
    if (params.yc > 0.0 && pc <= 0.0) {
        throw std::invalid_argument("graph_params: yc > 0 needs a cross channel pc > 0");
    }
    return mp;
}

std::vector<double> sample_shocks(const netgraph::GraphSample& g,
                                  const FinanceParams& params,
                                  const ShockReturns& ret, std::uint64_t seed) {
    std::vector<double> shocks(g.n, 0.0);
    Rng rng = make_rng(seed, 0);
    std::bernoulli_distribution down(params.w);
    for (std::size_t i = 0; i < g.n; ++i) {
        const bool hit = down(rng);
        if (g.group_of(i) == 1) {
            shocks[i] = hit ? ret.kd1 : ret.ku1;
        } else {
            shocks[i] = hit ? ret.kd2 : ret.ku2;
        }
    }
    return shocks;
}

std::vector<double> incoming_claims(const netgraph::GraphSample& g,
                                    const std::vector<double>& x) {
    std::vector<double> claims(g.n, 0.0);
    for (std::size_t j = 0; j < g.n; ++j) {
        if (x[j] == 0.0) continue;
        const double own = g.w_own[j] * x[j];
        const double cross = g.w_cross[j] * x[j];
        const bool j_in_g1 = g.group_of(j) == 1;
        for (auto i : g.creditors[j]) {
            const bool same = (i < g.n1) == j_in_g1;
            claims[i] += same ? own : cross;
        }
    }
    return claims;
}

ClearingProblem finite_clearing_map(const netgraph::GraphSample& g,
                                    const std::vector<double>& shocks,
                                    const FinanceParams& params) {
    if (shocks.size() != g.n) {
        throw std::invalid_argument("finite_clearing_map: one shock per bank required");
    }
    const ShockReturns ret = portfolio(params);

    ClearingProblem prob;
    prob.box_upper.resize(g.n);
    prob.taxes.resize(g.n);
    for (std::size_t i = 0; i < g.n; ++i) {
        const bool in_g1 = g.group_of(i) == 1;
        prob.box_upper[i] = in_g1 ? params.ybar1() : params.ybar2();
        prob.taxes[i] = in_g1 ? ret.v1 : ret.v2;
    }

    // capture the graph by reference: samples are immutable once built
    const auto* graph = &g;
    auto shocks_copy = shocks;
    auto box = prob.box_upper;
    auto taxes = prob.taxes;
    prob.map = [graph, shocks_copy = std::move(shocks_copy), box = std::move(box),
                taxes = std::move(taxes)](const std::vector<double>& x,
                                          std::vector<double>& y) {
        const auto claims = incoming_claims(*graph, x);
        for (std::size_t i = 0; i < x.size(); ++i) {
            y[i] = std::min(pos(shocks_copy[i] + claims[i] - taxes[i]), box[i]);
        }
    };
    return prob;
}

}  // namespace clearnet::finmodel
