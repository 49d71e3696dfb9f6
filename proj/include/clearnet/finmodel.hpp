#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "clearnet/fpcore.hpp"
#include "clearnet/netgraph.hpp"

namespace clearnet::finmodel {

enum class TaxMode { Proportional, Explicit };

// Two-group banking network: group 1 lends conservatively (and may lend yc to
// group 2), group 2 leverages harder and borrows more from the big bank.
struct FinanceParams {
    double k0 = 0.0;  // initial wealth per small bank
    double y1 = 0.0;  // group-1 borrowing at t=0
    double y2 = 0.0;  // group-2 borrowing at t=0
    double yc = 0.0;  // amount group 1 lends to group 2
    double r1 = 0.0;  // group-1 interest rate
    double r2 = 0.0;  // group-2 interest rate (r1 < r2)
    double u = 0.0;   // upward shock rate
    double d = 0.0;   // downward shock rate (d < r1)
    double w = 0.0;   // probability of the downward shock
    double dc = 0.0;  // common shock rate

    TaxMode tax_mode = TaxMode::Proportional;
    double kappa = 0.0;  // tax proportion when proportional
    double v1 = 0.0;     // explicit taxes otherwise
    double v2 = 0.0;

    double p_sb1 = 0.0;  // big-bank borrowing fraction, group 1
    double p_sb2 = 0.0;  // big-bank borrowing fraction, group 2
    double gamma = 0.5;  // group-1 fraction
    bool single_group = false;  // all banks in one group (gamma ignored, yc = 0)

    double k_b = 0.0;  // big-bank wealth per small bank; reporting only

    double ybar1() const { return y1 * (1.0 + r1); }
    double ybar2() const { return (y2 + yc) * (1.0 + r2); }
    double lambda2() const { return y2 / (y2 + yc); }
    double mu1() const;

    void validate() const;  // throws std::invalid_argument
};

struct ShockReturns {
    double omega1 = 0.0;  // risky investment per group-1 bank
    double omega2 = 0.0;
    double kd1 = 0.0, ku1 = 0.0;  // down/up returns, group 1
    double kd2 = 0.0, ku2 = 0.0;
    double lbar1 = 0.0, lbar2 = 0.0;  // expected returns
    double v1 = 0.0, v2 = 0.0;        // taxes actually in force
    bool omega1_clipped = false;      // group 1 over-lent and hit the floor
};

ShockReturns portfolio(const FinanceParams& params);

enum class G2Case {
    Resilient,        // nobody defaults
    ShockDefault,     // exactly the shocked banks default
    AllDefault,       // everyone defaults
    ShockDefaultFloor,  // shocked banks wiped to the payout floor, rest pay
    AllDefaultBelowCap, // everyone defaults, even the up-move below the cap
    AllDefaultMid,      // everyone defaults, down-move still above the floor
    Numeric,          // outside the closed forms; solved numerically
};

enum class G1Case { Resilient, ShockDefault, AllDefault, Numeric };

std::string to_string(G2Case c);
std::string to_string(G1Case c);

// Reduced inputs of the group-2 piecewise solution; exposed so the branch
// formulas can be probed directly (e.g. exactly at a threshold).
struct G2Inputs {
    double ybar2, v2, kd2, ku2, w, p_sb2, lambda2;
};
struct G1Inputs {
    double ybar1, v1, kd1, ku1, w, p_sb1;
    double beta;  // coupling mu1 * x2_inf
};

struct ClosedForm2 {
    double x2_inf = 0.0;
    double pd2 = 0.0;
    G2Case tag = G2Case::Numeric;
    double residual = 0.0;  // in the limit equation
};
struct ClosedForm1 {
    double x1_inf = 0.0;
    double pd1 = 0.0;
    G1Case tag = G1Case::Numeric;
    double residual = 0.0;
};

// Piecewise closed forms on the reduced inputs. At a threshold both adjacent
// branches are evaluated and the one with the smaller residual wins (ties go
// to the branch with fewer defaults). Returns the best candidate even when no
// branch hypothesis holds; callers check `residual`.
ClosedForm2 closed_form_g2_core(const G2Inputs& in);
ClosedForm1 closed_form_g1_core(const G1Inputs& in);

// Full-parameter versions; fall back to the numeric limit solver whenever the
// lemma hypotheses fail or the self-check residual is above 1e-9.
ClosedForm2 closed_form_g2(const FinanceParams& params);
ClosedForm1 closed_form_g1(const FinanceParams& params, double x2_inf);

// Numeric solution of the two coupled limit equations (group 2 first, then
// group 1 with the coupling term), to 1e-12 residual.
std::pair<double, double> limit_aggregates_numeric(const FinanceParams& params);

struct SystemicMeasures {
    double es1 = 0.0, es2 = 0.0;  // expected surplus per group
    double sau2 = 0.0;            // group-2 surplus under the up move
    double pd1 = 0.0, pd2 = 0.0;  // default probabilities
};

SystemicMeasures measures(const FinanceParams& params, double x1_inf, double x2_inf);

struct LimitSolution {
    double x1_inf = 0.0, x2_inf = 0.0;
    double pd1 = 0.0, pd2 = 0.0;
    double es1 = 0.0, es2 = 0.0, sau2 = 0.0;
    double mu1 = 0.0;
    G1Case case_g1 = G1Case::Numeric;
    G2Case case_g2 = G2Case::Numeric;
    double residual1 = 0.0, residual2 = 0.0;
};

LimitSolution solve(const FinanceParams& params);

struct RegimeReport {
    bool resilient_g1 = false;
    bool resilient_g2 = false;
    bool systemic_g2 = false;
    double delta_r = 0.0;  // mean risky return rate minus r2
    double delta_u = 0.0;  // up rate minus r2
    double burden = 0.0;   // dc + kappa
    int slope_es1_sign = 0;  // sign of d ES1 / d yc in the resilient regime
    int slope_sau_sign = 0;  // sign of d SaU / d yc
    bool g1_robust_applicable = false;  // y1 p_sb1 < y2 p_sb2, proportional taxes
};

RegimeReport classify_regime(const FinanceParams& params);

// Single-group theory pair (x_th, es_th) for the regime where exactly the
// shocked banks default and v2 > kd2. Throws when the hypothesis fails.
std::pair<double, double> theory_single_group(const FinanceParams& params);

// --- finite-n machinery -----------------------------------------------------

// Graph parameters matching the liability fractions of this network: group
// splits lambda1 = 1, lambda2 = y2/(y2+yc), no group-1 -> group-2 channel.
netgraph::ModelParams graph_params(const FinanceParams& params, double p1, double p2,
                                   double pc,
                                   netgraph::EtaMode eta = netgraph::EtaMode::Bernoulli);

// One two-point shock per bank: k_um with probability 1-w, else k_dm.
std::vector<double> sample_shocks(const netgraph::GraphSample& g,
                                  const FinanceParams& params,
                                  const ShockReturns& ret, std::uint64_t seed);

struct ClearingProblem {
    fpcore::VectorMap map;
    std::vector<double> box_upper;  // per-bank total liability
    std::vector<double> taxes;      // per-bank v_m
};

// X -> (min{(K_i + sum_j X_j W_(j,i) - v)_+, ybar})_i on the sampled graph.
ClearingProblem finite_clearing_map(const netgraph::GraphSample& g,
                                    const std::vector<double>& shocks,
                                    const FinanceParams& params);

// Incoming claims per creditor: B_i = sum_j X_j W_(j,i).
std::vector<double> incoming_claims(const netgraph::GraphSample& g,
                                    const std::vector<double>& x);

}  // namespace clearnet::finmodel
