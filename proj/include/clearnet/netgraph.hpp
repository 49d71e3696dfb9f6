#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "clearnet/rng.hpp"

namespace clearnet::netgraph {

enum class EtaMode { Bernoulli, Constant };

// How a borrower's unit of liability is split across its creditors.
//   SharedAll:        equal shares over all connected small nodes, dedicated
//                     fraction eta to the big node.
//   GroupSplit:       fraction lambda_m stays within the group (eta of it to
//                     the big node), (1-lambda_m) goes to the other group.
//   FixedDenominator: same numerators, but divided by the expected creditor
//                     count instead of the realized one; rows sum to one only
//                     as n grows.
enum class WeightModel { SharedAll, GroupSplit, FixedDenominator };

struct ModelParams {
    double gamma = 0.5;  // fraction of nodes in group 1
    double p1 = 0.0;     // edge probability within group 1
    double p2 = 0.0;     // edge probability within group 2
    double pc1 = 0.0;    // edge probability group 1 -> group 2
    double pc2 = 0.0;    // edge probability group 2 -> group 1
    double p_sb1 = 0.0;  // mean big-node fraction, group 1
    double p_sb2 = 0.0;  // mean big-node fraction, group 2
    double lambda1 = 1.0;
    double lambda2 = 1.0;
    EtaMode eta_mode = EtaMode::Bernoulli;
    WeightModel weight_model = WeightModel::GroupSplit;
    // Pooled single-group network: every node lives in group 2 and connects
    // with probability p2; the stored two-group fields keep the mirrored
    // values (gamma=0.5, p1=p2, pc=0) used by the algebraic reductions.
    bool single_group = false;

    static ModelParams single(double p_ss, double p_sb,
                              EtaMode mode = EtaMode::Bernoulli,
                              WeightModel wm = WeightModel::GroupSplit);

    void validate() const;  // throws std::invalid_argument

    // expected lender count per node, divided by n (zero for an empty group)
    double gamma_p1() const { return single_group ? 0.0 : gamma * p1 + (1.0 - gamma) * pc1; }
    double gamma_p2() const { return single_group ? p2 : gamma * pc2 + (1.0 - gamma) * p2; }

    // effective group fractions used by diagnostics and limit formulas
    double frac1() const { return single_group ? 0.0 : gamma; }
    double frac2() const { return single_group ? 1.0 : 1.0 - gamma; }
};

// One realization of the liability graph. Storage is sparse: each borrower
// row keeps its sorted creditor list plus the (at most two) distinct weight
// levels of that row, so W(j,i) never needs an n x n matrix.
struct GraphSample {
    std::size_t n = 0;
    std::size_t n1 = 0;  // nodes [0, n1) are group 1
    std::size_t n2 = 0;  // nodes [n1, n) are group 2

    std::vector<std::vector<std::uint32_t>> creditors;  // per borrower, sorted
    std::vector<std::uint32_t> own_count;    // creditors in the borrower's group
    std::vector<std::uint32_t> cross_count;  // creditors in the other group
    std::vector<double> eta_sb;              // dedicated big-node fractions
    double eta_bs = 0.0;                     // big-to-small weight (inert, kept at 0)

    // per-row weight levels: W(j,i) = w_own[j] or w_cross[j] by i's group
    std::vector<double> w_own;
    std::vector<double> w_cross;
    std::vector<double> w_big;

    int group_of(std::size_t node) const { return node < n1 ? 1 : 2; }

    double weight(std::size_t j, std::size_t i) const;
    double lender_count(std::size_t j) const { return double(own_count[j]) + double(cross_count[j]); }
    // sum of all small-node weights plus the big-node share of row j
    double row_sum(std::size_t j) const;

    // Dense indicator matrix for inspection in tests; refuses to materialize
    // n x n storage for large networks.
    std::vector<std::vector<std::uint8_t>> dense_indicators() const;
};

struct RegularityReport {
    double max_dev_g1 = 0.0;
    double max_dev_g2 = 0.0;
    double set_e_sum_g1 = 0.0;
    double set_e_sum_g2 = 0.0;
    std::size_t isolated_borrowers = 0;
};

// Inclusive degree window; the default is unconstrained.
struct DegreeWindow {
    std::uint32_t lo = 0;
    std::uint32_t hi = std::numeric_limits<std::uint32_t>::max();
    bool constrained(std::size_t n) const { return lo > 0 || hi < n; }
};

// Draws indicators and eta, builds weights, and resamples the whole graph
// (up to a fixed budget) whenever some row has a nonzero weight numerator
// with no creditor to carry it. Throws std::runtime_error when the budget is
// exhausted and std::invalid_argument for inconsistent parameters.
GraphSample sample_graph(const ModelParams& params, std::size_t n, std::uint64_t seed);

// Degree-controlled variant: every row's lender count is forced into
// `lender`, and when `borrower` is constrained, column counts are repaired by
// moving edges within rows (row counts stay put).
GraphSample sample_regular_graph(const ModelParams& params, std::size_t n,
                                 DegreeWindow lender, DegreeWindow borrower,
                                 std::uint64_t seed);

// Fills w_own/w_cross/w_big from the realized creditor lists and eta values.
// Throws std::runtime_error naming the first row whose weight numerator has a
// zero denominator.
void build_weights(GraphSample& g, const ModelParams& params);

RegularityReport regularity_diagnostic(const GraphSample& g, const ModelParams& params);

// Compact replay form: group sizes, adjacency lists, eta vector.
std::string to_json(const GraphSample& g);
GraphSample graph_from_json(const std::string& text, const ModelParams& params);

}  // namespace clearnet::netgraph
