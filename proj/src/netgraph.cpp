#include "clearnet/netgraph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "json.hpp"

namespace clearnet::netgraph {

namespace {

constexpr int kGraphRetryBudget = 100;     // whole-graph resamples on bad rows
constexpr int kRowWindowBudget = 100000;   // count redraws per degree-windowed row

bool is_prob(double p) { return p >= 0.0 && p <= 1.0 && std::isfinite(p); }

void check_prob(double p, const char* name) {
    if (!is_prob(p)) {
        throw std::invalid_argument(std::string("ModelParams: ") + name +
                                    " must lie in [0,1]");
    }
}

// Floyd's algorithm: k distinct values from {0,..,m-1}, emitted via `out`.
template <typename Out>
void sample_distinct(Rng& rng, std::uint32_t m, std::uint32_t k, Out out) {
    std::unordered_set<std::uint32_t> seen;
    seen.reserve(k * 2);
    for (std::uint32_t j = m - k; j < m; ++j) {
        std::uniform_int_distribution<std::uint32_t> pick(0, j);
        std::uint32_t t = pick(rng);
        if (!seen.insert(t).second) {
            seen.insert(j);
            out(j);
        } else {
            out(t);
        }
    }
}

std::uint32_t draw_binomial(Rng& rng, std::uint32_t m, double p) {
    if (m == 0 || p <= 0.0) return 0;
    if (p >= 1.0) return m;
    std::binomial_distribution<std::uint32_t> bin(m, p);
    return bin(rng);
}

struct RowNeeds {
    bool own = false;    // nonzero within-group numerator
    bool cross = false;  // nonzero cross-group numerator
};

RowNeeds row_needs(const ModelParams& params, int group, double eta) {
    RowNeeds needs;
    const double lambda = group == 1 ? params.lambda1 : params.lambda2;
    const double pcm = group == 1 ? params.pc1 : params.pc2;
    switch (params.weight_model) {
        case WeightModel::SharedAll:
            needs.own = (1.0 - eta) > 0.0;  // own/cross pooled; either creditor works
            break;
        case WeightModel::GroupSplit:
            needs.own = lambda * (1.0 - eta) > 0.0;
            needs.cross = (1.0 - lambda) > 0.0 && pcm > 0.0;
            break;
        case WeightModel::FixedDenominator:
            break;  // constant denominators never divide by a realized count
    }
    return needs;
}

double draw_eta(Rng& rng, const ModelParams& params, int group) {
    const double p_sb = group == 1 ? params.p_sb1 : params.p_sb2;
    if (params.eta_mode == EtaMode::Constant) return p_sb;
    std::bernoulli_distribution coin(p_sb);
    return coin(rng) ? 1.0 : 0.0;
}

// Edge probabilities for a borrower in `group`, split by the creditor block.
void block_probs(const ModelParams& params, int group, double& p_own, double& p_cross) {
    if (group == 1) {
        p_own = params.p1;
        p_cross = params.pc1;
    } else {
        p_own = params.p2;
        p_cross = params.pc2;
    }
}

struct RowDraw {
    std::uint32_t own = 0;
    std::uint32_t cross = 0;
};

// Lender counts for one row, optionally conditioned on a total-count window.
// Redrawing the pair until the total lands in the window matches discarding
// entry-wise draws whose count deviates too far.
bool draw_row_counts(Rng& rng, std::uint32_t own_n, double p_own, std::uint32_t cross_n,
                     double p_cross, const DegreeWindow& window, RowDraw& out) {
    for (int attempt = 0; attempt < kRowWindowBudget; ++attempt) {
        out.own = draw_binomial(rng, own_n, p_own);
        out.cross = draw_binomial(rng, cross_n, p_cross);
        const std::uint64_t total = std::uint64_t(out.own) + out.cross;
        if (total >= window.lo && total <= window.hi) return true;
    }
    return false;
}

void fill_row(Rng& rng, GraphSample& g, std::size_t j, const RowDraw& counts) {
    auto& row = g.creditors[j];
    row.clear();
    row.reserve(counts.own + counts.cross);
    const bool in_g1 = g.group_of(j) == 1;
    const std::uint32_t own_base = in_g1 ? 0 : std::uint32_t(g.n1);
    const std::uint32_t own_n = std::uint32_t(in_g1 ? g.n1 : g.n2);
    const std::uint32_t cross_base = in_g1 ? std::uint32_t(g.n1) : 0;
    const std::uint32_t cross_n = std::uint32_t(in_g1 ? g.n2 : g.n1);
    if (counts.own > 0) {
        sample_distinct(rng, own_n, counts.own,
                        [&](std::uint32_t t) { row.push_back(own_base + t); });
    }
    if (counts.cross > 0) {
        sample_distinct(rng, cross_n, counts.cross,
                        [&](std::uint32_t t) { row.push_back(cross_base + t); });
    }
    std::sort(row.begin(), row.end());
    g.own_count[j] = counts.own;
    g.cross_count[j] = counts.cross;
}

// Move edges between columns (within rows) until every column count lies in
// the window; row counts are untouched, so lender windows stay valid.
void repair_borrower_counts(Rng& rng, GraphSample& g, const DegreeWindow& window) {
    const std::size_t n = g.n;
    std::vector<std::int64_t> col(n, 0);
    for (const auto& row : g.creditors)
        for (auto i : row) ++col[i];

    const std::int64_t total =
        std::accumulate(col.begin(), col.end(), std::int64_t(0));
    if (total < std::int64_t(window.lo) * std::int64_t(n) ||
        (window.hi < n && total > std::int64_t(window.hi) * std::int64_t(n))) {
        throw std::runtime_error(
            "sample_regular_graph: borrower window infeasible for the realized edge count");
    }

    auto out_of_window = [&](std::size_t i) {
        return col[i] < std::int64_t(window.lo) || col[i] > std::int64_t(window.hi);
    };

    // Row membership as hash sets for O(1) move tests; n is small whenever
    // borrower windows are in play.
    std::vector<std::unordered_set<std::uint32_t>> rows(g.creditors.size());
    for (std::size_t j = 0; j < g.creditors.size(); ++j)
        rows[j] = {g.creditors[j].begin(), g.creditors[j].end()};

    // Donor/taker stay in the same group so each move only shifts a column
    // count; row counts and the within/cross split are untouched.
    auto peers = [&](std::size_t i, std::size_t& lo_peer, std::size_t& hi_peer) {
        const std::size_t begin = g.group_of(i) == 1 ? 0 : g.n1;
        const std::size_t end = g.group_of(i) == 1 ? g.n1 : n;
        lo_peer = hi_peer = begin;
        for (std::size_t t = begin; t < end; ++t) {
            if (col[t] < col[lo_peer]) lo_peer = t;
            if (col[t] > col[hi_peer]) hi_peer = t;
        }
    };

    std::uniform_int_distribution<std::size_t> pick_row(0, n - 1);
    const long budget = 2000L * long(n) + 100000L;
    long moves = 0;
    while (moves < budget) {
        std::size_t offender = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (out_of_window(i) &&
                (offender == n ||
                 std::max(std::int64_t(window.lo) - col[i], col[i] - std::int64_t(window.hi)) >
                     std::max(std::int64_t(window.lo) - col[offender],
                              col[offender] - std::int64_t(window.hi)))) {
                offender = i;
            }
        }
        if (offender == n) break;
        std::size_t lo_peer = 0, hi_peer = 0;
        peers(offender, lo_peer, hi_peer);
        const std::size_t donor = col[offender] > std::int64_t(window.hi) ? offender : hi_peer;
        const std::size_t taker = col[offender] > std::int64_t(window.hi) ? lo_peer : offender;
        if (donor == taker || col[donor] <= col[taker]) {
            throw std::runtime_error(
                "sample_regular_graph: borrower repair stalled; loosen the windows");
        }
        bool moved = false;
        for (int tries = 0; tries < 16 * int(n) && !moved; ++tries) {
            const std::size_t j = pick_row(rng);
            if (!rows[j].count(std::uint32_t(donor)) || rows[j].count(std::uint32_t(taker)))
                continue;
            rows[j].erase(std::uint32_t(donor));
            rows[j].insert(std::uint32_t(taker));
            --col[donor];
            ++col[taker];
            moved = true;
        }
        if (!moved) {
            throw std::runtime_error(
                "sample_regular_graph: borrower repair found no movable edge");
        }
        ++moves;
    }
    if (moves >= budget) {
        throw std::runtime_error("sample_regular_graph: borrower repair budget exhausted");
    }

    for (std::size_t j = 0; j < g.creditors.size(); ++j) {
        auto& row = g.creditors[j];
        row.assign(rows[j].begin(), rows[j].end());
        std::sort(row.begin(), row.end());
    }
}

GraphSample sample_impl(const ModelParams& params, std::size_t n,
                        const DegreeWindow* lender, const DegreeWindow* borrower,
                        std::uint64_t seed) {
    params.validate();
    if (n == 0) throw std::invalid_argument("sample_graph: n must be positive");

    std::size_t n1 = 0;
    if (!params.single_group) {
        const double exact = params.gamma * double(n);
        n1 = std::size_t(std::llround(exact));
        if (std::abs(exact - double(n1)) > 1e-9 || n1 == 0 || n1 == n) {
            throw std::invalid_argument(
                "sample_graph: n*gamma and n*(1-gamma) must be positive integers");
        }
    }

    for (int attempt = 0; attempt < kGraphRetryBudget; ++attempt) {
        Rng rng = make_rng(seed, std::uint64_t(attempt));
        GraphSample g;
        g.n = n;
        g.n1 = n1;
        g.n2 = n - n1;
        g.creditors.assign(n, {});
        g.own_count.assign(n, 0);
        g.cross_count.assign(n, 0);
        g.eta_sb.assign(n, 0.0);

        bool ok = true;
        for (std::size_t j = 0; j < n && ok; ++j) {
            const int group = g.group_of(j);
            g.eta_sb[j] = draw_eta(rng, params, group);
            double p_own = 0, p_cross = 0;
            block_probs(params, group, p_own, p_cross);
            const std::uint32_t own_n = std::uint32_t(group == 1 ? g.n1 : g.n2);
            const std::uint32_t cross_n = std::uint32_t(group == 1 ? g.n2 : g.n1);

            RowDraw counts;
            if (lender) {
                if (!draw_row_counts(rng, own_n, p_own, cross_n, p_cross, *lender, counts)) {
                    throw std::runtime_error(
                        "sample_regular_graph: lender window budget exhausted "
                        "(window too tight for the edge probability)");
                }
            } else {
                counts.own = draw_binomial(rng, own_n, p_own);
                counts.cross = draw_binomial(rng, cross_n, p_cross);
            }
            fill_row(rng, g, j, counts);

            const RowNeeds needs = row_needs(params, group, g.eta_sb[j]);
            if (params.weight_model == WeightModel::SharedAll) {
                if (needs.own && counts.own + counts.cross == 0) ok = false;
            } else {
                if (needs.own && counts.own == 0) ok = false;
                if (needs.cross && counts.cross == 0) ok = false;
            }
        }
        if (!ok) continue;  // a row lost every eligible creditor: redraw the graph

        if (borrower && borrower->constrained(n)) {
            repair_borrower_counts(rng, g, *borrower);
        }
        build_weights(g, params);
        return g;
    }
    throw std::runtime_error(
        "sample_graph: retry budget exhausted; connectivity too sparse for these "
        "parameters");
}

}  // namespace

ModelParams ModelParams::single(double p_ss, double p_sb, EtaMode mode, WeightModel wm) {
    ModelParams p;
    p.gamma = 0.5;
    p.p1 = p.p2 = p_ss;
    p.pc1 = p.pc2 = 0.0;
    p.p_sb1 = p.p_sb2 = p_sb;
    p.lambda1 = p.lambda2 = 1.0;
    p.eta_mode = mode;
    p.weight_model = wm;
    p.single_group = true;
    return p;
}

void ModelParams::validate() const {
    check_prob(p1, "p1");
    check_prob(p2, "p2");
    check_prob(pc1, "pc1");
    check_prob(pc2, "pc2");
    check_prob(p_sb1, "p_sb1");
    check_prob(p_sb2, "p_sb2");
    check_prob(lambda1, "lambda1");
    check_prob(lambda2, "lambda2");
    if (!single_group && (gamma <= 0.0 || gamma >= 1.0)) {
        throw std::invalid_argument("ModelParams: gamma must lie in (0,1)");
    }
    if (weight_model == WeightModel::SharedAll && !single_group) {
        if (gamma_p1() <= 0.0 || gamma_p2() <= 0.0) {
            throw std::invalid_argument(
                "ModelParams: shared weights need gamma_p1 > 0 and gamma_p2 > 0");
        }
    }
    if (weight_model == WeightModel::GroupSplit) {
        // an absent cross channel cannot carry the (1-lambda) share
        if (pc1 <= 0.0 && lambda1 < 1.0) {
            throw std::invalid_argument("ModelParams: lambda1 < 1 requires pc1 > 0");
        }
        if (pc2 <= 0.0 && lambda2 < 1.0) {
            throw std::invalid_argument("ModelParams: lambda2 < 1 requires pc2 > 0");
        }
    }
}

double GraphSample::weight(std::size_t j, std::size_t i) const {
    const auto& row = creditors[j];
    if (!std::binary_search(row.begin(), row.end(), std::uint32_t(i))) return 0.0;
    return group_of(i) == group_of(j) ? w_own[j] : w_cross[j];
}

double GraphSample::row_sum(std::size_t j) const {
    return w_own[j] * own_count[j] + w_cross[j] * cross_count[j] + w_big[j];
}

std::vector<std::vector<std::uint8_t>> GraphSample::dense_indicators() const {
    if (n > 20000) {
        throw std::runtime_error("dense_indicators: refusing n x n storage above n=20000");
    }
    std::vector<std::vector<std::uint8_t>> m(n, std::vector<std::uint8_t>(n, 0));
    for (std::size_t j = 0; j < n; ++j)
        for (auto i : creditors[j]) m[j][i] = 1;
    return m;
}

GraphSample sample_graph(const ModelParams& params, std::size_t n, std::uint64_t seed) {
    return sample_impl(params, n, nullptr, nullptr, seed);
}

GraphSample sample_regular_graph(const ModelParams& params, std::size_t n,
                                 DegreeWindow lender, DegreeWindow borrower,
                                 std::uint64_t seed) {
    return sample_impl(params, n, &lender, &borrower, seed);
}

void build_weights(GraphSample& g, const ModelParams& params) {
    const std::size_t n = g.n;
    g.w_own.assign(n, 0.0);
    g.w_cross.assign(n, 0.0);
    g.w_big.assign(n, 0.0);

    for (std::size_t j = 0; j < n; ++j) {
        const int group = g.group_of(j);
        const double eta = g.eta_sb[j];
        const double lambda = group == 1 ? params.lambda1 : params.lambda2;
        const double pcm = group == 1 ? params.pc1 : params.pc2;
        const double own = g.own_count[j];
        const double cross = g.cross_count[j];

        auto bad_row = [&](const char* what) {
            std::ostringstream msg;
            msg << "build_weights: row " << j << " has a nonzero " << what
                << " share but no creditor to carry it";
            throw std::runtime_error(msg.str());
        };

        switch (params.weight_model) {
            case WeightModel::SharedAll: {
                const double num = 1.0 - eta;
                if (num > 0.0 && own + cross == 0.0) bad_row("small-node");
                const double v = num > 0.0 ? num / (own + cross) : 0.0;
                g.w_own[j] = v;
                g.w_cross[j] = v;
                g.w_big[j] = eta;
                break;
            }
            case WeightModel::GroupSplit: {
                const double own_num = lambda * (1.0 - eta);
                const double cross_num = pcm > 0.0 ? (1.0 - lambda) : 0.0;
                if (own_num > 0.0 && own == 0.0) bad_row("within-group");
                if (cross_num > 0.0 && cross == 0.0) bad_row("cross-group");
                g.w_own[j] = own_num > 0.0 ? own_num / own : 0.0;
                g.w_cross[j] = cross_num > 0.0 ? cross_num / cross : 0.0;
                g.w_big[j] = eta * lambda;
                break;
            }
            case WeightModel::FixedDenominator: {
                // expected-count denominators; realized row sums only approach 1
                const double nn = double(n);
                if (params.lambda1 == 1.0 && params.lambda2 == 1.0 && !g.n1) {
                    // pooled single group: one shared denominator
                    g.w_own[j] = (1.0 - eta) / (nn * params.gamma_p2());
                    g.w_big[j] = eta;
                } else if (params.lambda1 == 1.0 && params.lambda2 == 1.0) {
                    const double gp = group == 1 ? params.gamma_p1() : params.gamma_p2();
                    if (gp <= 0.0) bad_row("shared");
                    const double v = (1.0 - eta) / (nn * gp);
                    g.w_own[j] = v;
                    g.w_cross[j] = v;
                    g.w_big[j] = eta;
                } else {
                    const double pm = group == 1 ? params.p1 : params.p2;
                    const double own_n = group == 1 ? double(g.n1) : double(g.n2);
                    const double cross_n = group == 1 ? double(g.n2) : double(g.n1);
                    const double own_num = lambda * (1.0 - eta);
                    const double cross_num = pcm > 0.0 ? (1.0 - lambda) : 0.0;
                    if (own_num > 0.0 && own_n * pm <= 0.0) bad_row("within-group");
                    if (cross_num > 0.0 && cross_n * pcm <= 0.0) bad_row("cross-group");
                    g.w_own[j] = own_num > 0.0 ? own_num / (own_n * pm) : 0.0;
                    g.w_cross[j] = cross_num > 0.0 ? cross_num / (cross_n * pcm) : 0.0;
                    g.w_big[j] = eta * lambda;
                }
                break;
            }
        }
    }
}

RegularityReport regularity_diagnostic(const GraphSample& g, const ModelParams& params) {
    RegularityReport rep;
    const double gp1 = params.gamma_p1();
    const double gp2 = params.gamma_p2();
    for (std::size_t j = 0; j < g.n; ++j) {
        const double a = g.lender_count(j);
        if (a == 0.0) {
            ++rep.isolated_borrowers;
            continue;
        }
        const bool in_g1 = g.group_of(j) == 1;
        const double gp = in_g1 ? gp1 : gp2;
        if (gp <= 0.0) continue;
        const double target = double(g.n) * gp;
        const double dev = std::abs(a / target - 1.0);
        const double inv_gap = std::abs(1.0 / a - 1.0 / target);
        if (in_g1) {
            rep.max_dev_g1 = std::max(rep.max_dev_g1, dev);
            rep.set_e_sum_g1 += inv_gap;
        } else {
            rep.max_dev_g2 = std::max(rep.max_dev_g2, dev);
            rep.set_e_sum_g2 += inv_gap;
        }
    }
    return rep;
}

std::string to_json(const GraphSample& g) {
    nlohmann::json j;
    j["n"] = g.n;
    j["n1"] = g.n1;
    j["n2"] = g.n2;
    j["eta_sb"] = g.eta_sb;
    j["creditors"] = g.creditors;
    return j.dump();
}

GraphSample graph_from_json(const std::string& text, const ModelParams& params) {
    const auto j = nlohmann::json::parse(text);
    GraphSample g;
    g.n = j.at("n").get<std::size_t>();
    g.n1 = j.at("n1").get<std::size_t>();
    g.n2 = j.at("n2").get<std::size_t>();
    if (g.n1 + g.n2 != g.n) throw std::invalid_argument("graph_from_json: group sizes");
    g.eta_sb = j.at("eta_sb").get<std::vector<double>>();
    g.creditors = j.at("creditors").get<std::vector<std::vector<std::uint32_t>>>();
    if (g.eta_sb.size() != g.n || g.creditors.size() != g.n) {
        throw std::invalid_argument("graph_from_json: inconsistent sizes");
    }
    g.own_count.assign(g.n, 0);
    g.cross_count.assign(g.n, 0);
    for (std::size_t r = 0; r < g.n; ++r) {
        auto& row = g.creditors[r];
        std::sort(row.begin(), row.end());
        for (auto i : row) {
            if (i >= g.n) throw std::invalid_argument("graph_from_json: node id out of range");
            if (g.group_of(i) == g.group_of(r))
                ++g.own_count[r];
            else
                ++g.cross_count[r];
        }
    }
    build_weights(g, params);
    return g;
}

}  // namespace clearnet::netgraph
