#include "outage/bayes_net.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "outage/error.hpp"

namespace outage {

bool is_state_kind(NodeKind k) {
    return k == NodeKind::BranchState || k == NodeKind::CustomerState;
}

bool is_binary_kind(NodeKind k) {
    return is_state_kind(k) || k == NodeKind::HumanEvidence ||
           k == NodeKind::MeterEvidence;
}

std::string node_name(const NodeRef& ref, const FeederTopology& t) {
    switch (ref.kind) {
    case NodeKind::BranchState:
        return "D:" + t.branch(ref.index).id;
    case NodeKind::CustomerState:
        return "C:" + t.customer(ref.index).id;
    case NodeKind::HumanEvidence:
        return "Eh:" + t.customer(ref.index).id;
    case NodeKind::MeterEvidence:
        return "Em:" + t.customer(ref.index).id;
    case NodeKind::WindEvidence:
        return "Ew:" + t.branch(ref.index).id;
    case NodeKind::VegEvidence:
        return "Ev:" + t.branch(ref.index).id;
    case NodeKind::PhysEvidence:
        return "Eb:" + t.branch(ref.index).id;
    }
    return "?";
}

int BayesNet::add_node(NodeRef ref, FactorBinding binding) {
    refs_.push_back(ref);
    bindings_.push_back(binding);
    state_parent_.push_back(none);
    return static_cast<int>(refs_.size() - 1);
}

int BayesNet::node_index(const NodeRef& ref) const {
    auto check = [&](const std::vector<int>& v) {
        if (ref.index >= v.size() || v[ref.index] == none)
            throw ValidationError("node not present in net");
        return v[ref.index];
    };
    switch (ref.kind) {
    case NodeKind::BranchState:
        return check(branch_node_);
    case NodeKind::CustomerState:
        return check(customer_node_);
    case NodeKind::HumanEvidence:
        return check(human_node_);
    case NodeKind::MeterEvidence:
        return check(meter_node_);
    case NodeKind::WindEvidence:
        return check(wind_node_);
    case NodeKind::VegEvidence:
        return check(veg_node_);
    case NodeKind::PhysEvidence:
        return check(phys_node_);
    }
    throw ValidationError("bad node kind");
}

std::size_t BayesNet::parameter_count() const {
    std::size_t total = 0;
    for (std::size_t i = 0; i < refs_.size(); ++i)
        if (is_state_kind(refs_[i].kind))
            total += std::size_t{1} << parents(static_cast<int>(i)).size();
    return total;
}

std::vector<int> BayesNet::non_descendants(int node) const {
    std::vector<char> excluded(node_count(), 0);
    std::vector<int> stack{node};
    while (!stack.empty()) {
        int n = stack.back();
        stack.pop_back();
        if (excluded[n])
            continue;
        excluded[n] = 1;
        for (int c : children(n))
            stack.push_back(c);
    }
    for (int p : parents(node))
        excluded[p] = 1;
    std::vector<int> out;
    for (std::size_t i = 0; i < node_count(); ++i)
        if (!excluded[i])
            out.push_back(static_cast<int>(i));
    return out;
}

double BayesNet::factor(int node, int value, const Assignment& a,
                        int override_node, int override_value) const {
    const int sp = state_parent_[node];
    const int pv = sp == none ? 0
                   : sp == override_node ? override_value
                                         : a.values[sp];
    const FactorBinding& f = bindings_[node];
    switch (refs_[node].kind) {
    case NodeKind::BranchState:
    case NodeKind::CustomerState:
        // Upstream de-energization is absorbing; otherwise Bernoulli(a).
        if (pv)
            return value ? 1.0 : 0.0;
        return value ? f.a : 1.0 - f.a;
    case NodeKind::HumanEvidence:
    case NodeKind::MeterEvidence:
        if (pv)
            return value ? f.a : 1.0 - f.a;
        return value ? f.b : 1.0 - f.b;
    default:
        return 1.0;
    }
}

BayesNet build_bn(const FeederTopology& t, const ModelParams& model,
                  const EpisodeParams& episode,
                  const std::vector<bool>& meter_coverage,
                  const EvidenceSet& context) {
    const std::size_t k = t.branch_count();
    const std::size_t n = t.customer_count();
    // Binary human/meter values are irrelevant here; only branch context is
    // read, but densify validates every id.
    const DenseEvidence dense = densify(t, context, meter_coverage);
    const FragilityParams fragility = model.fragility();

    BayesNet bn;
    bn.episode_ = episode;
    if (context.elapsed_window) {
        if (!(*context.elapsed_window >= 0.0))
            throw ValidationError("negative evidence window");
        bn.episode_.delta_t = *context.elapsed_window;
    }
    const EpisodeParams& ep = bn.episode_;
    const double report = ep.report_probability();

    bn.branch_node_.assign(k, BayesNet::none);
    bn.customer_node_.assign(n, BayesNet::none);
    bn.human_node_.assign(n, BayesNet::none);
    bn.meter_node_.assign(n, BayesNet::none);
    bn.wind_node_.assign(k, BayesNet::none);
    bn.veg_node_.assign(k, BayesNet::none);
    bn.phys_node_.assign(k, BayesNet::none);

    for (std::size_t b = 0; b < k; ++b)
        bn.branch_node_[b] = bn.add_node(
            {NodeKind::BranchState, b},
            {branch_failure_probability(dense.branch[b], fragility), 0.0});
    for (std::size_t c = 0; c < n; ++c)
        bn.customer_node_[c] =
            bn.add_node({NodeKind::CustomerState, c}, {ep.pi2, 0.0});
    for (std::size_t c = 0; c < n; ++c)
        bn.human_node_[c] =
            bn.add_node({NodeKind::HumanEvidence, c}, {report, ep.pi3});
    for (std::size_t c = 0; c < n; ++c)
        if (meter_coverage[c])
            bn.meter_node_[c] =
                bn.add_node({NodeKind::MeterEvidence, c}, {ep.pi4, ep.pi5});
    for (std::size_t b = 0; b < k; ++b) {
        const auto& be = dense.branch[b];
        bn.wind_node_[b] =
            bn.add_node({NodeKind::WindEvidence, b}, {be.wind_speed, 0.0});
        bn.veg_node_[b] = bn.add_node(
            {NodeKind::VegEvidence, b},
            {be.vegetation.species_constant, be.vegetation.diameter_cm});
        bn.phys_node_[b] = bn.add_node({NodeKind::PhysEvidence, b}, {});
    }

    const std::size_t total = bn.refs_.size();
    std::vector<std::vector<int>> parents(total), children(total);
    auto edge = [&](int from, int to) {
        parents[to].push_back(from);
        children[from].push_back(to);
    };

    for (std::size_t b = 0; b < k; ++b) {
        const int d = bn.branch_node_[b];
        if (t.parent(b) != FeederTopology::npos) {
            const int dp = bn.branch_node_[t.parent(b)];
            edge(dp, d);
            bn.state_parent_[d] = dp;
        }
        edge(bn.wind_node_[b], d);
        edge(bn.veg_node_[b], d);
        edge(bn.phys_node_[b], d);
    }
    for (std::size_t c = 0; c < n; ++c) {
        const int d = bn.branch_node_[t.customer_branch(c)];
        const int cn = bn.customer_node_[c];
        edge(d, cn);
        bn.state_parent_[cn] = d;
        edge(cn, bn.human_node_[c]);
        bn.state_parent_[bn.human_node_[c]] = cn;
        if (bn.meter_node_[c] != BayesNet::none) {
            edge(cn, bn.meter_node_[c]);
            bn.state_parent_[bn.meter_node_[c]] = cn;
        }
    }

    auto flatten = [total](const std::vector<std::vector<int>>& lists,
                           std::vector<std::size_t>& off,
                           std::vector<int>& idx) {
        off.assign(total + 1, 0);
        for (std::size_t i = 0; i < total; ++i)
            off[i + 1] = off[i] + lists[i].size();
        idx.clear();
        idx.reserve(off.back());
        for (const auto& l : lists)
            idx.insert(idx.end(), l.begin(), l.end());
    };
    flatten(parents, bn.parent_off_, bn.parent_idx_);
    flatten(children, bn.child_off_, bn.child_idx_);

    // Context evidence first, then the feeder breadth-first with each branch
    // followed by its customers and their evidence.
    for (std::size_t b = 0; b < k; ++b) {
        bn.topo_.push_back(bn.wind_node_[b]);
        bn.topo_.push_back(bn.veg_node_[b]);
        bn.topo_.push_back(bn.phys_node_[b]);
    }
    for (std::size_t b : t.bfs_order()) {
        bn.topo_.push_back(bn.branch_node_[b]);
        bn.unknowns_.push_back(bn.branch_node_[b]);
        for (std::size_t c : t.customers_of(b)) {
            bn.topo_.push_back(bn.customer_node_[c]);
            bn.unknowns_.push_back(bn.customer_node_[c]);
            bn.topo_.push_back(bn.human_node_[c]);
            if (bn.meter_node_[c] != BayesNet::none)
                bn.topo_.push_back(bn.meter_node_[c]);
        }
    }
    return bn;
}

Assignment clamp_evidence(const BayesNet& bn, const FeederTopology& t,
                          const EvidenceSet& ev) {
    Assignment a;
    a.values.assign(bn.node_count(), 0);
    for (const auto& [id, v] : ev.human)
        a.values[bn.human_node(t.customer_index(id))] =
            static_cast<std::uint8_t>(v != 0);
    for (const auto& [id, v] : ev.meter) {
        const int m = bn.meter_node(t.customer_index(id));
        if (m == BayesNet::none)
            throw ValidationError("meter evidence for unmetered customer '" +
                                  id + "'");
        a.values[m] = static_cast<std::uint8_t>(v != 0);
    }
    return a;
}

double joint_log_prob(const BayesNet& bn, const Assignment& a) {
    if (a.values.size() != bn.node_count())
        throw ValidationError("incomplete assignment: size mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < bn.node_count(); ++i) {
        const int node = static_cast<int>(i);
        if (!is_binary_kind(bn.kind(node)))
            continue;
        if (a.values[i] > 1)
            throw ValidationError("incomplete assignment: node " +
                                  std::to_string(i) + " unset");
        const double f = bn.factor(node, a.values[i], a);
        if (f <= 0.0)
            return -std::numeric_limits<double>::infinity();
        total += std::log(f);
    }
    return total;
}

LocalWeights local_weights(const BayesNet& bn, int node, const Assignment& a) {
    double w0 = bn.factor(node, 0, a);
    double w1 = bn.factor(node, 1, a);
    for (int c : bn.children(node)) {
        const int cv = a.values[c];
        w0 *= bn.factor(c, cv, a, node, 0);
        w1 *= bn.factor(c, cv, a, node, 1);
        if (w0 < 1e-200 && w1 < 1e-200) {
            if (w0 == 0.0 && w1 == 0.0)
                break;
            // Common rescale keeps the ratio and avoids underflow.
            w0 *= 1e200;
            w1 *= 1e200;
        }
    }
    return {w0, w1};
}

BinaryDist local_conditional(const BayesNet& bn, int node,
                             const Assignment& a) {
    const LocalWeights w = local_weights(bn, node, a);
    const double z = w.w0 + w.w1;
    if (!(z > 0.0))
        throw ZeroSupportError("zero support for node " +
                               std::to_string(node) +
                               ": deterministic factors contradict the "
                               "evidence");
    return {w.w0 / z, w.w1 / z};
}

namespace {

// feasible[u][v]: the subtree below unknown u admits a positive-probability
// completion when u = v.
std::vector<std::array<bool, 2>> subtree_feasibility(const BayesNet& bn,
                                                     const Assignment& a) {
    std::vector<std::array<bool, 2>> ok(bn.node_count(), {true, true});
    auto unknowns = bn.unknowns();
    for (auto it = unknowns.rbegin(); it != unknowns.rend(); ++it) {
        const int u = *it;
        for (int v = 0; v < 2; ++v) {
            bool good = true;
            for (int w : bn.children(u)) {
                if (is_state_kind(bn.kind(w))) {
                    good = (bn.factor(w, 0, a, u, v) > 0.0 && ok[w][0]) ||
                           (bn.factor(w, 1, a, u, v) > 0.0 && ok[w][1]);
                } else {
                    good = bn.factor(w, a.values[w], a, u, v) > 0.0;
                }
                if (!good)
                    break;
            }
            ok[u][v] = good;
        }
    }
    return ok;
}

} // namespace

bool has_support(const BayesNet& bn, const Assignment& a) {
    const auto ok = subtree_feasibility(bn, a);
    for (int u : bn.unknowns()) {
        if (bn.state_parent(u) != BayesNet::none)
            continue;
        if (!((bn.factor(u, 0, a) > 0.0 && ok[u][0]) ||
              (bn.factor(u, 1, a) > 0.0 && ok[u][1])))
            return false;
    }
    return true;
}

std::size_t project_to_support(const BayesNet& bn, Assignment& a) {
    std::size_t flips = 0;
    // Bottom-up: a de-energized vertex whose current children contradict it
    // is re-energized, so outages never spread from a random start.
    auto unknowns = bn.unknowns();
    for (auto it = unknowns.rbegin(); it != unknowns.rend(); ++it) {
        const int u = *it;
        if (a.values[u] == 0)
            continue;
        for (int w : bn.children(u)) {
            if (bn.factor(w, a.values[w], a) == 0.0 &&
                bn.factor(w, a.values[w], a, u, 0) > 0.0) {
                a.values[u] = 0;
                ++flips;
                break;
            }
        }
    }
    const auto ok = subtree_feasibility(bn, a);
    for (int u : bn.unknowns()) {
        const int cur = a.values[u];
        auto allowed = [&](int v) {
            return bn.factor(u, v, a) > 0.0 && ok[u][v];
        };
        if (allowed(cur))
            continue;
        if (!allowed(1 - cur))
            throw ZeroSupportError(
                "evidence admits no positive-probability state "
                "(contradictory hard evidence)");
        a.values[u] = static_cast<std::uint8_t>(1 - cur);
        ++flips;
    }
    return flips;
}

} // namespace outage
