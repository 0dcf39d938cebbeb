#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "outage/evidence.hpp"
#include "outage/factors.hpp"
#include "outage/feeder.hpp"
#include "outage/params.hpp"

namespace outage {

enum class NodeKind : std::uint8_t {
    BranchState,   // D_i
    CustomerState, // C_i^j
    HumanEvidence, // E^h
    MeterEvidence, // E^m
    WindEvidence,  // E^w
    VegEvidence,   // E^v
    PhysEvidence,  // E^b
};

/// Identifies a vertex by kind plus topology index (branch index for branch
/// kinds, customer index for customer kinds).
struct NodeRef {
    NodeKind kind = NodeKind::BranchState;
    std::size_t index = 0;

    auto operator<=>(const NodeRef&) const = default;
};

bool is_state_kind(NodeKind k);
bool is_binary_kind(NodeKind k);

/// "D:<branch>", "C:<customer>", "Eh:<customer>", "Em:<customer>",
/// "Ew:<branch>", "Ev:<branch>", "Eb:<branch>".
std::string node_name(const NodeRef& ref, const FeederTopology& t);

/// Parameters bound to one vertex. Meaning depends on the kind:
///   D  : a = branch failure probability P_l
///   C  : a = pi2
///   E^h: a = report probability 1 - exp(-lambda1 dT), b = pi3
///   E^m: a = pi4, b = pi5
///   E^w: a = wind speed; E^v: a = species constant, b = diameter
struct FactorBinding {
    double a = 0.0;
    double b = 0.0;
};

/// Joint values of the binary vertices, indexed by node index. Continuous
/// evidence is bound into the net at build time.
struct Assignment {
    std::vector<std::uint8_t> values;

    int operator[](int node) const { return values[node]; }
};

/// Directed acyclic graph of branch/customer states and their evidence.
/// Immutable after build; all evaluation is const.
class BayesNet {
  public:
    static constexpr int none = -1;

    std::size_t node_count() const { return refs_.size(); }
    const NodeRef& ref(int node) const { return refs_[node]; }
    NodeKind kind(int node) const { return refs_[node].kind; }
    const FactorBinding& binding(int node) const { return bindings_[node]; }

    std::span<const int> parents(int node) const {
        return {parent_idx_.data() + parent_off_[node],
                parent_idx_.data() + parent_off_[node + 1]};
    }
    /// Children carrying a factor that depends on this node.
    std::span<const int> children(int node) const {
        return {child_idx_.data() + child_off_[node],
                child_idx_.data() + child_off_[node + 1]};
    }
    /// The binary parent whose value conditions the node's factor (D_{i-1}
    /// for D_i, D_i for customers, C for evidence), or `none`.
    int state_parent(int node) const { return state_parent_[node]; }

    /// Unknown state vertices (D and C) in topological order.
    std::span<const int> unknowns() const { return unknowns_; }
    /// Every vertex, parents before children.
    std::span<const int> topological_order() const { return topo_; }

    int branch_node(std::size_t b) const { return branch_node_[b]; }
    int customer_node(std::size_t c) const { return customer_node_[c]; }
    int human_node(std::size_t c) const { return human_node_[c]; }
    /// `none` for customers without a meter.
    int meter_node(std::size_t c) const { return meter_node_[c]; }
    int node_index(const NodeRef& ref) const;

    std::size_t branch_count() const { return branch_node_.size(); }
    std::size_t customer_count() const { return customer_node_.size(); }
    const EpisodeParams& episode() const { return episode_; }

    /// Sum over state vertices of 2^|Pa(x)|.
    std::size_t parameter_count() const;
    /// Vertices with no directed path from `node`, excluding its parents.
    std::vector<int> non_descendants(int node) const;

    /// P(x_node = v | parents) under `a`, with `override_node` read as
    /// `override_value`.
    double factor(int node, int value, const Assignment& a,
                  int override_node = none, int override_value = 0) const;

  private:
    friend BayesNet build_bn(const FeederTopology&, const ModelParams&,
                             const EpisodeParams&, const std::vector<bool>&,
                             const EvidenceSet&);

    int add_node(NodeRef ref, FactorBinding binding);

    std::vector<NodeRef> refs_;
    std::vector<FactorBinding> bindings_;
    std::vector<int> state_parent_;
    std::vector<std::size_t> parent_off_, child_off_;
    std::vector<int> parent_idx_, child_idx_;
    std::vector<int> unknowns_;
    std::vector<int> topo_;
    std::vector<int> branch_node_, customer_node_, human_node_, meter_node_;
    std::vector<int> wind_node_, veg_node_, phys_node_;
    EpisodeParams episode_;
};

/// Builds the net: one D per branch, one C and one E^h per customer, one E^m
/// per metered customer, and E^w/E^v/E^b per branch. Wind and vegetation
/// come from `context` and are folded into the D factors; its
/// `elapsed_window`, when set, replaces the episode's window.
BayesNet build_bn(const FeederTopology& t, const ModelParams& model,
                  const EpisodeParams& episode,
                  const std::vector<bool>& meter_coverage,
                  const EvidenceSet& context);

/// Assignment with evidence vertices clamped to `ev` and unknowns at 0.
Assignment clamp_evidence(const BayesNet& bn, const FeederTopology& t,
                          const EvidenceSet& ev);

/// log of the product of every bound factor; -inf when a deterministic
/// factor is violated.
double joint_log_prob(const BayesNet& bn, const Assignment& a);

/// Unnormalized two-point conditional of `node` given everything else.
struct LocalWeights {
    double w0 = 0.0;
    double w1 = 0.0;
};
LocalWeights local_weights(const BayesNet& bn, int node, const Assignment& a);

/// P(node | all other values). Throws ZeroSupportError when both values are
/// impossible.
BinaryDist local_conditional(const BayesNet& bn, int node,
                             const Assignment& a);

/// True when some completion of the unknowns has positive probability under
/// the evidence clamped in `a`.
bool has_support(const BayesNet& bn, const Assignment& a);

/// Moves the unknowns of `a` to a positive-probability state, changing a
/// vertex only when its current value is impossible given the (already
/// fixed) upstream values and the evidence below it. Returns the number of
/// flipped vertices; throws ZeroSupportError when the evidence admits no
/// state at all.
std::size_t project_to_support(const BayesNet& bn, Assignment& a);

} // namespace outage
