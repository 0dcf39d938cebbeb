#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace outage {

/// Physical description of a branch used by the fragility model.
struct BranchPhysical {
    int pole_count = 0;
    /// Conductor count of every span between neighbouring poles.
    std::vector<int> span_conductor_counts;
    double conductor_length_m = 0.0;
    double underground_probability = 0.0;

    /// Total conductor count over all spans.
    int conductor_count() const;
};

struct BranchNode {
    std::string id;
    std::optional<std::string> parent;
    BranchPhysical physical;
};

struct CustomerNode {
    std::string id;
    std::string branch;
    bool has_meter = false;
};

/// Validated radial feeder. Immutable after construction; branch and customer
/// indices are positions in the vectors passed to the constructor.
class FeederTopology {
  public:
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    /// Throws ValidationError on duplicate ids, dangling references, cycles,
    /// or a branch set without exactly one root.
    FeederTopology(std::vector<BranchNode> branches,
                   std::vector<CustomerNode> customers);

    std::size_t branch_count() const { return branches_.size(); }
    std::size_t customer_count() const { return customers_.size(); }

    const std::vector<BranchNode>& branches() const { return branches_; }
    const std::vector<CustomerNode>& customers() const { return customers_; }
    const BranchNode& branch(std::size_t i) const { return branches_[i]; }
    const CustomerNode& customer(std::size_t i) const { return customers_[i]; }

    std::size_t root() const { return root_; }
    /// Parent index, or npos for the root.
    std::size_t parent(std::size_t i) const { return parent_[i]; }
    std::span<const std::size_t> children(std::size_t i) const {
        return children_[i];
    }
    std::span<const std::size_t> customers_of(std::size_t i) const {
        return branch_customers_[i];
    }
    std::size_t customer_branch(std::size_t c) const {
        return customer_branch_[c];
    }
    /// Branches in breadth-first order from the root (parents first).
    std::span<const std::size_t> bfs_order() const { return bfs_; }
    std::size_t depth(std::size_t i) const { return depth_[i]; }

    /// Index lookup; npos when absent.
    std::size_t find_branch(const std::string& id) const;
    std::size_t find_customer(const std::string& id) const;
    /// Index lookup; throws ValidationError naming the id when absent.
    std::size_t branch_index(const std::string& id) const;
    std::size_t customer_index(const std::string& id) const;

    /// True when `ancestor` lies on the path from `node` to the root
    /// (a branch is its own ancestor).
    bool is_ancestor(std::size_t ancestor, std::size_t node) const;
    /// `b` and everything downstream of it, in BFS order.
    std::vector<std::size_t> subtree(std::size_t b) const;

  private:
    std::vector<BranchNode> branches_;
    std::vector<CustomerNode> customers_;
    std::unordered_map<std::string, std::size_t> branch_by_id_;
    std::unordered_map<std::string, std::size_t> customer_by_id_;
    std::size_t root_ = npos;
    std::vector<std::size_t> parent_;
    std::vector<std::vector<std::size_t>> children_;
    std::vector<std::vector<std::size_t>> branch_customers_;
    std::vector<std::size_t> customer_branch_;
    std::vector<std::size_t> bfs_;
    std::vector<std::size_t> depth_;
};

/// Parses the line-oriented feeder format:
///   branch <id> parent=<id|none> poles=<L> spans=<K1,K2,...> length_m=<f> p_underground=<f>
///   customer <id> branch=<id> meter=<0|1>
/// Throws ParseError for malformed text and ValidationError for structural
/// problems.
FeederTopology load_topology(std::istream& in);
FeederTopology load_topology_file(const std::string& path);
void write_topology(std::ostream& out, const FeederTopology& t);

/// Branch ids from `branch_id` up to and including the root.
std::vector<std::string> path_to_root(const FeederTopology& t,
                                      const std::string& branch_id);

/// Every de-energized branch whose upstream neighbour is energized (the
/// substation counts as energized). `states` is indexed by branch.
std::vector<std::size_t> select_outage_locations(const FeederTopology& t,
                                                 std::span<const int> states);

/// Id-keyed convenience overload; throws ValidationError when a branch is
/// missing from `states`. Result is sorted by id.
std::vector<std::string>
select_outage_locations(const FeederTopology& t,
                        const std::unordered_map<std::string, int>& states);

} // namespace outage
