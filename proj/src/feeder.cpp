#include "outage/feeder.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "outage/error.hpp"
#include "text_util.hpp"

namespace outage {

int BranchPhysical::conductor_count() const {
    int total = 0;
    for (int k : span_conductor_counts)
        total += k;
    return total;
}

FeederTopology::FeederTopology(std::vector<BranchNode> branches,
                               std::vector<CustomerNode> customers)
    : branches_(std::move(branches)), customers_(std::move(customers)) {
    const std::size_t k = branches_.size();
    if (k == 0)
        throw ValidationError("feeder has no branches");

    for (std::size_t i = 0; i < k; ++i) {
        const auto& b = branches_[i];
        if (b.id.empty())
            throw ValidationError("branch with empty id");
        if (!branch_by_id_.emplace(b.id, i).second)
            throw ValidationError("duplicate branch id '" + b.id + "'");
        const auto& ph = b.physical;
        if (ph.pole_count < 0)
            throw ValidationError("branch '" + b.id + "': negative pole count");
        for (int c : ph.span_conductor_counts)
            if (c < 0)
                throw ValidationError("branch '" + b.id +
                                      "': negative conductor count");
        if (!(ph.conductor_length_m >= 0.0))
            throw ValidationError("branch '" + b.id +
                                  "': negative conductor length");
        if (!(ph.underground_probability >= 0.0 &&
              ph.underground_probability <= 1.0))
            throw ValidationError("branch '" + b.id +
                                  "': p_underground outside [0,1]");
    }

    parent_.assign(k, npos);
    children_.assign(k, {});
    for (std::size_t i = 0; i < k; ++i) {
        const auto& b = branches_[i];
        if (!b.parent) {
            if (root_ != npos)
                throw ValidationError("multiple root branches: '" +
                                      branches_[root_].id + "' and '" + b.id +
                                      "'");
            root_ = i;
            continue;
        }
        if (*b.parent == b.id)
            throw ValidationError("branch '" + b.id + "' is its own parent");
        auto it = branch_by_id_.find(*b.parent);
        if (it == branch_by_id_.end())
            throw ValidationError("branch '" + b.id +
                                  "' references unknown parent '" +
                                  *b.parent + "'");
        parent_[i] = it->second;
        children_[it->second].push_back(i);
    }
    if (root_ == npos)
        throw ValidationError("cycle: no root branch (every branch has a "
                              "parent)");

    // BFS from the root; anything unreached sits on a cycle.
    depth_.assign(k, 0);
    bfs_.reserve(k);
    bfs_.push_back(root_);
    for (std::size_t head = 0; head < bfs_.size(); ++head) {
        std::size_t b = bfs_[head];
        for (std::size_t c : children_[b]) {
            depth_[c] = depth_[b] + 1;
            bfs_.push_back(c);
        }
    }
    if (bfs_.size() != k) {
        std::vector<char> seen(k, 0);
        for (auto b : bfs_)
            seen[b] = 1;
        for (std::size_t i = 0; i < k; ++i)
            if (!seen[i])
                throw ValidationError("cycle through branch '" +
                                      branches_[i].id + "'");
    }

    branch_customers_.assign(k, {});
    customer_branch_.resize(customers_.size());
    for (std::size_t c = 0; c < customers_.size(); ++c) {
        const auto& cu = customers_[c];
        if (cu.id.empty())
            throw ValidationError("customer with empty id");
        if (!customer_by_id_.emplace(cu.id, c).second)
            throw ValidationError("duplicate customer id '" + cu.id + "'");
        auto it = branch_by_id_.find(cu.branch);
        if (it == branch_by_id_.end())
            throw ValidationError("customer '" + cu.id +
                                  "' references unknown branch '" + cu.branch +
                                  "'");
        customer_branch_[c] = it->second;
        branch_customers_[it->second].push_back(c);
    }
}

std::size_t FeederTopology::find_branch(const std::string& id) const {
    auto it = branch_by_id_.find(id);
    return it == branch_by_id_.end() ? npos : it->second;
}

std::size_t FeederTopology::find_customer(const std::string& id) const {
    auto it = customer_by_id_.find(id);
    return it == customer_by_id_.end() ? npos : it->second;
}

std::size_t FeederTopology::branch_index(const std::string& id) const {
    auto i = find_branch(id);
    if (i == npos)
        throw ValidationError("unknown branch id '" + id + "'");
    return i;
}

std::size_t FeederTopology::customer_index(const std::string& id) const {
    auto i = find_customer(id);
    if (i == npos)
        throw ValidationError("unknown customer id '" + id + "'");
    return i;
}

bool FeederTopology::is_ancestor(std::size_t ancestor,
                                 std::size_t node) const {
    for (std::size_t b = node; b != npos; b = parent_[b])
        if (b == ancestor)
            return true;
    return false;
}

std::vector<std::size_t> FeederTopology::subtree(std::size_t b) const {
    std::vector<std::size_t> out{b};
    for (std::size_t head = 0; head < out.size(); ++head)
        for (std::size_t c : children_[out[head]])
            out.push_back(c);
    return out;
}

namespace {

BranchNode parse_branch(const std::vector<std::string_view>& tok, int line) {
    if (tok.size() < 2)
        throw ParseError("branch record without id", line);
    BranchNode b;
    b.id = std::string(tok[1]);
    bool has_parent = false;
    for (std::size_t i = 2; i < tok.size(); ++i) {
        auto [key, value] = detail::split_key_value(tok[i], line);
        if (key == "parent") {
            has_parent = true;
            if (value != "none")
                b.parent = std::string(value);
        } else if (key == "poles") {
            b.physical.pole_count =
                static_cast<int>(detail::parse_int(value, "poles", line));
        } else if (key == "spans") {
            if (!value.empty())
                for (auto part : detail::split_on(value, ','))
                    b.physical.span_conductor_counts.push_back(
                        static_cast<int>(detail::parse_int(part, "spans", line)));
        } else if (key == "length_m") {
            b.physical.conductor_length_m =
                detail::parse_double(value, "length_m", line);
        } else if (key == "p_underground") {
            b.physical.underground_probability =
                detail::parse_double(value, "p_underground", line);
        } else {
            throw ParseError("unknown branch key '" + std::string(key) + "'",
                             line);
        }
    }
    if (!has_parent)
        throw ParseError("branch '" + b.id + "' missing parent=", line);
    return b;
}

CustomerNode parse_customer(const std::vector<std::string_view>& tok,
                            int line) {
    if (tok.size() < 2)
        throw ParseError("customer record without id", line);
    CustomerNode c;
    c.id = std::string(tok[1]);
    bool has_branch = false;
    for (std::size_t i = 2; i < tok.size(); ++i) {
        auto [key, value] = detail::split_key_value(tok[i], line);
        if (key == "branch") {
            has_branch = true;
            c.branch = std::string(value);
        } else if (key == "meter") {
            c.has_meter = detail::parse_bit(value, "meter", line) == 1;
        } else {
            throw ParseError("unknown customer key '" + std::string(key) + "'",
                             line);
        }
    }
    if (!has_branch)
        throw ParseError("customer '" + c.id + "' missing branch=", line);
    return c;
}

} // namespace

FeederTopology load_topology(std::istream& in) {
    std::vector<BranchNode> branches;
    std::vector<CustomerNode> customers;
    std::string text;
    int line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (detail::is_skippable(text))
            continue;
        auto tok = detail::split_ws(text);
        if (tok[0] == "branch")
            branches.push_back(parse_branch(tok, line));
        else if (tok[0] == "customer")
            customers.push_back(parse_customer(tok, line));
        else
            throw ParseError("unknown record '" + std::string(tok[0]) + "'",
                             line);
    }
    return FeederTopology(std::move(branches), std::move(customers));
}

FeederTopology load_topology_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open feeder file '" + path + "'");
    try {
        return load_topology(in);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

void write_topology(std::ostream& out, const FeederTopology& t) {
    out << "# feeder: " << t.branch_count() << " branches, "
        << t.customer_count() << " customers\n";
    std::ostringstream num;
    num << std::setprecision(17);
    for (const auto& b : t.branches()) {
        out << "branch " << b.id << " parent=" << b.parent.value_or("none")
            << " poles=" << b.physical.pole_count << " spans=";
        for (std::size_t i = 0; i < b.physical.span_conductor_counts.size();
             ++i)
            out << (i ? "," : "") << b.physical.span_conductor_counts[i];
        num.str("");
        num << b.physical.conductor_length_m;
        out << " length_m=" << num.str();
        num.str("");
        num << b.physical.underground_probability;
        out << " p_underground=" << num.str() << '\n';
    }
    for (const auto& c : t.customers())
        out << "customer " << c.id << " branch=" << c.branch
            << " meter=" << (c.has_meter ? 1 : 0) << '\n';
}

std::vector<std::string> path_to_root(const FeederTopology& t,
                                      const std::string& branch_id) {
    std::vector<std::string> path;
    for (std::size_t b = t.branch_index(branch_id); b != FeederTopology::npos;
         b = t.parent(b))
        path.push_back(t.branch(b).id);
    return path;
}

std::vector<std::size_t> select_outage_locations(const FeederTopology& t,
                                                 std::span<const int> states) {
    std::vector<std::size_t> out;
    for (std::size_t b : t.bfs_order()) {
        if (states[b] != 1)
            continue;
        std::size_t p = t.parent(b);
        if (p == FeederTopology::npos || states[p] == 0)
            out.push_back(b);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::string>
select_outage_locations(const FeederTopology& t,
                        const std::unordered_map<std::string, int>& states) {
    std::vector<int> dense(t.branch_count(), 0);
    for (std::size_t b = 0; b < t.branch_count(); ++b) {
        auto it = states.find(t.branch(b).id);
        if (it == states.end())
            throw ValidationError("no state for branch '" + t.branch(b).id +
                                  "'");
        dense[b] = it->second;
    }
    std::vector<std::string> ids;
    for (auto b : select_outage_locations(t, dense))
        ids.push_back(t.branch(b).id);
    std::sort(ids.begin(), ids.end());
    return ids;
}

} // namespace outage
