#include "stoplab/stopping_rule.hpp"

#include "stoplab/errors.hpp"

namespace stoplab {

namespace {

constexpr int kMaxHistorySteps = 30;

}  // namespace

std::size_t StoppingRule::node_count(NodeSpace space, int n) {
    const auto un = static_cast<std::size_t>(n);
    if (space == NodeSpace::markov) return (un + 1) * (un + 2) / 2;
    return (std::size_t{1} << (un + 1)) - 1;
}

std::size_t StoppingRule::interior_count(NodeSpace space, int n) {
    const auto un = static_cast<std::size_t>(n);
    if (space == NodeSpace::markov) return un * (un + 1) / 2;
    return (std::size_t{1} << un) - 1;
}

StoppingRule::StoppingRule(NodeSpace space, int n, double horizon)
    : space_(space), n_(n), horizon_(horizon) {
    if (n < 1) throw DomainError("stopping rule needs n >= 1");
    if (space == NodeSpace::path_dependent && n > kMaxHistorySteps)
        throw SizeLimitError("history-node rules are limited to n <= 30",
                             node_count(NodeSpace::path_dependent, kMaxHistorySteps));
    if (!(horizon > 0.0)) throw DomainError("stopping rule horizon must be positive");
    decisions_.assign(node_count(space, n), Decision::unset);
    for (std::size_t i = interior_count(space, n); i < decisions_.size(); ++i)
        decisions_[i] = Decision::stop;
}

std::size_t StoppingRule::index(NodeId node) const {
    if (node.k < 0 || node.k > n_) throw DomainError("node step outside the tree: " + describe(node));
    const auto k = static_cast<std::size_t>(node.k);
    if (space_ == NodeSpace::markov) {
        if (node.state > k) throw DomainError("node outside the tree: " + describe(node));
        return k * (k + 1) / 2 + static_cast<std::size_t>(node.state);
    }
    if (node.state >= (std::uint64_t{1} << k))
        throw DomainError("node outside the tree: " + describe(node));
    return (std::size_t{1} << k) - 1 + static_cast<std::size_t>(node.state);
}

NodeId StoppingRule::node_at(std::size_t index) const {
    if (space_ == NodeSpace::markov) {
        std::size_t k = 0;
        while ((k + 1) * (k + 2) / 2 <= index) ++k;
        return {static_cast<int>(k), index - k * (k + 1) / 2};
    }
    std::size_t k = 0;
    while ((std::size_t{1} << (k + 1)) - 1 <= index) ++k;
    return {static_cast<int>(k), index - ((std::size_t{1} << k) - 1)};
}

std::string StoppingRule::describe(NodeId node) const {
    if (space_ == NodeSpace::markov)
        return "(k=" + std::to_string(node.k) + ", j=" + std::to_string(node.state) + ")";
    std::string history;
    for (int i = node.k - 1; i >= 0; --i) history += ((node.state >> i) & 1U) ? '+' : '-';
    return "(k=" + std::to_string(node.k) + ", history=" + (history.empty() ? "root" : history) +
           ")";
}

void StoppingRule::set(NodeId node, bool stop) { set_at(index(node), stop); }

void StoppingRule::set_at(std::size_t index, bool stop) {
    if (index >= decisions_.size()) throw DomainError("node index outside the tree");
    if (!stop && index >= interior_count())
        throw DomainError("terminal node " + describe(node_at(index)) + " must stop");
    decisions_[index] = stop ? Decision::stop : Decision::go_on;
}

NodeId StoppingRule::child(NodeId node, bool up) const {
    if (space_ == NodeSpace::markov) return {node.k + 1, node.state + (up ? 1U : 0U)};
    return {node.k + 1, (node.state << 1) | (up ? 1U : 0U)};
}

int StoppingRule::stop_step(std::span<const int> signs) const {
    if (signs.size() != static_cast<std::size_t>(n_))
        throw DomainError("expected " + std::to_string(n_) + " signs, got " +
                          std::to_string(signs.size()));
    NodeId node{0, 0};
    while (true) {
        const Decision d = decision(node);
        if (d == Decision::stop) return node.k;
        if (d == Decision::unset)
            throw StructuralError("stopping rule has no decision at reachable node " +
                                  describe(node));
        const int s = signs[static_cast<std::size_t>(node.k)];
        if (s != 1 && s != -1) throw DomainError("signs must be +1 or -1");
        node = child(node, s == 1);
    }
}

double stopping_time_on_path(const StoppingRule& rule, std::span<const int> signs) {
    const int k = rule.stop_step(signs);
    return k == rule.n() ? rule.horizon() : rule.horizon() * k / rule.n();
}

}  // namespace stoplab
