#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace stoplab {

/// Markov rules decide on recombining nodes (k, j); path-dependent rules decide on
/// the full history of up/down moves.
enum class NodeSpace { markov, path_dependent };

enum class Decision : std::uint8_t { unset, stop, go_on };

/// Node identifier. For Markov nodes `state` is the number of up-moves j; for
/// history nodes it encodes the moves as a k-bit number with the first move in
/// the most significant bit (1 = up).
struct NodeId {
    int k = 0;
    std::uint64_t state = 0;
};

/// Stop/continue decision per node of an n-step binary tree. Terminal nodes
/// always stop, so every rule is a stopping time bounded by the horizon.
class StoppingRule {
public:
    StoppingRule(NodeSpace space, int n, double horizon);

    NodeSpace space() const noexcept { return space_; }
    int n() const noexcept { return n_; }
    double horizon() const noexcept { return horizon_; }

    std::size_t node_count() const noexcept { return decisions_.size(); }
    std::size_t interior_count() const noexcept { return interior_count(space_, n_); }

    static std::size_t node_count(NodeSpace space, int n);
    static std::size_t interior_count(NodeSpace space, int n);

    /// Flat index in lexicographic (k, state) order; interior nodes come first.
    std::size_t index(NodeId node) const;
    NodeId node_at(std::size_t index) const;
    std::string describe(NodeId node) const;

    Decision decision(NodeId node) const { return decisions_[index(node)]; }
    Decision decision_at(std::size_t index) const { return decisions_[index]; }
    /// Throws DomainError when asked to continue at a terminal node.
    void set(NodeId node, bool stop);
    void set_at(std::size_t index, bool stop);

    /// Child reached from `node` by one move.
    NodeId child(NodeId node, bool up) const;

    /// Step index at which the rule stops along the move sequence `signs` (+-1).
    /// Only signs[0..k) are read, where k is the returned step.
    int stop_step(std::span<const int> signs) const;

private:
    NodeSpace space_;
    int n_;
    double horizon_;
    std::vector<Decision> decisions_;
};

/// Time kT/n at which `rule` stops on the move sequence `signs` (length n).
double stopping_time_on_path(const StoppingRule& rule, std::span<const int> signs);

}  // namespace stoplab
