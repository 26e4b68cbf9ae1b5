#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "stoplab/stopping_rule.hpp"
#include "stoplab/trees.hpp"

namespace stoplab {

/// E*[G(tau, X_tau)] for the rule's stopping time, by forward induction of the
/// probability of reaching each node unstopped. Throws StructuralError naming
/// the first reachable node without a decision.
double rule_value(const BinomialModel& model, const Payoff& payoff, const StoppingRule& rule);

/// Probability that the rule stops at step k, for k = 0..n. Sums to 1.
std::vector<double> stop_probabilities(const BinomialModel& model, const StoppingRule& rule);

/// Hard enumeration limits: 2^21 Markov rules (n <= 6), 2^15 history rules (n <= 4).
inline constexpr int kMaxMarkovEnumerationSteps = 6;
inline constexpr int kMaxHistoryEnumerationSteps = 4;

/// Every stopping rule of a space, exactly once. Rule number r stops at interior
/// node b (in lexicographic node order) iff bit b of r is set.
class RuleEnumerator {
public:
    /// Throws SizeLimitError, carrying the count it would have produced, when n
    /// exceeds the limit of the space.
    RuleEnumerator(const BinomialModel& model, NodeSpace space);

    std::uint64_t count() const noexcept { return count_; }
    std::uint64_t position() const noexcept { return next_; }
    /// Next rule in enumeration order, or nullopt once exhausted.
    std::optional<StoppingRule> next();

    StoppingRule rule(std::uint64_t number) const;

private:
    NodeSpace space_;
    int n_;
    double horizon_;
    std::uint64_t count_;
    std::uint64_t next_ = 0;
};

inline RuleEnumerator enumerate_rules(const BinomialModel& model, NodeSpace space) {
    return RuleEnumerator(model, space);
}

struct BruteForceResult {
    double value = 0.0;
    std::uint64_t rule_count = 0;
    std::uint64_t best_rule = 0;  // first maximiser in enumeration order
};

/// Exhaustive max of rule_value over every rule of the space.
BruteForceResult brute_force(const BinomialModel& model, const Payoff& payoff,
                             NodeSpace space = NodeSpace::markov);

inline double brute_force_value(const BinomialModel& model, const Payoff& payoff,
                                NodeSpace space = NodeSpace::markov) {
    return brute_force(model, payoff, space).value;
}

/// Finite mixture of pure rules: draw a rule with probability `weight`, then follow it.
struct RandomizedRule {
    struct Component {
        double weight;
        StoppingRule rule;
    };
    std::vector<Component> components;

    /// Throws DomainError unless weights are >= 0 and sum to 1 within 1e-12.
    void validate() const;
};

double randomized_value(const BinomialModel& model, const Payoff& payoff,
                        const RandomizedRule& rule);

}  // namespace stoplab
