#include "stoplab/stopping.hpp"

#include <bit>
#include <cmath>

#include "stoplab/errors.hpp"

namespace stoplab {

namespace {

// Node table shared by rule_value and the brute-force evaluator: discounted
// gains and child indices in flat (lexicographic) order.
struct TreeTable {
    std::vector<double> gain;
    std::vector<std::size_t> down, up;  // child indices, interior nodes only
    std::vector<int> step;
    std::size_t interior = 0;
};

TreeTable make_table(const BinomialModel& model, const Payoff& payoff, const StoppingRule& shape) {
    TreeTable table;
    const std::size_t count = shape.node_count();
    table.interior = shape.interior_count();
    table.gain.resize(count);
    table.step.resize(count);
    table.down.resize(table.interior);
    table.up.resize(table.interior);
    for (std::size_t i = 0; i < count; ++i) {
        const NodeId node = shape.node_at(i);
        const int ups = shape.space() == NodeSpace::markov ? static_cast<int>(node.state)
                                                           : std::popcount(node.state);
        table.gain[i] = payoff.discounted_gain(model, node.k, ups);
        table.step[i] = node.k;
        if (i < table.interior) {
            table.down[i] = shape.index(shape.child(node, false));
            table.up[i] = shape.index(shape.child(node, true));
        }
    }
    return table;
}

void check_compatible(const BinomialModel& model, const StoppingRule& rule) {
    if (rule.n() != model.n())
        throw DomainError("rule has " + std::to_string(rule.n()) + " steps, model has " +
                          std::to_string(model.n()));
}

std::uint64_t enumeration_limit(NodeSpace space) {
    const int n = space == NodeSpace::markov ? kMaxMarkovEnumerationSteps
                                             : kMaxHistoryEnumerationSteps;
    return std::uint64_t{1} << StoppingRule::interior_count(space, n);
}

}  // namespace

double rule_value(const BinomialModel& model, const Payoff& payoff, const StoppingRule& rule) {
    check_compatible(model, rule);
    const TreeTable table = make_table(model, payoff, rule);
    const double p = model.p_star();
    std::vector<double> mass(table.gain.size(), 0.0);
    std::vector<std::uint8_t> reached(table.gain.size(), 0);
    mass[0] = 1.0;
    reached[0] = 1;
    double value = 0.0;
    for (std::size_t i = 0; i < table.gain.size(); ++i) {
        if (!reached[i]) continue;
        const Decision d = rule.decision_at(i);
        if (d == Decision::unset)
            throw StructuralError("stopping rule has no decision at reachable node " +
                                  rule.describe(rule.node_at(i)));
        if (d == Decision::stop) {
            value += mass[i] * table.gain[i];
        } else {
            mass[table.up[i]] += p * mass[i];
            mass[table.down[i]] += (1.0 - p) * mass[i];
            reached[table.up[i]] = reached[table.down[i]] = 1;
        }
    }
    return value;
}

std::vector<double> stop_probabilities(const BinomialModel& model, const StoppingRule& rule) {
    check_compatible(model, rule);
    const double p = model.p_star();
    std::vector<double> mass(rule.node_count(), 0.0);
    std::vector<double> by_step(static_cast<std::size_t>(model.n()) + 1, 0.0);
    mass[0] = 1.0;
    for (std::size_t i = 0; i < mass.size(); ++i) {
        if (mass[i] == 0.0) continue;
        const NodeId node = rule.node_at(i);
        const Decision d = rule.decision_at(i);
        if (d == Decision::unset)
            throw StructuralError("stopping rule has no decision at reachable node " +
                                  rule.describe(node));
        if (d == Decision::stop) {
            by_step[static_cast<std::size_t>(node.k)] += mass[i];
        } else {
            mass[rule.index(rule.child(node, true))] += p * mass[i];
            mass[rule.index(rule.child(node, false))] += (1.0 - p) * mass[i];
        }
    }
    return by_step;
}

RuleEnumerator::RuleEnumerator(const BinomialModel& model, NodeSpace space)
    : space_(space), n_(model.n()), horizon_(model.T()), count_(0) {
    const int limit = space == NodeSpace::markov ? kMaxMarkovEnumerationSteps
                                                 : kMaxHistoryEnumerationSteps;
    const std::size_t interior = StoppingRule::interior_count(space, std::min(n_, 62));
    if (n_ > limit) {
        const unsigned long long would =
            interior >= 64 ? ~0ULL : (1ULL << interior);
        throw SizeLimitError(std::string("refusing to enumerate ") +
                                 (space == NodeSpace::markov ? "Markov" : "history") +
                                 " rules for n = " + std::to_string(n_) + ": would generate " +
                                 (interior >= 64 ? "2^" + std::to_string(interior)
                                                 : std::to_string(would)) +
                                 " rules (limit " + std::to_string(enumeration_limit(space)) + ")",
                             would);
    }
    count_ = std::uint64_t{1} << interior;
}

StoppingRule RuleEnumerator::rule(std::uint64_t number) const {
    StoppingRule r(space_, n_, horizon_);
    for (std::size_t b = 0; b < r.interior_count(); ++b) r.set_at(b, ((number >> b) & 1U) != 0);
    return r;
}

std::optional<StoppingRule> RuleEnumerator::next() {
    if (next_ >= count_) return std::nullopt;
    return rule(next_++);
}

BruteForceResult brute_force(const BinomialModel& model, const Payoff& payoff, NodeSpace space) {
    RuleEnumerator rules(model, space);
    const StoppingRule shape(space, model.n(), model.T());
    const TreeTable table = make_table(model, payoff, shape);
    const double p = model.p_star();
    const std::size_t count = table.gain.size();
    std::vector<double> mass(count);

    BruteForceResult best{-INFINITY, rules.count(), 0};
    for (std::uint64_t r = 0; r < rules.count(); ++r) {
        // Same node order and arithmetic as rule_value, so the results agree bit for bit.
        std::fill(mass.begin(), mass.end(), 0.0);
        mass[0] = 1.0;
        double value = 0.0;
        for (std::size_t i = 0; i < count; ++i) {
            if (mass[i] == 0.0) continue;
            if (i >= table.interior || ((r >> i) & 1U)) {
                value += mass[i] * table.gain[i];
            } else {
                mass[table.up[i]] += p * mass[i];
                mass[table.down[i]] += (1.0 - p) * mass[i];
            }
        }
        if (value > best.value) {
            best.value = value;
            best.best_rule = r;
        }
    }
    return best;
}

void RandomizedRule::validate() const {
    if (components.empty()) throw DomainError("randomized rule has no components");
    double total = 0.0;
    for (const auto& c : components) {
        if (!(c.weight >= 0.0)) throw DomainError("randomized rule weights must be >= 0");
        total += c.weight;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw DomainError("randomized rule weights sum to " + format_number(total) + ", not 1");
}

double randomized_value(const BinomialModel& model, const Payoff& payoff,
                        const RandomizedRule& rule) {
    rule.validate();
    double value = 0.0;
    for (const auto& c : rule.components) value += c.weight * rule_value(model, payoff, c.rule);
    return value;
}

}  // namespace stoplab
