#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "stoplab/errors.hpp"
#include "stoplab/experiments.hpp"
#include "stoplab/stopping.hpp"

using namespace stoplab;

namespace {

StoppingRule constant_rule(NodeSpace space, int n, bool stop) {
    StoppingRule r(space, n, 1.0);
    for (std::size_t i = 0; i < r.interior_count(); ++i) r.set_at(i, stop);
    return r;
}

Payoff one() { return Payoff::constant(1.0); }

}  // namespace

TEST_CASE("node layout") {
    const StoppingRule m(NodeSpace::markov, 3, 1.0);
    CHECK(m.node_count() == 10);
    CHECK(m.interior_count() == 6);
    CHECK(m.index({2, 1}) == 4);
    CHECK(m.node_at(4).k == 2);
    CHECK(m.describe({1, 0}) == "(k=1, j=0)");

    const StoppingRule h(NodeSpace::path_dependent, 3, 1.0);
    CHECK(h.node_count() == 15);
    CHECK(h.interior_count() == 7);
    CHECK(h.describe({2, 2}) == "(k=2, history=+-)");
    for (std::size_t i = 0; i < h.node_count(); ++i) CHECK(h.index(h.node_at(i)) == i);
    CHECK(h.child({1, 1}, false).state == 2);
    CHECK(h.child({1, 1}, true).state == 3);

    // Terminal nodes always stop and cannot be told to continue.
    CHECK(m.decision({3, 0}) == Decision::stop);
    StoppingRule copy = m;
    CHECK_THROWS_AS(copy.set({3, 1}, false), DomainError);
}

TEST_CASE("rule value examples") {
    const BinomialModel model = build_crr_model(BlackScholesParams{}, 3);
    const Payoff put = Payoff::american_put(110.0);
    CHECK(rule_value(model, put, constant_rule(NodeSpace::markov, 3, true)) == put.discounted_gain(model, 0, 0));
    CHECK(rule_value(model, one(), constant_rule(NodeSpace::markov, 3, false)) ==
          doctest::Approx(1.0).epsilon(1e-15));

    StoppingRule partial(NodeSpace::markov, 3, 1.0);
    partial.set({0, 0}, false);
    partial.set({1, 0}, true);
    CHECK_THROWS_WITH_AS(rule_value(model, put, partial), doctest::Contains("(k=1, j=1)"), StructuralError);

    // Unreachable nodes need no decision.
    partial.set({1, 1}, true);
    CHECK_NOTHROW(rule_value(model, put, partial));

    CHECK_THROWS_AS(rule_value(build_crr_model(BlackScholesParams{}, 4), put, partial), DomainError);
}

TEST_CASE("stop probabilities sum to one") {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 50; ++trial) {
        const RandomCase rc = random_case(rng, {1, 2, 3, 4});
        const RuleEnumerator rules(rc.model, NodeSpace::path_dependent);
        std::uniform_int_distribution<std::uint64_t> pick(0, rules.count() - 1);
        const auto probs = stop_probabilities(rc.model, rules.rule(pick(rng)));
        double total = 0.0;
        for (double p : probs) total += p;
        CHECK(std::abs(total - 1.0) <= 1e-12);
    }
}

TEST_CASE("enumeration counts") {
    const BlackScholesParams p;
    CHECK(RuleEnumerator(build_crr_model(p, 1), NodeSpace::markov).count() == 2);
    CHECK(RuleEnumerator(build_crr_model(p, 2), NodeSpace::markov).count() == 8);
    CHECK(RuleEnumerator(build_crr_model(p, 6), NodeSpace::markov).count() == (1U << 21));

    RuleEnumerator history = enumerate_rules(build_crr_model(p, 4), NodeSpace::path_dependent);
    std::uint64_t counted = 0;
    while (history.next()) ++counted;
    CHECK(counted == 32768);
    CHECK(!history.next().has_value());

    // Every rule exactly once.
    RuleEnumerator small(build_crr_model(p, 3), NodeSpace::markov);
    std::set<std::vector<Decision>> seen;
    while (auto r = small.next()) {
        std::vector<Decision> d;
        for (std::size_t i = 0; i < r->node_count(); ++i) d.push_back(r->decision_at(i));
        CHECK(seen.insert(d).second);
    }
    CHECK(seen.size() == 64);
}

TEST_CASE("enumeration size limits") {
    const BlackScholesParams p;
    try {
        RuleEnumerator(build_crr_model(p, 7), NodeSpace::markov);
        FAIL("expected a size error");
    } catch (const SizeLimitError& e) {
        CHECK(e.would_generate() == (1ULL << 28));
        CHECK(std::string(e.what()).find("268435456") != std::string::npos);
    }
    try {
        RuleEnumerator(build_crr_model(p, 5), NodeSpace::path_dependent);
        FAIL("expected a size error");
    } catch (const SizeLimitError& e) {
        CHECK(e.would_generate() == (1ULL << 31));
    }
    CHECK_THROWS_AS(brute_force_value(build_crr_model(p, 7), one()), SizeLimitError);
}

TEST_CASE("brute force examples") {
    const BinomialModel model = build_crr_model(BlackScholesParams{}, 4);
    CHECK(std::abs(brute_force_value(model, Payoff::constant(3.5)) - 3.5) <= 1e-12);

    const BinomialModel hand(2, 1.0, 1.1, 1.0 / 1.1, 1.0, 100.0);
    const Payoff put = Payoff::american_put(100.0, Discounting::none);
    const BruteForceResult r = brute_force(hand, put);
    CHECK(r.rule_count == 8);
    CHECK(std::abs(r.value - snell_envelope(hand, put).root_value()) <= 1e-12);
    CHECK(rule_value(hand, put, RuleEnumerator(hand, NodeSpace::markov).rule(r.best_rule)) == r.value);
}

TEST_CASE("brute force agrees with rule_value bit for bit") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 10; ++trial) {
        const RandomCase rc = random_case(rng, {3});
        const RuleEnumerator rules(rc.model, NodeSpace::markov);
        double best = -INFINITY;
        for (std::uint64_t r = 0; r < rules.count(); ++r)
            best = std::max(best, rule_value(rc.model, rc.payoff, rules.rule(r)));
        CHECK(best == brute_force_value(rc.model, rc.payoff));
    }
}

TEST_CASE("history rules gain nothing on Markov payoffs") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const RandomCase rc = random_case(rng, {4});
        const double markov = brute_force_value(rc.model, rc.payoff, NodeSpace::markov);
        const double history = brute_force_value(rc.model, rc.payoff, NodeSpace::path_dependent);
        CHECK(std::abs(markov - history) <= 1e-12);
    }
}

TEST_CASE("randomized rule examples") {
    const BinomialModel model = build_crr_model(BlackScholesParams{}, 3);
    const Payoff put = Payoff::american_put(105.0);
    const StoppingRule root = constant_rule(NodeSpace::markov, 3, true);
    const StoppingRule end = constant_rule(NodeSpace::markov, 3, false);

    RandomizedRule single{{{1.0, end}}};
    CHECK(randomized_value(model, put, single) == rule_value(model, put, end));

    RandomizedRule half{{{0.5, root}, {0.5, end}}};
    CHECK(randomized_value(model, one(), half) == doctest::Approx(1.0).epsilon(1e-15));

    RandomizedRule bad{{{0.5, root}, {0.6, end}}};
    CHECK_THROWS_AS(randomized_value(model, put, bad), DomainError);
    RandomizedRule negative{{{1.5, root}, {-0.5, end}}};
    CHECK_THROWS_AS(negative.validate(), DomainError);
    CHECK_THROWS_AS(RandomizedRule{}.validate(), DomainError);
}

TEST_CASE("mixtures never beat the best pure rule") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const RandomCase rc = random_case(rng, {1, 2, 3, 4});
        const RuleEnumerator rules(rc.model, NodeSpace::path_dependent);
        std::uniform_int_distribution<std::uint64_t> pick(0, rules.count() - 1);
        RandomizedRule mix;
        double total = 0.0;
        std::vector<double> w(3);
        for (double& x : w) total += (x = unit(rng));
        for (double x : w) mix.components.push_back({x / total, rules.rule(pick(rng))});
        const double brute = brute_force_value(rc.model, rc.payoff);
        CHECK(randomized_value(rc.model, rc.payoff, mix) <= brute + 1e-12);

        // Linear in the weights.
        double linear = 0.0;
        for (const auto& c : mix.components) linear += c.weight * rule_value(rc.model, rc.payoff, c.rule);
        CHECK(randomized_value(rc.model, rc.payoff, mix) == doctest::Approx(linear).epsilon(1e-14));

        RandomizedRule degenerate{{{1.0, optimal_rule(snell_envelope(rc.model, rc.payoff))}}};
        CHECK(std::abs(randomized_value(rc.model, rc.payoff, degenerate) - brute) <= 1e-12);
    }
}

TEST_CASE("rule value is monotone in the payoff") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const RandomCase rc = random_case(rng, {1, 2, 3, 4});
        Payoff higher = rc.payoff;
        auto g = rc.payoff.gain;
        higher.gain = [g](double t, double x) { return g(t, x) + std::abs(std::sin(x)); };
        higher.bound += 1.0;
        const RuleEnumerator rules(rc.model, NodeSpace::markov);
        std::uniform_int_distribution<std::uint64_t> pick(0, rules.count() - 1);
        const StoppingRule r = rules.rule(pick(rng));
        CHECK(rule_value(rc.model, higher, r) >= rule_value(rc.model, rc.payoff, r));
    }
}
