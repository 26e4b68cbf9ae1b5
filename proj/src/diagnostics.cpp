#include "stoplab/diagnostics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>

#include "stoplab/errors.hpp"
#include "stoplab/parallel.hpp"
#include "stoplab/processes.hpp"

namespace stoplab {

EmpiricalDistribution::EmpiricalDistribution(std::vector<double> samples)
    : samples_(std::move(samples)) {
    if (samples_.empty()) throw DomainError("empirical distribution needs at least one sample");
    for (double s : samples_)
        if (!std::isfinite(s)) throw DomainError("empirical distribution sample is not finite");
}

bool EmpiricalDistribution::within(double horizon) const noexcept {
    return std::all_of(samples_.begin(), samples_.end(),
                       [horizon](double s) { return s >= 0.0 && s <= horizon; });
}

namespace {

std::vector<double> quantile_grid(const EmpiricalDistribution& dist) {
    std::vector<double> sorted(dist.samples().begin(), dist.samples().end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    std::vector<double> q(kQuantileGridSize);
    for (int i = 0; i < kQuantileGridSize; ++i) {
        const double level = (i + 0.5) / kQuantileGridSize;
        const auto idx = static_cast<std::size_t>(level * static_cast<double>(n));
        q[static_cast<std::size_t>(i)] = sorted[std::min(idx, n - 1)];
    }
    return q;
}

}  // namespace

double wasserstein1(const EmpiricalDistribution& a, const EmpiricalDistribution& b) {
    const auto qa = quantile_grid(a);
    const auto qb = quantile_grid(b);
    std::vector<double> diff(qa.size());
    for (std::size_t i = 0; i < qa.size(); ++i) diff[i] = std::abs(qa[i] - qb[i]);
    return mean(diff);
}

double convergence_in_probability_estimate(std::span<const std::pair<double, double>> pairs,
                                           double epsilon) {
    if (pairs.empty()) throw DomainError("convergence estimate needs at least one pair");
    if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
    std::size_t far = 0;
    for (const auto& [a, b] : pairs)
        if (std::abs(a - b) > epsilon) ++far;
    return static_cast<double>(far) / static_cast<double>(pairs.size());
}

namespace {

// A probe stopping time: returns the stopping step given the up-move count
// after each step (ups[k] for k = 0..n).
struct Probe {
    enum class Kind { rule, below, above, fixed } kind;
    const StoppingRule* rule = nullptr;
    double level = 0.0;
    int step = 0;

    int stop_step(const BinomialModel& model, std::span<const int> ups) const {
        const int n = model.n();
        switch (kind) {
            case Kind::rule: {
                for (int k = 0; k < n; ++k)
                    if (rule->decision({k, static_cast<std::uint64_t>(ups[static_cast<std::size_t>(k)])}) ==
                        Decision::stop)
                        return k;
                return n;
            }
            case Kind::below:
                for (int k = 0; k < n; ++k)
                    if (model.price(k, ups[static_cast<std::size_t>(k)]) <= level) return k;
                return n;
            case Kind::above:
                for (int k = 0; k < n; ++k)
                    if (model.price(k, ups[static_cast<std::size_t>(k)]) >= level) return k;
                return n;
            case Kind::fixed:
                return step;
        }
        return n;
    }
};

}  // namespace

double aldous_criterion_estimate(const BinomialModel& model, std::span<const Payoff> payoffs,
                                 double delta, double epsilon, int n_paths, std::uint64_t seed) {
    if (payoffs.empty()) throw ConfigError("aldous_criterion_estimate: empty payoff family");
    if (!(delta >= 0.0)) throw DomainError("delta must be non-negative");
    if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
    if (n_paths < 1) throw DomainError("n_paths must be >= 1");
    const int n = model.n();

    std::vector<StoppingRule> rules;
    rules.reserve(payoffs.size());
    for (const auto& payoff : payoffs) rules.push_back(optimal_rule(snell_envelope(model, payoff)));

    std::vector<Probe> probes;
    for (const auto& rule : rules) probes.push_back({Probe::Kind::rule, &rule});
    for (int m : {1, 2, 4, 8, 16}) {
        probes.push_back({Probe::Kind::below, nullptr, model.S0() * std::pow(model.d(), m)});
        probes.push_back({Probe::Kind::above, nullptr, model.S0() * std::pow(model.u(), m)});
    }
    for (int s : {0, n / 4, n / 2, 3 * n / 4}) probes.push_back({Probe::Kind::fixed, nullptr, 0.0, s});

    const auto max_lag = static_cast<int>(std::floor(delta * n / model.T() + 1e-9));
    const auto lags = static_cast<std::size_t>(max_lag) + 1;

    // Per path: for each (probe, lag) a 0/1 exceedance flag.
    auto hits = parallel_map(static_cast<std::size_t>(n_paths), [&](std::size_t path) {
        std::mt19937_64 engine(derive_seed(seed, path));
        std::bernoulli_distribution up(model.p_star());
        std::vector<int> ups(static_cast<std::size_t>(n) + 1, 0);
        for (int k = 0; k < n; ++k)
            ups[static_cast<std::size_t>(k) + 1] = ups[static_cast<std::size_t>(k)] + (up(engine) ? 1 : 0);
        std::vector<std::uint8_t> flags(probes.size() * lags, 0);
        for (std::size_t p = 0; p < probes.size(); ++p) {
            const int sigma = probes[p].stop_step(model, ups);
            const double x_sigma = model.price(sigma, ups[static_cast<std::size_t>(sigma)]);
            for (std::size_t l = 0; l < lags; ++l) {
                const int nu = std::min(n, sigma + static_cast<int>(l));
                const double x_nu = model.price(nu, ups[static_cast<std::size_t>(nu)]);
                flags[p * lags + l] = std::abs(x_sigma - x_nu) >= epsilon ? 1 : 0;
            }
        }
        return flags;
    });

    std::vector<long long> counts(probes.size() * lags, 0);
    for (const auto& flags : hits)
        for (std::size_t i = 0; i < flags.size(); ++i) counts[i] += flags[i];
    const long long best = *std::max_element(counts.begin(), counts.end());
    return static_cast<double>(best) / n_paths;
}

TerminalEvent TerminalEvent::positive_terminal() {
    return {[](double x) { return x > 0.0 ? 1.0 : 0.0; },
            [](double t, double b, double T) {
                return 0.5 * std::erfc(-b / std::sqrt(2.0 * (T - t)));
            }};
}

TerminalEvent TerminalEvent::everything() {
    return {[](double) { return 1.0; }, [](double, double, double) { return 1.0; }};
}

TerminalEvent TerminalEvent::nothing() {
    return {[](double) { return 0.0; }, [](double, double, double) { return 0.0; }};
}

CadlagPath CouplingSampler::driver(std::uint64_t seed) const {
    const auto intervals = static_cast<std::size_t>(
        std::llround(static_cast<double>(driver_points - 1) * extension));
    return sample_brownian(T * extension, intervals + 1, seed);
}

namespace {

// Conditional probabilities P[A_n | k steps, j ups] on the symmetric walk tree.
std::vector<double> martingale_table(int n, double T, const TerminalEvent& event) {
    const double h = std::sqrt(T / n);
    std::vector<double> table(BinomialModel::node_index(n + 1, 0));
    for (int j = 0; j <= n; ++j) {
        const double v = event.indicator(h * (2 * j - n));
        if (v != 0.0 && v != 1.0)
            throw DomainError("terminal event is not 0/1-valued (value " + format_number(v) +
                              " at walk level " + format_number(h * (2 * j - n)) + ")");
        table[BinomialModel::node_index(n, j)] = v;
    }
    for (int k = n - 1; k >= 0; --k)
        for (int j = 0; j <= k; ++j)
            table[BinomialModel::node_index(k, j)] =
                0.5 * (table[BinomialModel::node_index(k + 1, j)] +
                       table[BinomialModel::node_index(k + 1, j + 1)]);
    return table;
}

CadlagPath martingale_along(std::span<const int> signs, double T, std::span<const double> table) {
    const int n = static_cast<int>(signs.size());
    std::vector<double> values(static_cast<std::size_t>(n) + 1);
    int ups = 0;
    values[0] = table[0];
    for (int k = 0; k < n; ++k) {
        ups += signs[static_cast<std::size_t>(k)] == 1 ? 1 : 0;
        values[static_cast<std::size_t>(k) + 1] = table[BinomialModel::node_index(k + 1, ups)];
    }
    return CadlagPath(TimeGrid::uniform(T, static_cast<std::size_t>(n)), std::move(values));
}

}  // namespace

CadlagPath tree_martingale(std::span<const int> signs, double T, const TerminalEvent& event) {
    if (signs.empty()) throw DomainError("tree_martingale: need at least one sign");
    const auto table = martingale_table(static_cast<int>(signs.size()), T, event);
    return martingale_along(signs, T, table);
}

CadlagPath limit_martingale(const CadlagPath& brownian, const TerminalEvent& event) {
    const auto t = brownian.grid().points();
    const auto b = brownian.values();
    const double T = brownian.horizon();
    std::vector<double> values(b.size());
    for (std::size_t k = 0; k + 1 < b.size(); ++k) values[k] = event.limit(t[k], b[k], T);
    values.back() = event.indicator(b.back());
    return CadlagPath(brownian.grid(), std::move(values));
}

double filtration_convergence_probe(const CouplingSampler& sampler, int n,
                                    const TerminalEvent& event, int n_paths, std::uint64_t seed,
                                    int resolution) {
    if (n < 1 || !std::has_single_bit(static_cast<unsigned>(n)))
        throw DomainError("filtration probe: n must be a power of two");
    if (n_paths < 1) throw DomainError("filtration probe: n_paths must be >= 1");
    const auto table = martingale_table(n, sampler.T, event);
    const auto distances = parallel_map(static_cast<std::size_t>(n_paths), [&](std::size_t i) {
        const CadlagPath driver = sampler.driver(derive_seed(seed, i));
        const CouplingResult coupling = knight_embedding(driver, n, sampler.T);
        const CadlagPath coarse = martingale_along(coupling.signs, sampler.T, table);
        const CadlagPath fine = limit_martingale(coupling.brownian, event);
        return skorokhod_j1_distance(coarse, fine, resolution);
    });
    return mean(distances);
}

}  // namespace stoplab
