#include "stoplab/processes.hpp"

#include <cmath>
#include <random>

#include "stoplab/errors.hpp"

namespace stoplab {

namespace {

// Discrete-monitoring correction for barrier crossings of a sampled Brownian
// path: -zeta(1/2) / sqrt(2 pi).
constexpr double kContinuityCorrection = 0.5825971579390106;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace

void BlackScholesParams::validate() const {
    if (!(std::isfinite(S0) && std::isfinite(r) && std::isfinite(sigma) && std::isfinite(mu) &&
          std::isfinite(T)))
        throw ParameterError("Black-Scholes parameters must be finite");
    if (!(S0 > 0.0)) throw ParameterError("S0 must be positive");
    if (!(sigma > 0.0)) throw ParameterError("sigma must be positive");
    if (!(T > 0.0)) throw ParameterError("T must be positive");
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

CadlagPath sample_brownian(double T, std::size_t points, std::uint64_t seed) {
    if (points < 2) throw DomainError("sample_brownian: need at least two points");
    if (!(T > 0.0)) throw DomainError("sample_brownian: T must be positive");
    TimeGrid grid = TimeGrid::uniform(T, points - 1);
    std::mt19937_64 engine(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> values(points);
    values[0] = 0.0;
    for (std::size_t k = 1; k < points; ++k)
        values[k] = values[k - 1] + std::sqrt(grid[k] - grid[k - 1]) * normal(engine);
    return CadlagPath(std::move(grid), std::move(values));
}

CadlagPath sample_black_scholes(const BlackScholesParams& params, const CadlagPath& driver,
                                Measure measure) {
    params.validate();
    const double drift = (measure == Measure::physical ? params.mu : params.r) -
                         0.5 * params.sigma * params.sigma;
    const auto t = driver.grid().points();
    const auto b = driver.values();
    std::vector<double> values(b.size());
    for (std::size_t k = 0; k < b.size(); ++k)
        values[k] = params.S0 * std::exp(drift * t[k] + params.sigma * b[k]);
    return CadlagPath(driver.grid(), std::move(values));
}

CouplingResult knight_embedding(const CadlagPath& driver, int n, double horizon) {
    if (n < 1) throw DomainError("knight_embedding: n must be >= 1");
    if (!(horizon > 0.0 && horizon <= driver.horizon()))
        throw DomainError("knight_embedding: walk horizon must lie in (0, driver horizon]");
    const double h = std::sqrt(horizon / n);
    const auto t = driver.grid().points();
    const auto b = driver.values();

    std::vector<int> signs;
    std::vector<double> hitting;
    signs.reserve(static_cast<std::size_t>(n));
    hitting.reserve(static_cast<std::size_t>(n));
    double level = b[0];
    std::size_t k = 0;
    while (static_cast<int>(signs.size()) < n) {
        if (++k >= t.size())
            throw DomainError("knight_embedding: only " + std::to_string(signs.size()) + " of " +
                              std::to_string(n) +
                              " band exits inside the driver; refine driver grid or extend its "
                              "horizon");
        const double threshold = h - kContinuityCorrection * std::sqrt(t[k] - t[k - 1]);
        if (!(threshold > 0.0))
            throw DomainError("knight_embedding: band sqrt(T/n) = " + format_number(h) +
                              " is below the driver's sampling scale; refine driver grid");
        const double move = b[k] - level;
        if (std::abs(move) >= threshold) {
            const int sign = move > 0.0 ? 1 : -1;
            signs.push_back(sign);
            hitting.push_back(t[k]);
            level += sign * h;
        }
    }
    CouplingResult result{restrict_to(driver, horizon), walk_from_signs(signs, horizon),
                          std::move(signs), std::move(hitting), n};
    return result;
}

CouplingResult knight_embedding(const CadlagPath& driver, int n) {
    return knight_embedding(driver, n, driver.horizon());
}

CadlagPath walk_from_signs(std::span<const int> signs, double T) {
    const std::size_t n = signs.size();
    if (n == 0) throw DomainError("walk_from_signs: need at least one sign");
    const double h = std::sqrt(T / static_cast<double>(n));
    std::vector<double> values(n + 1);
    int sum = 0;
    values[0] = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sum += signs[i];
        values[i + 1] = h * sum;
    }
    return CadlagPath(TimeGrid::uniform(T, n), std::move(values));
}

double lattice_price(double S0, double u, double d, int k, int j) {
    // Recombining case d = 1/u: use the net number of up-moves so that balanced
    // paths return to S0 exactly.
    if (d == 1.0 / u) {
        const int net = 2 * j - k;
        return net >= 0 ? S0 * std::pow(u, net) : S0 * std::pow(d, -net);
    }
    return S0 * std::pow(u, j) * std::pow(d, k - j);
}

CadlagPath crr_path_from_signs(std::span<const int> signs, const BlackScholesParams& params,
                               int n) {
    params.validate();
    if (n < 1 || signs.size() != static_cast<std::size_t>(n))
        throw DomainError("crr_path_from_signs: expected " + std::to_string(n) + " signs");
    const double u = std::exp(params.sigma * std::sqrt(params.T / n));
    const double d = 1.0 / u;
    std::vector<double> values(static_cast<std::size_t>(n) + 1);
    int ups = 0;
    values[0] = lattice_price(params.S0, u, d, 0, 0);
    for (int i = 0; i < n; ++i) {
        const int s = signs[static_cast<std::size_t>(i)];
        if (s != 1 && s != -1) throw DomainError("crr_path_from_signs: signs must be +1 or -1");
        ups += s == 1 ? 1 : 0;
        values[static_cast<std::size_t>(i) + 1] = lattice_price(params.S0, u, d, i + 1, ups);
    }
    return CadlagPath(TimeGrid::uniform(params.T, static_cast<std::size_t>(n)), std::move(values));
}

}  // namespace stoplab
