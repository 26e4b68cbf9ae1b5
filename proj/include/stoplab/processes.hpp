#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "stoplab/paths.hpp"

namespace stoplab {

struct BlackScholesParams {
    double S0 = 100.0;
    double r = 0.05;
    double sigma = 0.2;
    double mu = 0.02;  // drift under the physical measure
    double T = 1.0;

    /// Throws ParameterError unless S0 > 0, sigma > 0, T > 0 and all fields are finite.
    void validate() const;
};

enum class Measure { physical, risk_neutral };

/// Counter-based seed derivation: stream `index` of a run seeded with `seed`.
/// Used so that Monte Carlo results depend only on (seed, path index).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// Brownian motion on the uniform grid of `points` points over [0, T].
CadlagPath sample_brownian(double T, std::size_t points, std::uint64_t seed);

/// Exact strong solution S0 exp((a - sigma^2/2) t + sigma B(t)) on the driver's grid,
/// with a = mu (physical) or a = r (risk neutral).
CadlagPath sample_black_scholes(const BlackScholesParams& params, const CadlagPath& driver,
                                Measure measure);

struct CouplingResult {
    CadlagPath brownian;               // driver restricted to [0, T]
    CadlagPath walk;                   // B^n on {iT/n}
    std::vector<int> signs;            // +-1, one per step
    std::vector<double> hitting_times; // band exit times, may exceed T
    int n = 0;
};

/// Random walk embedded in a Brownian sample by successive exits from bands of
/// half-width sqrt(T/n) around the current walk level.
///
/// `driver` must extend past `horizon` far enough to contain n exits; exits are
/// detected at the first sample where the band is reached. Throws DomainError
/// asking for a longer/finer driver when fewer than n exits occur.
CouplingResult knight_embedding(const CadlagPath& driver, int n, double horizon);

/// Overload using the driver's own horizon.
CouplingResult knight_embedding(const CadlagPath& driver, int n);

/// CRR price path S0 * u^{ups} * d^{downs} on {iT/n} with u = exp(sigma sqrt(T/n)), d = 1/u.
CadlagPath crr_path_from_signs(std::span<const int> signs, const BlackScholesParams& params,
                               int n);

/// S0 * u^j * d^(k-j): price after k steps with j up-moves. Shared by paths and trees
/// so both produce bit-identical prices. When d == 1/u the net exponent 2j - k is
/// used, so recombined nodes at the root level are exactly S0.
double lattice_price(double S0, double u, double d, int k, int j);

/// Walk sqrt(T/n) * partial sums of `signs` on {iT/n}.
CadlagPath walk_from_signs(std::span<const int> signs, double T);

}  // namespace stoplab
