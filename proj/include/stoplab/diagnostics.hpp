#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "stoplab/paths.hpp"
#include "stoplab/trees.hpp"

namespace stoplab {

class EmpiricalDistribution {
public:
    /// Throws DomainError when `samples` is empty or contains non-finite values.
    explicit EmpiricalDistribution(std::vector<double> samples);

    std::span<const double> samples() const noexcept { return samples_; }
    std::size_t size() const noexcept { return samples_.size(); }
    /// True when every sample lies in [0, horizon].
    bool within(double horizon) const noexcept;

private:
    std::vector<double> samples_;
};

/// Number of quantile levels (i + 1/2) / 1000 used by wasserstein1.
inline constexpr int kQuantileGridSize = 1000;

/// W1 between the empirical quantile functions sampled at kQuantileGridSize
/// mid-point levels: the mean absolute difference of the two quantile vectors.
double wasserstein1(const EmpiricalDistribution& a, const EmpiricalDistribution& b);

/// Fraction of pairs with |a - b| > epsilon.
double convergence_in_probability_estimate(std::span<const std::pair<double, double>> pairs,
                                           double epsilon);

/// Lower bound for sup_{sigma <= nu <= sigma + delta} P[|X_sigma - X_nu| >= epsilon]
/// on a binomial model, by Monte Carlo under p*.
///
/// Probe family: the optimal rule of every payoff, first-passage rules below
/// S0 d^m and above S0 u^m for m in {1, 2, 4, 8, 16}, and the fixed steps
/// 0, n/4, n/2, 3n/4. For each probe sigma the lags nu = sigma + l T/n,
/// 0 <= l <= floor(delta n / T), capped at T, are scanned on the same paths,
/// so the estimate never decreases in delta and never increases in epsilon.
/// Throws ConfigError when `payoffs` is empty.
double aldous_criterion_estimate(const BinomialModel& model, std::span<const Payoff> payoffs,
                                 double delta, double epsilon, int n_paths, std::uint64_t seed);

/// Event A defined on the terminal value of the Brownian motion (or of the
/// walk). `indicator` must be 0/1-valued; `limit` is the closed form
/// P[A | B(t) = b] for t < T.
struct TerminalEvent {
    std::function<double(double terminal)> indicator;
    std::function<double(double t, double b, double T)> limit;

    static TerminalEvent positive_terminal();  // {B(T) > 0}
    static TerminalEvent everything();
    static TerminalEvent nothing();
};

/// Source of coupled Brownian drivers: driver_points samples per [0, T],
/// sampled out to extension * T so that the band exits of the walk fit.
struct CouplingSampler {
    double T = 1.0;
    std::size_t driver_points = (std::size_t{1} << 14) + 1;
    double extension = 2.0;

    CadlagPath driver(std::uint64_t seed) const;
};

/// Martingale t -> P[A_n | F^n_t] along the walk, A_n = {indicator(B^n_T) = 1},
/// from exact backward induction on the symmetric walk tree. Throws DomainError
/// if the indicator is not 0/1 on some terminal node.
CadlagPath tree_martingale(std::span<const int> signs, double T, const TerminalEvent& event);

/// Limit martingale t -> P[A | F_t] along a Brownian path; equals the indicator at T.
CadlagPath limit_martingale(const CadlagPath& brownian, const TerminalEvent& event);

/// Mean J1 distance between the tree and limit martingales over n_paths coupled paths.
double filtration_convergence_probe(const CouplingSampler& sampler, int n,
                                    const TerminalEvent& event, int n_paths, std::uint64_t seed,
                                    int resolution = 64);

}  // namespace stoplab
