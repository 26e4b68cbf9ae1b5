#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "stoplab/processes.hpp"
#include "stoplab/stopping_rule.hpp"

namespace stoplab {

/// Recombining n-step binomial model. Node (k, j) carries price S0 u^j d^(k-j).
///
/// Requires d < rho < u so that the risk-neutral up-probability
/// p* = (rho - d) / (u - d) lies in (0, 1). The riskless case u = d = rho is also
/// accepted (p* is then set to 1/2; every path has the same price).
class BinomialModel {
public:
    BinomialModel(int n, double T, double u, double d, double rho, double S0);

    int n() const noexcept { return n_; }
    double T() const noexcept { return T_; }
    double u() const noexcept { return u_; }
    double d() const noexcept { return d_; }
    double rho() const noexcept { return rho_; }
    double S0() const noexcept { return S0_; }
    double p_star() const noexcept { return p_star_; }

    double time(int k) const noexcept { return k == n_ ? T_ : T_ * k / n_; }
    double price(int k, int j) const { return lattice_price(S0_, u_, d_, k, j); }

    static std::size_t node_index(int k, int j) {
        const auto uk = static_cast<std::size_t>(k);
        return uk * (uk + 1) / 2 + static_cast<std::size_t>(j);
    }
    std::size_t node_count() const noexcept { return node_index(n_ + 1, 0); }

private:
    int n_;
    double T_, u_, d_, rho_, S0_, p_star_;
};

/// CRR model: u = exp(sigma sqrt(T/n)), d = 1/u, rho = 1 + rT/n.
/// Throws ParameterError when d < rho < u fails.
BinomialModel build_crr_model(const BlackScholesParams& params, int n);

enum class Discounting { none, per_step, continuous };

/// Bounded gain gamma(t, x) with an explicit discount convention. The factor
/// applied at step k is 1, rho^-k or exp(-rate t_k).
struct Payoff {
    std::function<double(double t, double x)> gain;
    double bound = 0.0;
    Discounting discounting = Discounting::none;
    double rate = 0.0;  // used by Discounting::continuous

    double discount_factor(const BinomialModel& model, int k) const;
    /// Discounted gain at node (k, j); the quantity the envelope dominates.
    double discounted_gain(const BinomialModel& model, int k, int j) const;

    /// (K - x)^+, bounded by K.
    static Payoff american_put(double strike, Discounting discounting = Discounting::per_step,
                               double rate = 0.0);
    static Payoff constant(double value);
};

/// Backward-induction solution. Values are in time-0 money: the gain is
/// pre-discounted, so U(k,j) = max(G(k,j), p* U(k+1,j+1) + (1-p*) U(k+1,j)).
class SnellSolution {
public:
    SnellSolution(BinomialModel model, Payoff payoff, std::vector<double> envelope,
                  std::vector<std::uint8_t> immediate, std::vector<std::uint8_t> exercise);

    const BinomialModel& model() const noexcept { return model_; }
    const Payoff& payoff() const noexcept { return payoff_; }
    double root_value() const noexcept { return envelope_[0]; }

    double envelope(int k, int j) const { return envelope_[BinomialModel::node_index(k, j)]; }
    double gain(int k, int j) const { return payoff_.discounted_gain(model_, k, j); }
    /// Expected envelope one step ahead; undefined at k = n.
    double continuation(int k, int j) const;
    /// Contact set: gain >= continuation (ties included). Always true at k = n.
    bool immediate(int k, int j) const { return immediate_[BinomialModel::node_index(k, j)] != 0; }
    /// Decision of the optimal rule: contact set minus zero-gain ties.
    bool exercise(int k, int j) const { return exercise_[BinomialModel::node_index(k, j)] != 0; }

private:
    BinomialModel model_;
    Payoff payoff_;
    std::vector<double> envelope_;
    std::vector<std::uint8_t> immediate_;
    std::vector<std::uint8_t> exercise_;
};

/// Relative tolerance under which gain and continuation count as tied.
inline constexpr double kTieTolerance = 1e-12;

/// O(n^2) backward induction. Throws DataError naming the node when the gain is
/// non-finite or exceeds payoff.bound in absolute value.
SnellSolution snell_envelope(const BinomialModel& model, const Payoff& payoff);

/// Markov rule stopping at the first node where the gain reaches the envelope.
/// Ties stop, except zero-gain ties, which continue (exercising a worthless
/// claim is never required and continuing there is equally optimal).
StoppingRule optimal_rule(const SnellSolution& solution);

struct BoundaryPoint {
    int k = 0;
    double t = 0.0;
    std::optional<double> critical_price;  // largest exercised lattice price at step k
};

/// Exercise boundary for steps k = 0..n-1. Throws DomainError ("boundary
/// undefined") if the gain is not non-increasing in price on some lattice column.
std::vector<BoundaryPoint> exercise_boundary(const SnellSolution& solution);

/// CSV `k,j,price,gain,continuation,envelope,immediate`; continuation is empty at k = n.
void write_snell_csv(std::ostream& out, const SnellSolution& solution);
/// CSV `k,t,critical_price`; critical_price is empty when nothing is exercised.
void write_boundary_csv(std::ostream& out, const std::vector<BoundaryPoint>& boundary);

}  // namespace stoplab
