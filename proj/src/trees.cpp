#include "stoplab/trees.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "stoplab/errors.hpp"

namespace stoplab {

BinomialModel::BinomialModel(int n, double T, double u, double d, double rho, double S0)
    : n_(n), T_(T), u_(u), d_(d), rho_(rho), S0_(S0), p_star_(0.5) {
    if (n < 1) throw ParameterError("binomial model needs n >= 1");
    if (!(T > 0.0 && S0 > 0.0 && d > 0.0 && rho > 0.0 && std::isfinite(u) && std::isfinite(T) &&
          std::isfinite(S0)))
        throw ParameterError("binomial model needs T > 0, S0 > 0, d > 0, rho > 0");
    if (u == d) {
        if (rho != u)
            throw ParameterError("riskless binomial model requires u = d = rho (got u = d = " +
                                 format_number(u) + ", rho = " + format_number(rho) + ")");
        return;
    }
    if (!(d < rho && rho < u))
        throw ParameterError("no-arbitrage violated: need d < rho < u, got d = " + format_number(d) +
                             ", rho = " + format_number(rho) + ", u = " + format_number(u));
    p_star_ = (rho - d) / (u - d);
}

BinomialModel build_crr_model(const BlackScholesParams& params, int n) {
    params.validate();
    if (n < 1) throw ParameterError("CRR model needs n >= 1");
    const double u = std::exp(params.sigma * std::sqrt(params.T / n));
    const double d = 1.0 / u;
    const double rho = 1.0 + params.r * params.T / n;
    return BinomialModel(n, params.T, u, d, rho, params.S0);
}

double Payoff::discount_factor(const BinomialModel& model, int k) const {
    switch (discounting) {
        case Discounting::none:
            return 1.0;
        case Discounting::per_step:
            return std::pow(model.rho(), -k);
        case Discounting::continuous:
            return std::exp(-rate * model.time(k));
    }
    return 1.0;
}

double Payoff::discounted_gain(const BinomialModel& model, int k, int j) const {
    return discount_factor(model, k) * gain(model.time(k), model.price(k, j));
}

Payoff Payoff::american_put(double strike, Discounting discounting, double rate) {
    if (!(strike >= 0.0)) throw ParameterError("put strike must be non-negative");
    return Payoff{[strike](double, double x) { return std::max(strike - x, 0.0); }, strike,
                  discounting, rate};
}

Payoff Payoff::constant(double value) {
    return Payoff{[value](double, double) { return value; }, std::abs(value), Discounting::none,
                  0.0};
}

SnellSolution::SnellSolution(BinomialModel model, Payoff payoff, std::vector<double> envelope,
                             std::vector<std::uint8_t> immediate,
                             std::vector<std::uint8_t> exercise)
    : model_(std::move(model)),
      payoff_(std::move(payoff)),
      envelope_(std::move(envelope)),
      immediate_(std::move(immediate)),
      exercise_(std::move(exercise)) {}

double SnellSolution::continuation(int k, int j) const {
    if (k >= model_.n()) throw DomainError("no continuation value at the terminal step");
    const double p = model_.p_star();
    return p * envelope(k + 1, j + 1) + (1.0 - p) * envelope(k + 1, j);
}

namespace {

double checked_gain(const BinomialModel& model, const Payoff& payoff, int k, int j) {
    const double raw = payoff.gain(model.time(k), model.price(k, j));
    if (!std::isfinite(raw))
        throw DataError("payoff is not finite at node (k=" + std::to_string(k) +
                        ", j=" + std::to_string(j) + ")");
    if (std::abs(raw) > payoff.bound)
        throw DataError("payoff " + format_number(raw) + " exceeds its bound " +
                        format_number(payoff.bound) + " at node (k=" + std::to_string(k) +
                        ", j=" + std::to_string(j) + ")");
    return payoff.discount_factor(model, k) * raw;
}

}  // namespace

SnellSolution snell_envelope(const BinomialModel& model, const Payoff& payoff) {
    if (!payoff.gain) throw DataError("payoff has no gain function");
    const int n = model.n();
    const double p = model.p_star();
    const double q = 1.0 - p;
    std::vector<double> env(model.node_count());
    std::vector<std::uint8_t> immediate(env.size(), 1);
    std::vector<std::uint8_t> exercise(env.size(), 1);

    for (int j = 0; j <= n; ++j) env[BinomialModel::node_index(n, j)] = checked_gain(model, payoff, n, j);

    for (int k = n - 1; k >= 0; --k) {
        const std::size_t row = BinomialModel::node_index(k, 0);
        const std::size_t next = BinomialModel::node_index(k + 1, 0);
        for (int j = 0; j <= k; ++j) {
            const auto uj = static_cast<std::size_t>(j);
            const double cont = p * env[next + uj + 1] + q * env[next + uj];
            const double g = checked_gain(model, payoff, k, j);
            const double scale = std::max({1.0, std::abs(g), std::abs(cont)});
            const bool tie = std::abs(g - cont) <= kTieTolerance * scale;
            env[row + uj] = std::max(g, cont);
            immediate[row + uj] = (g > cont || tie) ? 1 : 0;
            exercise[row + uj] = (g > cont && !tie) || (tie && g != 0.0) ? 1 : 0;
        }
    }
    return SnellSolution(model, payoff, std::move(env), std::move(immediate), std::move(exercise));
}

StoppingRule optimal_rule(const SnellSolution& solution) {
    const BinomialModel& model = solution.model();
    StoppingRule rule(NodeSpace::markov, model.n(), model.T());
    for (int k = 0; k < model.n(); ++k)
        for (int j = 0; j <= k; ++j)
            rule.set({k, static_cast<std::uint64_t>(j)}, solution.exercise(k, j));
    return rule;
}

std::vector<BoundaryPoint> exercise_boundary(const SnellSolution& solution) {
    const BinomialModel& model = solution.model();
    const Payoff& payoff = solution.payoff();
    std::vector<BoundaryPoint> boundary;
    boundary.reserve(static_cast<std::size_t>(model.n()));
    for (int k = 0; k < model.n(); ++k) {
        const double t = model.time(k);
        double previous = payoff.gain(t, model.price(k, 0));
        for (int j = 1; j <= k; ++j) {
            const double g = payoff.gain(t, model.price(k, j));
            if (g > previous)
                throw DomainError("boundary undefined: gain increases with price at step " +
                                  std::to_string(k));
            previous = g;
        }
        BoundaryPoint point{k, t, std::nullopt};
        for (int j = k; j >= 0; --j) {
            if (solution.exercise(k, j)) {
                point.critical_price = model.price(k, j);
                break;
            }
        }
        boundary.push_back(point);
    }
    return boundary;
}

void write_snell_csv(std::ostream& out, const SnellSolution& solution) {
    const BinomialModel& model = solution.model();
    out << "k,j,price,gain,continuation,envelope,immediate\n";
    for (int k = 0; k <= model.n(); ++k) {
        for (int j = 0; j <= k; ++j) {
            out << k << ',' << j << ',' << format_number(model.price(k, j)) << ','
                << format_number(solution.gain(k, j)) << ',';
            if (k < model.n()) out << format_number(solution.continuation(k, j));
            out << ',' << format_number(solution.envelope(k, j)) << ','
                << (solution.immediate(k, j) ? 1 : 0) << '\n';
        }
    }
}

void write_boundary_csv(std::ostream& out, const std::vector<BoundaryPoint>& boundary) {
    out << "k,t,critical_price\n";
    for (const auto& p : boundary) {
        out << p.k << ',' << format_number(p.t) << ',';
        if (p.critical_price) out << format_number(*p.critical_price);
        out << '\n';
    }
}

}  // namespace stoplab
