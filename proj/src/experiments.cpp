#include "stoplab/experiments.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>

#include "stoplab/diagnostics.hpp"
#include "stoplab/errors.hpp"
#include "stoplab/parallel.hpp"
#include "stoplab/stopping.hpp"

namespace stoplab {

using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double parse_double(const std::string& key, const std::string& text) {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v))
        throw ConfigError("config field '" + key + "': '" + text + "' is not a finite number");
    return v;
}

long long parse_int(const std::string& key, const std::string& text) {
    long long v = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end)
        throw ConfigError("config field '" + key + "': '" + text + "' is not an integer");
    return v;
}

int parse_positive_int(const std::string& key, const std::string& text) {
    const long long v = parse_int(key, text);
    if (v < 1 || v > 1'000'000'000)
        throw ConfigError("config field '" + key + "' must be a positive integer, got " + text);
    return static_cast<int>(v);
}

std::string discounting_name(Discounting d) {
    switch (d) {
        case Discounting::none:
            return "none";
        case Discounting::per_step:
            return "per_step";
        case Discounting::continuous:
            return "continuous";
    }
    return "none";
}

template <typename T>
std::string join(const std::vector<T>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ',';
        if constexpr (std::is_floating_point_v<T>)
            out += format_number(values[i]);
        else
            out += std::to_string(values[i]);
    }
    return out;
}

std::vector<int> default_n_list(const std::string& command) {
    if (command == "price") return {128, 512, 2048, 8192};
    if (command == "oracle-check") return {1, 2, 3, 4, 5, 6};
    if (command == "converge-values") return {64, 128, 256, 512, 1024, 2048};
    if (command == "converge-times") return {64, 128, 256, 512, 1024};
    if (command == "coupling") return {64, 256, 1024, 4096};
    return {16, 64, 256, 1024};
}

}  // namespace

Payoff ExperimentConfig::make_payoff() const {
    Payoff p = payoff == "put"        ? Payoff::american_put(K, discounting, params.r)
               : payoff == "constant" ? Payoff::constant(payoff_value)
                                      : Payoff::constant(0.0);
    p.discounting = discounting;
    p.rate = params.r;
    return p;
}

std::map<std::string, std::string> ExperimentConfig::echo() const {
    return {
        {"experiment", command},
        {"S0", format_number(params.S0)},
        {"r", format_number(params.r)},
        {"sigma", format_number(params.sigma)},
        {"mu", format_number(params.mu)},
        {"T", format_number(params.T)},
        {"K", format_number(K)},
        {"payoff", payoff},
        {"payoff_value", format_number(payoff_value)},
        {"discounting", discounting_name(discounting)},
        {"n", join(n_list)},
        {"n_paths", std::to_string(n_paths)},
        {"seed", std::to_string(seed)},
        {"out", out},
        {"driver_points", std::to_string(driver_points)},
        {"driver_extension", format_number(driver_extension)},
        {"epsilon_fraction", format_number(epsilon_fraction)},
        {"aldous_deltas", join(aldous_deltas)},
        {"aldous_epsilon_fraction", format_number(aldous_epsilon_fraction)},
        {"filtration_paths", std::to_string(filtration_paths)},
        {"j1_resolution", std::to_string(j1_resolution)},
        {"oracle_models", std::to_string(oracle_models)},
        {"mixtures_per_model", std::to_string(mixtures_per_model)},
    };
}

std::map<std::string, std::string> parse_config(std::istream& in) {
    std::map<std::string, std::string> settings;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(number) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("config line " + std::to_string(number) + ": empty key");
        if (!settings.emplace(key, value).second)
            throw ConfigError("config line " + std::to_string(number) + ": repeated key '" + key + "'");
    }
    return settings;
}

ExperimentConfig make_config(const std::string& command,
                             const std::map<std::string, std::string>& settings) {
    const auto& commands = experiment_commands();
    if (std::find(commands.begin(), commands.end(), command) == commands.end())
        throw ConfigError("unknown experiment '" + command + "'");

    ExperimentConfig c;
    c.command = command;
    c.n_list = default_n_list(command);
    c.out = "stoplab-out/" + command;
    if (command == "converge-times") c.n_paths = 5000;
    if (command == "diagnose") c.n_paths = 5000;
    if (command == "coupling") c.n_paths = 50;

    for (const auto& [key, value] : settings) {
        if (key == "experiment") {
            if (value != command)
                throw ConfigError("config field 'experiment' is '" + value + "' but the command is '" +
                                  command + "'");
        } else if (key == "S0") {
            c.params.S0 = parse_double(key, value);
        } else if (key == "r") {
            c.params.r = parse_double(key, value);
        } else if (key == "sigma") {
            c.params.sigma = parse_double(key, value);
        } else if (key == "mu") {
            c.params.mu = parse_double(key, value);
        } else if (key == "T") {
            c.params.T = parse_double(key, value);
        } else if (key == "K") {
            c.K = parse_double(key, value);
        } else if (key == "payoff") {
            if (value != "put" && value != "constant" && value != "zero")
                throw ConfigError("config field 'payoff' must be put, constant or zero, got '" + value + "'");
            c.payoff = value;
        } else if (key == "payoff_value") {
            c.payoff_value = parse_double(key, value);
        } else if (key == "discounting") {
            if (value == "none")
                c.discounting = Discounting::none;
            else if (value == "per_step")
                c.discounting = Discounting::per_step;
            else if (value == "continuous")
                c.discounting = Discounting::continuous;
            else
                throw ConfigError("config field 'discounting' must be none, per_step or continuous");
        } else if (key == "n") {
            c.n_list.clear();
            for (const auto& item : split_list(value)) c.n_list.push_back(parse_positive_int(key, item));
        } else if (key == "n_paths") {
            c.n_paths = parse_positive_int(key, value);
        } else if (key == "seed") {
            const long long s = parse_int(key, value);
            if (s < 0) throw ConfigError("config field 'seed' must be non-negative");
            c.seed = static_cast<std::uint64_t>(s);
        } else if (key == "out") {
            if (value.empty()) throw ConfigError("config field 'out' is empty");
            c.out = value;
        } else if (key == "driver_points") {
            const int p = parse_positive_int(key, value);
            if (p < 2) throw ConfigError("config field 'driver_points' must be >= 2");
            c.driver_points = static_cast<std::size_t>(p);
        } else if (key == "driver_extension") {
            c.driver_extension = parse_double(key, value);
            if (c.driver_extension < 1.0)
                throw ConfigError("config field 'driver_extension' must be >= 1");
        } else if (key == "epsilon_fraction") {
            c.epsilon_fraction = parse_double(key, value);
            if (!(c.epsilon_fraction > 0.0))
                throw ConfigError("config field 'epsilon_fraction' must be > 0");
        } else if (key == "aldous_deltas") {
            c.aldous_deltas.clear();
            for (const auto& item : split_list(value)) {
                const double d = parse_double(key, item);
                if (d < 0.0) throw ConfigError("config field 'aldous_deltas' must be >= 0");
                c.aldous_deltas.push_back(d);
            }
            if (c.aldous_deltas.empty()) throw ConfigError("config field 'aldous_deltas' is empty");
        } else if (key == "aldous_epsilon_fraction") {
            c.aldous_epsilon_fraction = parse_double(key, value);
            if (!(c.aldous_epsilon_fraction > 0.0))
                throw ConfigError("config field 'aldous_epsilon_fraction' must be > 0");
        } else if (key == "filtration_paths") {
            c.filtration_paths = parse_positive_int(key, value);
        } else if (key == "j1_resolution") {
            c.j1_resolution = parse_positive_int(key, value);
        } else if (key == "oracle_models") {
            c.oracle_models = parse_positive_int(key, value);
        } else if (key == "mixtures_per_model") {
            c.mixtures_per_model = parse_positive_int(key, value);
        } else {
            throw ConfigError("unknown config field '" + key + "'");
        }
    }

    if (c.n_list.empty()) throw ConfigError("config field 'n' is empty");
    for (std::size_t i = 1; i < c.n_list.size(); ++i)
        if (c.n_list[i] <= c.n_list[i - 1])
            throw ConfigError("config field 'n' must be strictly increasing");
    if (command == "oracle-check" && c.n_list.back() > kMaxMarkovEnumerationSteps)
        throw ConfigError("config field 'n': oracle-check needs n <= " +
                          std::to_string(kMaxMarkovEnumerationSteps));
    if (command == "diagnose")
        for (int n : c.n_list)
            if (!std::has_single_bit(static_cast<unsigned>(n)))
                throw ConfigError("config field 'n': diagnose needs powers of two, got " +
                                  std::to_string(n));
    if (c.payoff == "put" && c.K < 0.0) throw ConfigError("config field 'K' must be >= 0");
    return c;
}

void Table::add_row(std::vector<std::string> row) {
    if (row.size() != columns.size())
        throw DomainError("table " + name + ": row has " + std::to_string(row.size()) +
                          " cells, expected " + std::to_string(columns.size()));
    rows.push_back(std::move(row));
}

void Table::write(std::ostream& out) const {
    for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
        out << '\n';
    }
}

double payoff_bump(double t, double x) { return std::cos(3.0 * t) * std::sin(x / 7.0); }

Payoff perturbed(const Payoff& base, double amplitude) {
    Payoff p = base;
    auto gain = base.gain;
    p.gain = [gain, amplitude](double t, double x) { return gain(t, x) + amplitude * payoff_bump(t, x); };
    p.bound = base.bound + std::abs(amplitude);
    return p;
}

RandomCase random_case(std::mt19937_64& engine, const std::vector<int>& n_choices) {
    std::uniform_int_distribution<std::size_t> pick_n(0, n_choices.size() - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int n = n_choices[pick_n(engine)];
    const double u = 1.02 + 0.4 * unit(engine);
    const double d = 1.0 / u * (0.9 + 0.1 * unit(engine));
    const double rho = d + (u - d) * (0.1 + 0.8 * unit(engine));
    const double S0 = 50.0 + 100.0 * unit(engine);
    const double T = 0.25 + 1.75 * unit(engine);
    BinomialModel model(n, T, u, d, rho, S0);

    const auto kind = static_cast<int>(3.0 * unit(engine));
    const auto disc = static_cast<int>(2.0 * unit(engine)) == 0 ? Discounting::none : Discounting::per_step;
    const double K = S0 * (0.7 + 0.6 * unit(engine));
    if (kind == 0) return {model, Payoff::american_put(K, disc), "put"};
    if (kind == 1) {
        const double cap = 0.3 * S0;
        return {model,
                Payoff{[K, cap](double, double x) { return std::min(std::max(x - K, 0.0), cap); }, cap,
                       disc, 0.0},
                "capped_call"};
    }
    const double a = 1.0 + 9.0 * unit(engine);
    const double w = 5.0 + 20.0 * unit(engine);
    return {model,
            Payoff{[a, w](double t, double x) { return a * std::sin(x / w + 2.0 * t); }, a, disc, 0.0},
            "oscillating"};
}

namespace {

json normalization_record(const ExperimentConfig& c) {
    return {{"u", "exp(sigma*sqrt(T/n))"},
            {"d", "1/u"},
            {"rho", "1+r*T/n"},
            {"p_star", "(rho-d)/(u-d)"},
            {"discounting", discounting_name(c.discounting)},
            {"payoff", c.payoff == "put" ? "(K-x)^+" : c.payoff}};
}

std::string cell(double v) { return format_number(v); }
std::string cell(int v) { return std::to_string(v); }

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double upper = v[mid];
    if (v.size() % 2 == 1) return upper;
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

CouplingSampler sampler_of(const ExperimentConfig& c) {
    return {c.params.T, c.driver_points, c.driver_extension};
}

RunOutput run_price(const ExperimentConfig& c) {
    RunOutput out;
    const Payoff payoff = c.make_payoff();
    Table table{"table.csv",
                {"n", "u", "d", "rho", "p_star", "value", "reference", "rel_error", "critical_price_k0",
                 "exercise_steps"},
                {}};
    Table boundary_table{"boundary.csv", {"k", "t", "critical_price"}, {}};

    struct Row {
        BinomialModel model;
        double value;
        std::optional<double> critical0;
        int exercise_steps;
    };
    std::vector<Row> rows;
    for (int n : c.n_list) {
        const BinomialModel model = build_crr_model(c.params, n);
        const SnellSolution sol = snell_envelope(model, payoff);
        const auto boundary = exercise_boundary(sol);
        int steps = 0;
        for (const auto& b : boundary) steps += b.critical_price ? 1 : 0;
        rows.push_back({model, sol.root_value(), boundary[0].critical_price, steps});
        if (n == c.n_list.back())
            for (const auto& b : boundary)
                boundary_table.add_row({cell(b.k), cell(b.t), b.critical_price ? cell(*b.critical_price) : ""});
    }

    const int N = c.n_list.back();
    double reference = rows.back().value;
    std::string method = "finest_grid: V(" + std::to_string(N) + ")";
    if (N >= 2 && N % 2 == 0) {
        double half = 0.0;
        const auto it = std::find(c.n_list.begin(), c.n_list.end(), N / 2);
        if (it != c.n_list.end())
            half = rows[static_cast<std::size_t>(it - c.n_list.begin())].value;
        else
            half = snell_envelope(build_crr_model(c.params, N / 2), payoff).root_value();
        reference = 2.0 * rows.back().value - half;
        method = "richardson_two_point: 2*V(" + std::to_string(N) + ") - V(" + std::to_string(N / 2) +
                 "), an approximation of the continuous-time value";
    }

    json results = json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        const double err = reference != 0.0 ? std::abs(r.value - reference) / std::abs(reference)
                                             : std::abs(r.value - reference);
        table.add_row({cell(c.n_list[i]), cell(r.model.u()), cell(r.model.d()), cell(r.model.rho()),
                       cell(r.model.p_star()), cell(r.value), cell(reference), cell(err),
                       r.critical0 ? cell(*r.critical0) : "", cell(r.exercise_steps)});
        results.push_back({{"n", c.n_list[i]},
                           {"value", r.value},
                           {"rel_error_vs_reference", err},
                           {"critical_price_k0", r.critical0 ? json(*r.critical0) : json(nullptr)},
                           {"exercise_steps", r.exercise_steps}});
    }
    out.report["results"] = results;
    out.report["reference_value"] = reference;
    out.report["reference_method"] = method;
    out.tables = {table, boundary_table};
    return out;
}

RunOutput run_oracle_check(const ExperimentConfig& c) {
    RunOutput out;
    Table table{"table.csv",
                {"model_id", "n", "space", "payoff", "snell_value", "brute_value", "abs_diff", "rule_count"},
                {}};
    Table mixtures{"mixtures.csv",
                   {"model_id", "n", "mixtures", "max_mixture_value", "brute_value", "degenerate_value",
                    "violations"},
                   {}};
    std::mt19937_64 engine(c.seed);
    double worst = 0.0;
    long long violations_total = 0;
    for (int m = 0; m < c.oracle_models; ++m) {
        const RandomCase rc = random_case(engine, c.n_list);
        const SnellSolution sol = snell_envelope(rc.model, rc.payoff);
        const int n = rc.model.n();
        double brute_best = -INFINITY;
        for (NodeSpace space : {NodeSpace::markov, NodeSpace::path_dependent}) {
            if (space == NodeSpace::path_dependent && n > kMaxHistoryEnumerationSteps) continue;
            const BruteForceResult bf = brute_force(rc.model, rc.payoff, space);
            const double diff = std::abs(sol.root_value() - bf.value);
            worst = std::max(worst, diff);
            brute_best = std::max(brute_best, bf.value);
            table.add_row({cell(m), cell(n), space == NodeSpace::markov ? "markov" : "path_dependent",
                           rc.payoff_kind, cell(sol.root_value()), cell(bf.value), cell(diff),
                           std::to_string(bf.rule_count)});
        }

        // Random finite mixtures of pure rules.
        const NodeSpace space = n <= kMaxHistoryEnumerationSteps ? NodeSpace::path_dependent : NodeSpace::markov;
        const RuleEnumerator rules(rc.model, space);
        std::uniform_int_distribution<std::uint64_t> pick_rule(0, rules.count() - 1);
        std::uniform_int_distribution<int> pick_size(1, 4);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        double best_mixture = -INFINITY;
        long long violations = 0;
        for (int k = 0; k < c.mixtures_per_model; ++k) {
            RandomizedRule mix;
            const int size = pick_size(engine);
            std::vector<double> w(static_cast<std::size_t>(size));
            double total = 0.0;
            for (auto& x : w) total += (x = unit(engine) + 1e-3);
            for (int i = 0; i < size; ++i)
                mix.components.push_back({w[static_cast<std::size_t>(i)] / total, rules.rule(pick_rule(engine))});
            const double v = randomized_value(rc.model, rc.payoff, mix);
            best_mixture = std::max(best_mixture, v);
            if (v > brute_best + 1e-12) ++violations;
        }
        RandomizedRule degenerate;
        degenerate.components.push_back({1.0, optimal_rule(sol)});
        const double deg = randomized_value(rc.model, rc.payoff, degenerate);
        violations_total += violations;
        mixtures.add_row({cell(m), cell(n), cell(c.mixtures_per_model), cell(best_mixture), cell(brute_best),
                          cell(deg), std::to_string(violations)});
    }
    out.report["results"] = {{"models", c.oracle_models},
                             {"max_abs_diff", worst},
                             {"mixture_violations", violations_total}};
    out.report["reference_method"] = "exhaustive enumeration of stopping rules";
    out.tables = {table, mixtures};
    return out;
}

RunOutput run_converge_values(const ExperimentConfig& c) {
    RunOutput out;
    const Payoff payoff = c.make_payoff();
    Table table{"table.csv", {"n", "value", "abs_diff_prev"}, {}};
    json results = json::array();
    std::optional<double> prev;
    for (int n : c.n_list) {
        const double v = snell_envelope(build_crr_model(c.params, n), payoff).root_value();
        const std::string diff = prev ? cell(std::abs(v - *prev)) : "";
        table.add_row({cell(n), cell(v), diff});
        results.push_back({{"n", n}, {"value", v}, {"abs_diff_prev", prev ? json(std::abs(v - *prev)) : json(nullptr)}});
        prev = v;
    }
    out.report["results"] = results;
    out.report["reference_method"] = "successive differences across n (no external reference)";
    out.tables = {table};
    return out;
}

RunOutput run_converge_times(const ExperimentConfig& c) {
    RunOutput out;
    const Payoff payoff = c.make_payoff();
    std::vector<StoppingRule> rules;
    for (int n : c.n_list) rules.push_back(optimal_rule(snell_envelope(build_crr_model(c.params, n), payoff)));
    const CouplingSampler sampler = sampler_of(c);

    const auto per_path = parallel_map(static_cast<std::size_t>(c.n_paths), [&](std::size_t i) {
        const CadlagPath driver = sampler.driver(derive_seed(c.seed, i));
        std::vector<double> taus;
        for (std::size_t m = 0; m < c.n_list.size(); ++m) {
            const CouplingResult cr = knight_embedding(driver, c.n_list[m], c.params.T);
            taus.push_back(stopping_time_on_path(rules[m], cr.signs));
        }
        return taus;
    });

    std::vector<std::vector<double>> taus(c.n_list.size());
    for (const auto& row : per_path)
        for (std::size_t m = 0; m < row.size(); ++m) taus[m].push_back(row[m]);

    Table table{"table.csv", {"n", "next_n", "w1", "fraction_far", "mean_tau", "mean_tau_next", "paths"}, {}};
    json results = json::array();
    const double eps = c.epsilon_fraction * c.params.T;
    for (std::size_t m = 0; m + 1 < c.n_list.size(); ++m) {
        const double w1 = wasserstein1(EmpiricalDistribution(taus[m]), EmpiricalDistribution(taus[m + 1]));
        std::vector<std::pair<double, double>> pairs;
        for (std::size_t i = 0; i < taus[m].size(); ++i) pairs.emplace_back(taus[m][i], taus[m + 1][i]);
        const double far = convergence_in_probability_estimate(pairs, eps);
        table.add_row({cell(c.n_list[m]), cell(c.n_list[m + 1]), cell(w1), cell(far), cell(mean(taus[m])),
                       cell(mean(taus[m + 1])), cell(c.n_paths)});
        results.push_back({{"n", c.n_list[m]}, {"next_n", c.n_list[m + 1]}, {"w1", w1}, {"fraction_far", far}});
    }
    out.report["results"] = results;
    out.report["epsilon"] = eps;
    out.report["reference_method"] = "successive coupled pairs (n, next n) on the same Brownian drivers";
    out.tables = {table};
    return out;
}

RunOutput run_coupling(const ExperimentConfig& c) {
    RunOutput out;
    c.params.validate();
    const CouplingSampler sampler = sampler_of(c);
    // S0 exp(sigma B^n) carries no drift, so the comparison path is S0 exp(sigma B).
    BlackScholesParams bs = c.params;
    bs.mu = 0.5 * c.params.sigma * c.params.sigma;

    const auto per_path = parallel_map(static_cast<std::size_t>(c.n_paths), [&](std::size_t i) {
        const CadlagPath driver = sampler.driver(derive_seed(c.seed, i));
        std::vector<std::pair<double, double>> d;
        std::optional<CadlagPath> s;
        for (int n : c.n_list) {
            const CouplingResult cr = knight_embedding(driver, n, c.params.T);
            if (!s) s = sample_black_scholes(bs, cr.brownian, Measure::physical);
            d.emplace_back(sup_distance(cr.walk, cr.brownian),
                           sup_distance(crr_path_from_signs(cr.signs, c.params, n), *s));
        }
        return d;
    });

    Table table{"table.csv", {"n", "median_sup_walk", "median_sup_price", "paths"}, {}};
    json results = json::array();
    for (std::size_t m = 0; m < c.n_list.size(); ++m) {
        std::vector<double> walk, price;
        for (const auto& row : per_path) {
            walk.push_back(row[m].first);
            price.push_back(row[m].second);
        }
        const double mw = median(walk), mp = median(price);
        table.add_row({cell(c.n_list[m]), cell(mw), cell(mp), cell(c.n_paths)});
        results.push_back({{"n", c.n_list[m]}, {"median_sup_walk", mw}, {"median_sup_price", mp}});
    }

    // Coupled triple of the first path at the finest n, on the merged grid.
    Table triple{"paths.csv", {"t", "B", "Bn", "Sn"}, {}};
    {
        const int n = c.n_list.back();
        const CouplingResult cr = knight_embedding(sampler.driver(derive_seed(c.seed, 0)), n, c.params.T);
        const CadlagPath sn = crr_path_from_signs(cr.signs, c.params, n);
        std::vector<double> times(cr.brownian.grid().points().begin(), cr.brownian.grid().points().end());
        times.insert(times.end(), cr.walk.grid().points().begin(), cr.walk.grid().points().end());
        std::sort(times.begin(), times.end());
        times.erase(std::unique(times.begin(), times.end()), times.end());
        for (double t : times)
            triple.add_row({cell(t), cell(cr.brownian.evaluate(t)), cell(cr.walk.evaluate(t)), cell(sn.evaluate(t))});
    }
    out.report["results"] = results;
    out.report["comparison_drift"] = bs.mu;
    out.report["reference_method"] = "Brownian driver sampled at driver_points per [0,T]";
    out.tables = {table, triple};
    return out;
}

RunOutput run_diagnose(const ExperimentConfig& c) {
    RunOutput out;
    const std::vector<Payoff> payoffs{c.make_payoff()};
    const double eps = c.aldous_epsilon_fraction * c.params.S0;
    Table aldous{"table.csv", {"n", "delta", "epsilon", "estimate"}, {}};
    Table filtration{"filtration.csv", {"n", "mean_j1", "paths"}, {}};
    json results = json::array();
    for (int n : c.n_list) {
        const BinomialModel model = build_crr_model(c.params, n);
        json per_delta = json::array();
        for (double delta : c.aldous_deltas) {
            const double est = aldous_criterion_estimate(model, payoffs, delta, eps, c.n_paths, c.seed);
            aldous.add_row({cell(n), cell(delta), cell(eps), cell(est)});
            per_delta.push_back({{"delta", delta}, {"estimate", est}});
        }
        const double j1 = filtration_convergence_probe(sampler_of(c), n, TerminalEvent::positive_terminal(),
                                                       c.filtration_paths, c.seed, c.j1_resolution);
        filtration.add_row({cell(n), cell(j1), cell(c.filtration_paths)});
        results.push_back({{"n", n}, {"aldous", per_delta}, {"filtration_mean_j1", j1}});
    }
    out.report["results"] = results;
    out.report["reference_method"] =
        "Aldous estimate is a lower bound over a finite probe family; J1 distance is an upper bound";
    out.tables = {aldous, filtration};
    return out;
}

}  // namespace

RunOutput run_experiment(const ExperimentConfig& config) {
    RunOutput out;
    if (config.command == "price")
        out = run_price(config);
    else if (config.command == "oracle-check")
        out = run_oracle_check(config);
    else if (config.command == "converge-values")
        out = run_converge_values(config);
    else if (config.command == "converge-times")
        out = run_converge_times(config);
    else if (config.command == "coupling")
        out = run_coupling(config);
    else if (config.command == "diagnose")
        out = run_diagnose(config);
    else
        throw ConfigError("unknown experiment '" + config.command + "'");
    out.report["tool"] = "stoplab";
    out.report["version"] = kVersion;
    out.report["command"] = config.command;
    out.report["config"] = config.echo();
    out.report["normalization"] = normalization_record(config);
    return out;
}

namespace {

void write_atomic(const std::filesystem::path& target, const std::string& content) {
    std::filesystem::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw Error("cannot write " + tmp.string());
        f << content;
        if (!f.flush()) throw Error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, target);
}

}  // namespace

void write_outputs(const ExperimentConfig& config, RunOutput& output, double wall_clock_seconds) {
    const std::filesystem::path dir(config.out);
    std::filesystem::create_directories(dir);
    output.report["wall_clock_seconds"] = wall_clock_seconds;
    json files = json::array();
    for (const auto& t : output.tables) {
        std::ostringstream csv;
        t.write(csv);
        write_atomic(dir / t.name, csv.str());
        files.push_back(t.name);
    }
    output.report["tables"] = files;
    write_atomic(dir / "report.json", output.report.dump(2) + "\n");
}

}  // namespace stoplab
