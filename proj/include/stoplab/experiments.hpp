#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "stoplab/processes.hpp"
#include "stoplab/trees.hpp"

namespace stoplab {

inline constexpr const char* kVersion = "0.1.0";

/// Effective configuration of one experiment run. Every field maps to a flat
/// config key of the same name (`n` for n_list).
struct ExperimentConfig {
    std::string command;
    BlackScholesParams params;
    double K = 100.0;
    std::string payoff = "put";  // put | constant | zero
    double payoff_value = 1.0;   // level of the constant payoff
    Discounting discounting = Discounting::per_step;
    std::vector<int> n_list;
    int n_paths = 1000;
    std::uint64_t seed = 1;
    std::string out;

    std::size_t driver_points = (std::size_t{1} << 14) + 1;
    double driver_extension = 2.0;
    double epsilon_fraction = 0.05;        // converge-times: epsilon = fraction * T
    std::vector<double> aldous_deltas{0.001, 0.01, 0.1};
    double aldous_epsilon_fraction = 0.01; // epsilon = fraction * S0
    int filtration_paths = 2000;
    int j1_resolution = 64;
    int oracle_models = 50;
    int mixtures_per_model = 200;

    Payoff make_payoff() const;
    /// Key/value echo of every field, in key order.
    std::map<std::string, std::string> echo() const;
};

inline const std::vector<std::string>& experiment_commands() {
    static const std::vector<std::string> commands{"price",        "oracle-check", "converge-values",
                                                   "converge-times", "coupling",    "diagnose"};
    return commands;
}

/// Parses `key = value` lines; '#' starts a comment. Throws ConfigError with
/// the line number on malformed lines or repeated keys.
std::map<std::string, std::string> parse_config(std::istream& in);

/// Builds and validates the configuration of `command` from defaults plus
/// `settings`. Throws ConfigError naming the offending field.
ExperimentConfig make_config(const std::string& command,
                             const std::map<std::string, std::string>& settings);

/// CSV table; cells are preformatted so that reruns are byte-identical.
struct Table {
    std::string name;  // file name, e.g. "table.csv"
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> row);
    void write(std::ostream& out) const;
};

struct RunOutput {
    nlohmann::json report;
    std::vector<Table> tables;  // tables[0] is table.csv
};

/// Runs the configured experiment. Wall-clock time is added by write_outputs.
RunOutput run_experiment(const ExperimentConfig& config);

/// Writes report.json and every table into config.out via temp file + rename.
void write_outputs(const ExperimentConfig& config, RunOutput& output, double wall_clock_seconds);

/// Random test models and payoffs shared by the oracle command and the tests.
struct RandomCase {
    BinomialModel model;
    Payoff payoff;
    std::string payoff_kind;
};

/// Model with n drawn from `n_choices`, random u > 1 > d and rho strictly between,
/// and a random bounded payoff (put, capped call or smooth oscillating gain)
/// with a random discount convention.
RandomCase random_case(std::mt19937_64& engine, const std::vector<int>& n_choices);

/// Smooth bump used for uniform payoff perturbations; |bump| <= 1.
double payoff_bump(double t, double x);

/// gain + amplitude * payoff_bump, with the bound enlarged accordingly.
Payoff perturbed(const Payoff& base, double amplitude);

}  // namespace stoplab
