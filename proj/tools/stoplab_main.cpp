// stoplab: batch runner for the optimal-stopping experiments.
//
//   stoplab <command> [--config FILE] [--n 64,128] [--seed S] [--out DIR] [--set key=value ...]
//
// Exit codes: 0 success, 2 configuration error, 3 numerical precondition error.

#include <chrono>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "stoplab/errors.hpp"
#include "stoplab/experiments.hpp"

namespace {

struct Options {
    std::string config_file;
    std::vector<std::string> n;
    std::string seed;
    std::string out;
    std::vector<std::string> set;
};

int run(const std::string& command, const Options& opt) {
    using namespace stoplab;
    std::map<std::string, std::string> settings;
    if (!opt.config_file.empty()) {
        std::ifstream in(opt.config_file);
        if (!in) throw ConfigError("cannot open config file '" + opt.config_file + "'");
        settings = parse_config(in);
    }
    for (const auto& kv : opt.set) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + kv + "'");
        settings[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    if (!opt.n.empty()) {
        std::string joined;
        for (const auto& item : opt.n) joined += (joined.empty() ? "" : ",") + item;
        settings["n"] = joined;
    }
    if (!opt.seed.empty()) settings["seed"] = opt.seed;
    if (!opt.out.empty()) settings["out"] = opt.out;

    const ExperimentConfig config = make_config(command, settings);
    const auto start = std::chrono::steady_clock::now();
    RunOutput output = run_experiment(config);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_outputs(config, output, seconds);
    std::cout << command << ": wrote " << config.out << "/report.json";
    for (const auto& t : output.tables) std::cout << ", " << t.name;
    std::cout << " (" << seconds << " s)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimal stopping on binomial and discretized models"};
    app.set_version_flag("--version", std::string("stoplab ") + stoplab::kVersion);
    app.require_subcommand(1);

    Options opt;
    std::string chosen;
    for (const auto& name : stoplab::experiment_commands()) {
        auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
        sub->add_option("--config", opt.config_file, "flat key = value config file");
        sub->add_option("--n", opt.n, "step counts, comma separated (overrides config)")
            ->expected(1, -1)
            ->delimiter(',');
        sub->add_option("--seed", opt.seed, "random seed (overrides config)");
        sub->add_option("--out", opt.out, "output directory (overrides config)");
        sub->add_option("--set", opt.set, "extra key=value override, repeatable");
        sub->callback([&chosen, name] { chosen = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        return run(chosen, opt);
    } catch (const stoplab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const stoplab::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
