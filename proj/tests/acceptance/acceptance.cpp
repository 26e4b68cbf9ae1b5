// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "stoplab/diagnostics.hpp"
#include "stoplab/experiments.hpp"
#include "stoplab/stopping.hpp"
#include "stoplab/trees.hpp"

using namespace stoplab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& name, double budget_seconds, const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o{false, ""};
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < budget_seconds;
    const bool pass = o.pass && in_time;
    if (!pass) ++failures;
    std::printf("[%s] %d %s: %s; %.1f s (budget %.0f s)%s\n", pass ? "PASS" : "FAIL", id, name.c_str(),
                o.detail.c_str(), secs, budget_seconds, in_time ? "" : " OVER BUDGET");
    std::fflush(stdout);
}

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string join(const std::vector<double>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + num(v[i]);
    return s + "]";
}

bool strictly_decreasing(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] < v[i - 1])) return false;
    return true;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

double put_value(int n) {
    BlackScholesParams p;  // S0 = 100, r = 0.05, sigma = 0.2, T = 1
    return snell_envelope(build_crr_model(p, n), Payoff::american_put(100.0, Discounting::per_step)).root_value();
}

}  // namespace

int main() {
    criterion(1, "snell value equals exhaustive supremum", 60, [] {
        std::mt19937_64 rng(20240601);
        double worst = 0.0;
        int markov = 0, history = 0;
        for (int m = 0; m < 50; ++m) {
            const RandomCase rc = random_case(rng, {1, 2, 3, 4, 5, 6});
            const double v = snell_envelope(rc.model, rc.payoff).root_value();
            worst = std::max(worst, std::abs(v - brute_force_value(rc.model, rc.payoff, NodeSpace::markov)));
            ++markov;
            if (rc.model.n() <= kMaxHistoryEnumerationSteps) {
                worst = std::max(worst,
                                 std::abs(v - brute_force_value(rc.model, rc.payoff, NodeSpace::path_dependent)));
                ++history;
            }
        }
        return Outcome{worst <= 1e-12, "50 models (" + std::to_string(markov) + " Markov, " +
                                           std::to_string(history) + " history enumerations), max |diff| = " +
                                           num(worst) + " (tol 1e-12)"};
    });

    criterion(2, "randomized rules do not beat pure rules", 60, [] {
        std::mt19937_64 rng(20240602);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::uniform_int_distribution<int> size(1, 5);
        double worst_excess = -INFINITY, worst_gap = 0.0;
        for (int m = 0; m < 20; ++m) {
            const RandomCase rc = random_case(rng, {1, 2, 3, 4});
            const double brute = brute_force_value(rc.model, rc.payoff, NodeSpace::path_dependent);
            const RuleEnumerator rules(rc.model, NodeSpace::path_dependent);
            std::uniform_int_distribution<std::uint64_t> pick(0, rules.count() - 1);
            for (int k = 0; k < 200; ++k) {
                RandomizedRule mix;
                const int c = size(rng);
                std::vector<double> w(static_cast<std::size_t>(c));
                double total = 0.0;
                for (double& x : w) total += (x = unit(rng) + 1e-3);
                for (double x : w) mix.components.push_back({x / total, rules.rule(pick(rng))});
                worst_excess = std::max(worst_excess, randomized_value(rc.model, rc.payoff, mix) - brute);
            }
            RandomizedRule degenerate{{{1.0, optimal_rule(snell_envelope(rc.model, rc.payoff))}}};
            worst_gap = std::max(worst_gap, std::abs(randomized_value(rc.model, rc.payoff, degenerate) - brute));
        }
        return Outcome{worst_excess <= 1e-12 && worst_gap <= 1e-12,
                       "20 models x 200 mixtures, max(mixture - brute) = " + num(worst_excess) +
                           ", degenerate gap = " + num(worst_gap) + " (tol 1e-12)"};
    });

    criterion(3, "put values converge under refinement", 120, [] {
        const std::vector<int> ns{64, 128, 256, 512, 1024, 2048};
        std::vector<double> v;
        for (int n : ns) v.push_back(put_value(n));
        std::vector<double> diffs;
        for (std::size_t i = 0; i + 1 < v.size(); ++i) diffs.push_back(std::abs(v[i + 1] - v[i]));
        const double reference = 2.0 * put_value(8192) - put_value(4096);
        const double rel = std::abs(v.back() - reference) / reference;
        return Outcome{strictly_decreasing(diffs) && rel <= 0.005,
                       "|V(2n)-V(n)| for n=64..1024 = " + join(diffs) + "; V(2048) = " + num(v.back()) +
                           ", Richardson reference 2V(8192)-V(4096) = " + num(reference) + ", rel err " + num(rel) +
                           " (tol 0.005)"};
    });

    criterion(4, "value moves by at most the payoff perturbation", 30, [] {
        const BinomialModel model = build_crr_model(BlackScholesParams{}, 256);
        const Payoff put = Payoff::american_put(100.0);
        const double base = snell_envelope(model, put).root_value();
        bool ok = true;
        std::string detail;
        for (int k : {1, 2, 4, 8}) {
            const Payoff bumped = perturbed(put, 1.0 / k);
            double sup = 0.0;
            for (int s = 0; s <= model.n(); ++s)
                for (int j = 0; j <= s; ++j)
                    sup = std::max(sup, std::abs(bumped.discounted_gain(model, s, j) - put.discounted_gain(model, s, j)));
            const double change = std::abs(snell_envelope(model, bumped).root_value() - base);
            ok = ok && change <= sup;
            detail += (detail.empty() ? "" : "; ") + std::string("k=") + std::to_string(k) + ": " + num(change) +
                      " <= " + num(sup);
        }
        return Outcome{ok, "n=256, " + detail};
    });

    criterion(5, "walk and CRR price path approach the coupled limits", 180, [] {
        const ExperimentConfig c = make_config("coupling", {{"n", "64,4096"}, {"n_paths", "50"}, {"seed", "1"}});
        RunOutput out = run_experiment(c);
        const auto& r = out.report["results"];
        const double w64 = r[0]["median_sup_walk"], w4096 = r[1]["median_sup_walk"];
        const double s64 = r[0]["median_sup_price"], s4096 = r[1]["median_sup_price"];
        const double rw = w4096 / w64, rs = s4096 / s64;
        return Outcome{rw < 0.5 && rs < 0.5, "driver " + std::to_string(c.driver_points - 1) +
                                                 " steps per [0,T], 50 seeds; median sup|Bn-B| ratio 4096/64 = " +
                                                 num(rw) + ", median sup|Sn-S| ratio = " + num(rs) + " (need < 0.5)"};
    });

    criterion(6, "optimal stopping times converge in law and in probability", 300, [] {
        const ExperimentConfig c =
            make_config("converge-times", {{"n", "64,128,256,512,1024"}, {"n_paths", "5000"}, {"seed", "1"}});
        RunOutput out = run_experiment(c);
        std::vector<double> w1, far;
        for (const auto& r : out.report["results"]) {
            w1.push_back(r["w1"]);
            far.push_back(r["fraction_far"]);
        }
        return Outcome{strictly_decreasing(w1) && strictly_decreasing(far),
                       "5000 coupled paths, n=64..512 vs 2n: W1 = " + join(w1) + ", P(|tau_n - tau_2n| > 0.05T) = " +
                           join(far)};
    });

    criterion(7, "Aldous estimate increases with delta", 120, [] {
        const BinomialModel model = build_crr_model(BlackScholesParams{}, 512);
        const std::vector<Payoff> payoffs{Payoff::american_put(100.0)};
        std::vector<double> e;
        for (double delta : {0.001, 0.01, 0.1})
            e.push_back(aldous_criterion_estimate(model, payoffs, delta, 0.01 * 100.0, 5000, 1));
        return Outcome{e[0] < e[1] && e[1] < e[2],
                       "n=512, eps=1, 5000 paths, estimate at delta 0.001/0.01/0.1 = " + join(e)};
    });

    criterion(8, "filtration martingales get closer in J1", 300, [] {
        const CouplingSampler sampler;
        const double d16 = filtration_convergence_probe(sampler, 16, TerminalEvent::positive_terminal(), 2000, 1);
        const double d1024 = filtration_convergence_probe(sampler, 1024, TerminalEvent::positive_terminal(), 2000, 1);
        return Outcome{d1024 < d16, "2000 paths, mean J1 at n=16 = " + num(d16) + ", at n=1024 = " + num(d1024)};
    });

    criterion(9, "reruns give byte-identical tables", 600, [] {
        const fs::path dir = fs::temp_directory_path() / "stoplab_acceptance_rerun";
        fs::remove_all(dir);
        const std::vector<std::pair<std::string, std::string>> runs{
            {"price", "--n 64,256"},
            {"oracle-check", "--set oracle_models=10"},
            {"converge-values", "--n 64,128,256"},
            {"converge-times", "--n 64,128 --set n_paths=200"},
            {"coupling", "--n 64,256 --set n_paths=10"},
            {"diagnose", "--n 16,64 --set n_paths=500 --set filtration_paths=20"},
        };
        int compared = 0;
        for (const auto& [cmd, args] : runs) {
            for (const char* tag : {"a", "b"}) {
                const std::string line = std::string(STOPLAB_CLI_PATH) + " " + cmd + " " + args + " --seed 3 --out " +
                                         (dir / cmd / tag).string() + " > /dev/null";
                if (std::system(line.c_str()) != 0) return Outcome{false, cmd + " exited with an error"};
            }
            for (const auto& entry : fs::directory_iterator(dir / cmd / "a")) {
                if (entry.path().extension() != ".csv") continue;
                if (slurp(entry.path()) != slurp(dir / cmd / "b" / entry.path().filename()))
                    return Outcome{false, cmd + ": " + entry.path().filename().string() + " differs"};
                ++compared;
            }
        }
        fs::remove_all(dir);
        return Outcome{compared >= 6, std::to_string(compared) + " CSV files identical across 6 commands"};
    });

    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
