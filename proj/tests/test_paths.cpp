#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "stoplab/errors.hpp"
#include "stoplab/paths.hpp"
#include "stoplab/processes.hpp"

using namespace stoplab;

namespace {

CadlagPath step_at(double jump) { return CadlagPath(TimeGrid({0.0, jump, 1.0}), {0.0, 1.0, 1.0}); }

CadlagPath identity_samples(std::size_t points) {
    const TimeGrid grid = TimeGrid::uniform(1.0, points - 1);
    std::vector<double> v(grid.points().begin(), grid.points().end());
    return CadlagPath(grid, v);
}

// Random step path on a random grid over [0, 1].
CadlagPath random_path(std::mt19937_64& rng, int max_points) {
    std::uniform_int_distribution<int> count(1, max_points);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal;
    std::vector<double> t{0.0};
    const int interior = count(rng);
    for (int i = 0; i < interior; ++i) t.push_back(unit(rng));
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    t.erase(std::remove_if(t.begin() + 1, t.end(), [](double x) { return x <= 0.0 || x >= 1.0; }), t.end());
    t.push_back(1.0);
    std::vector<double> v;
    for (std::size_t i = 0; i < t.size(); ++i) v.push_back(std::round(normal(rng) * 4.0) / 4.0);
    return CadlagPath(TimeGrid(t), v);
}

}  // namespace

TEST_CASE("time grid validation") {
    CHECK_THROWS_AS(TimeGrid({0.0}), DomainError);
    CHECK_THROWS_AS(TimeGrid({0.1, 1.0}), DomainError);
    CHECK_THROWS_AS(TimeGrid({0.0, 0.5, 0.5, 1.0}), DomainError);
    const TimeGrid g({0.0, 0.2, 0.7, 1.0});
    CHECK(g.horizon() == 1.0);
    CHECK(g.mesh() == doctest::Approx(0.5));
    CHECK(g.index_at(0.2) == 1);
    CHECK(g.index_at(0.69) == 1);
    CHECK(g.index_at(1.0) == 3);
    CHECK_THROWS_AS(g.index_at(-0.01), DomainError);
    CHECK_THROWS_AS(g.index_at(1.01), DomainError);

    const TimeGrid u = TimeGrid::uniform(2.0, 8);
    CHECK(u.size() == 9);
    CHECK(u.points().back() == 2.0);
}

TEST_CASE("evaluate") {
    const CadlagPath c = CadlagPath::constant(1.0, 3.0);
    for (double t : {0.0, 0.3, 1.0}) CHECK(evaluate(c, t) == 3.0);

    const CadlagPath p(TimeGrid({0.0, 0.5, 1.0}), {1.0, 2.0, 2.0});
    CHECK(evaluate(p, 0.49) == 1.0);
    CHECK(evaluate(p, 0.5) == 2.0);
    CHECK_THROWS_AS(evaluate(p, 1.5), DomainError);
    CHECK_THROWS_AS(CadlagPath(TimeGrid({0.0, 1.0}), {1.0}), DomainError);
}

TEST_CASE("discretize examples") {
    const CadlagPath c = CadlagPath::constant(1.0, 2.5);
    const TimeGrid sub = TimeGrid::uniform(1.0, 7);
    const CadlagPath dc = discretize(c, sub);
    for (double v : dc.values()) CHECK(v == 2.5);

    const CadlagPath id = identity_samples(1001);
    const CadlagPath d = discretize(id, TimeGrid({0.0, 0.5, 1.0}));
    CHECK(d.grid() == TimeGrid({0.0, 0.5, 1.0}));
    CHECK(evaluate(d, 0.0) == 0.0);
    CHECK(evaluate(d, 0.4999) == 0.0);
    CHECK(evaluate(d, 0.5) == 0.5);
    CHECK(evaluate(d, 1.0) == 0.5);

    CHECK_THROWS_AS(discretize(id, TimeGrid::uniform(2.0, 4)), DomainError);
}

TEST_CASE("discretize error shrinks with the mesh") {
    const std::vector<std::size_t> intervals{8, 16, 32, 64, 128, 256};
    std::vector<double> medians;
    for (std::size_t m : intervals) {
        std::vector<double> d;
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            const CadlagPath w = sample_brownian(1.0, (1U << 14) + 1, seed);
            d.push_back(sup_distance(discretize(w, TimeGrid::uniform(1.0, m)), w));
        }
        std::nth_element(d.begin(), d.begin() + 25, d.end());
        medians.push_back(d[25]);
    }
    for (std::size_t i = 1; i < medians.size(); ++i) CHECK(medians[i] < medians[i - 1]);
}

TEST_CASE("discretize properties") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const CadlagPath p = random_path(rng, 40);
        const CadlagPath sub_path = random_path(rng, 10);
        const TimeGrid& sub = sub_path.grid();
        const CadlagPath once = discretize(p, sub);
        CHECK(discretize(once, sub) == once);

        // Value at t is p(t_i) for t_i <= t < t_{i+1}; at T the value from the last point before T.
        const auto pts = sub.points();
        for (int i = 0; i <= 200; ++i) {
            const double t = i / 200.0;
            std::size_t k = 0;
            while (k + 1 < pts.size() && pts[k + 1] <= t) ++k;
            if (k + 1 == pts.size()) --k;
            CHECK(evaluate(once, t) == evaluate(p, pts[k]));
        }
    }
}

TEST_CASE("restrict_to") {
    const CadlagPath p(TimeGrid({0.0, 0.3, 0.6, 1.0}), {1.0, 2.0, 3.0, 4.0});
    const CadlagPath r = restrict_to(p, 0.5);
    CHECK(r.horizon() == 0.5);
    CHECK(evaluate(r, 0.5) == 2.0);
    CHECK(evaluate(r, 0.29) == 1.0);
    CHECK(restrict_to(p, 1.0) == p);
    CHECK_THROWS_AS(restrict_to(p, 1.5), DomainError);
}

TEST_CASE("sup distance examples") {
    const CadlagPath a = step_at(0.5);
    CHECK(sup_distance(a, a) == 0.0);
    CHECK(sup_distance(CadlagPath::constant(1.0, 0.0), CadlagPath::constant(1.0, -2.0)) == 2.0);
    CHECK(sup_distance(step_at(0.5), step_at(0.6)) == 1.0);
    CHECK_THROWS_AS(sup_distance(a, CadlagPath::constant(2.0, 0.0)), DomainError);
}

TEST_CASE("J1 examples") {
    const CadlagPath a = step_at(0.5);
    CHECK(skorokhod_j1_distance(a, a, 16) == 0.0);

    const double delta = 0.05;
    const int resolution = 64;
    const double j1 = skorokhod_j1_distance(step_at(0.5), step_at(0.5 + delta), resolution);
    CHECK(j1 >= delta - 1e-12);
    CHECK(j1 <= delta + 1.0 / resolution);
    CHECK(j1 < sup_distance(step_at(0.5), step_at(0.5 + delta)));

    CHECK(skorokhod_j1_distance(CadlagPath::constant(1.0, 0.0), CadlagPath::constant(1.0, 1.5), 64) == 1.5);
    CHECK_THROWS_AS(skorokhod_j1_distance(a, CadlagPath::constant(2.0, 0.0), 8), DomainError);
    CHECK_THROWS_AS(skorokhod_j1_distance(a, a, 0), DomainError);
}

TEST_CASE("J1 on a sampled path against its shifted copy") {
    // y(t) = x(t - s) for a step path: a time shift of s is always available.
    const CadlagPath x(TimeGrid({0.0, 0.25, 0.5, 0.75, 1.0}), {0.0, 1.0, -1.0, 2.0, 2.0});
    const CadlagPath y(TimeGrid({0.0, 0.3125, 0.5625, 0.8125, 1.0}), {0.0, 1.0, -1.0, 2.0, 2.0});
    const double j1 = skorokhod_j1_distance(x, y, 32);
    CHECK(j1 <= 0.0625 + 1.0 / 32);
    CHECK(j1 < 1.0);
}

TEST_CASE("J1 properties on random step paths") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 150; ++trial) {
        const CadlagPath x = random_path(rng, 12);
        const CadlagPath y = trial % 5 == 0 ? x : random_path(rng, 12);
        const double sup = sup_distance(x, y);
        double previous = INFINITY;
        for (int r : {1, 2, 3, 8, 16, 32}) {
            const double j1 = skorokhod_j1_distance(x, y, r);
            CHECK(j1 >= 0.0);
            CHECK(j1 <= sup);
            CHECK(j1 <= previous);
            CHECK(std::abs(j1 - skorokhod_j1_distance(y, x, r)) <= 1e-12);
            CHECK(j1 == skorokhod_j1_distance(x, y, r));
            CHECK((j1 == 0.0) == (sup == 0.0));
            previous = j1;
        }
        CHECK(std::abs(sup - sup_distance(y, x)) <= 1e-12);
    }
}

TEST_CASE("path csv round trip") {
    const CadlagPath p(TimeGrid({0.0, 0.1, 0.7, 1.0}), {0.1, -3.25, 1e-17, 2.0 / 3.0});
    std::stringstream s;
    write_path_csv(s, p);
    CHECK(s.str().rfind("t,x\n", 0) == 0);
    CHECK(read_path_csv(s) == p);

    std::stringstream bad("t,x\n0,1\nfoo,2\n");
    CHECK_THROWS_AS(read_path_csv(bad), DomainError);
}
