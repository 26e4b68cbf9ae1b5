#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <vector>

#include "stoplab/errors.hpp"
#include "stoplab/paths.hpp"

namespace stoplab {

namespace {

constexpr int kValueGridPerKnot = 4;  // knot values live on a grid 4x finer than the knots
constexpr int kMaxStep = 16;          // slope <= kMaxStep / kValueGridPerKnot = 4
constexpr int kMinStep = 1;           // slope >= 1/4
constexpr double kIgnoredLength = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Sparse table answering min/max over an inclusive index range in O(1).
class RangeMinMax {
public:
    explicit RangeMinMax(std::span<const double> v) : n_(v.size()) {
        const int levels = std::bit_width(n_);
        mins_.resize(static_cast<std::size_t>(levels));
        maxs_.resize(static_cast<std::size_t>(levels));
        mins_[0].assign(v.begin(), v.end());
        maxs_[0].assign(v.begin(), v.end());
        for (int l = 1; l < levels; ++l) {
            const std::size_t half = std::size_t{1} << (l - 1);
            const std::size_t len = n_ - (std::size_t{1} << l) + 1;
            auto& mn = mins_[static_cast<std::size_t>(l)];
            auto& mx = maxs_[static_cast<std::size_t>(l)];
            const auto& pmn = mins_[static_cast<std::size_t>(l - 1)];
            const auto& pmx = maxs_[static_cast<std::size_t>(l - 1)];
            mn.resize(len);
            mx.resize(len);
            for (std::size_t i = 0; i < len; ++i) {
                mn[i] = std::min(pmn[i], pmn[i + half]);
                mx[i] = std::max(pmx[i], pmx[i + half]);
            }
        }
    }

    // Largest |c - v[i]| for lo <= i <= hi.
    double max_abs_diff(double c, std::size_t lo, std::size_t hi) const {
        const auto l = static_cast<std::size_t>(std::bit_width(hi - lo + 1) - 1);
        const std::size_t hi_start = hi + 1 - (std::size_t{1} << l);
        const double mn = std::min(mins_[l][lo], mins_[l][hi_start]);
        const double mx = std::max(maxs_[l][lo], maxs_[l][hi_start]);
        return std::max(c - mn, mx - c);
    }

private:
    std::size_t n_;
    std::vector<std::vector<double>> mins_;
    std::vector<std::vector<double>> maxs_;
};

struct IndexedPath {
    std::span<const double> t;
    std::span<const double> v;
    RangeMinMax table;
    double scale;  // (points - 1) / horizon, for the interpolation guess

    explicit IndexedPath(const CadlagPath& p)
        : t(p.grid().points()),
          v(p.values()),
          table(p.values()),
          scale(static_cast<double>(p.size() - 1) / p.horizon()) {}

    // Index of the largest grid point <= s, clamped to the grid.
    std::size_t at(double s) const {
        return locate(s, [](double a, double b) { return a < b; });
    }
    // Index of the largest grid point < s (s > 0).
    std::size_t before(double s) const {
        return locate(s, [](double a, double b) { return a <= b; });
    }

private:
    // First index whose point is "after" s, minus one; checked around a guess
    // from uniform spacing before falling back to binary search.
    template <class After>
    std::size_t locate(double s, After after) const {
        const std::size_t n = t.size();
        const double g = s * scale;
        if (g >= 0.0 && g < static_cast<double>(n)) {
            const auto guess = static_cast<std::size_t>(g);
            const std::size_t lo = guess >= 2 ? guess - 2 : 0;
            const std::size_t hi = std::min(n, guess + 3);
            if (!after(s, t[lo]) && (hi == n || after(s, t[hi]))) {
                std::size_t k = lo;
                while (k + 1 < hi && !after(s, t[k + 1])) ++k;
                return k;
            }
        }
        auto it = std::partition_point(t.begin(), t.end(), [&](double x) { return !after(s, x); });
        if (it == t.begin()) return 0;
        return static_cast<std::size_t>(it - t.begin()) - 1;
    }
};

// Minimum over one nested family of time changes of
// max(sup|lambda - id|, sup|src(lambda(t)) - dst(t)|), searched only below `bound`.
class OneSidedSearch {
public:
    OneSidedSearch(const IndexedPath& src, const IndexedPath& dst, double horizon)
        : src_(src), dst_(dst), horizon_(horizon), eps_(kIgnoredLength * horizon) {}

    double run(int knots, double bound) const {
        const int values = kValueGridPerKnot * knots;
        const double unit = horizon_ / values;
        std::vector<double> cur(static_cast<std::size_t>(values) + 1, kInf);
        std::vector<double> next(cur.size(), kInf);
        cur[0] = 0.0;
        for (int i = 0; i < knots; ++i) {
            std::fill(next.begin(), next.end(), kInf);
            const double s0 = knot_time(i, knots);
            const double s1 = knot_time(i + 1, knots);
            const int remaining = knots - (i + 1);
            const int band = static_cast<int>(std::ceil(bound / unit));
            const int center = kValueGridPerKnot * i;
            const int jlo = std::max(0, center - band);
            const int jhi = std::min(values, center + band);
            for (int j = jlo; j <= jhi; ++j) {
                const double base_cost = cur[static_cast<std::size_t>(j)];
                if (!(base_cost < bound)) continue;
                const double a = j * unit;
                for (int step = kMinStep; step <= kMaxStep; ++step) {
                    const int j2 = j + step;
                    if (j2 > values) break;
                    const int left = values - j2;
                    if (left < remaining * kMinStep || left > remaining * kMaxStep) continue;
                    const double b = (j2 == values) ? horizon_ : j2 * unit;
                    const double lead = std::max(base_cost, std::abs(b - s1));
                    double& target = next[static_cast<std::size_t>(j2)];
                    const double limit = std::min(bound, target);
                    if (lead >= limit) continue;
                    const double cost = std::max(lead, segment_sup(s0, s1, a, b, limit));
                    if (cost < target) target = cost;
                }
            }
            std::swap(cur, next);
        }
        return std::min(bound, cur[static_cast<std::size_t>(values)]);
    }

private:
    double knot_time(int i, int knots) const {
        return i == knots ? horizon_ : horizon_ * static_cast<double>(i) / knots;
    }

    // sup over t in [s0, s1) of |src(lambda(t)) - dst(t)| with lambda linear from
    // a to b. Stops early once the running sup reaches `limit`.
    double segment_sup(double s0, double s1, double a, double b, double limit) const {
        const double slope = (b - a) / (s1 - s0);
        const std::size_t i0 = src_.at(a), i1 = src_.before(b);
        const std::size_t j0 = dst_.at(s0), j1 = dst_.before(s1);
        double sup = 0.0;
        if (i1 - i0 <= j1 - j0) {
            for (std::size_t k = i0; k <= i1; ++k) {
                const double u0 = std::max(src_.t[k], a);
                const double u1 = k + 1 < src_.t.size() ? std::min(src_.t[k + 1], b) : b;
                const double t0 = s0 + (u0 - a) / slope + eps_;
                const double t1 = (u1 == b ? s1 : s0 + (u1 - a) / slope) - eps_;
                if (!(t1 > t0)) continue;
                const std::size_t lo = dst_.at(t0), hi = dst_.before(t1);
                sup = std::max(sup, dst_.table.max_abs_diff(src_.v[k], lo, std::max(lo, hi)));
                if (sup >= limit) return sup;
            }
        } else {
            for (std::size_t k = j0; k <= j1; ++k) {
                const double t0 = std::max(dst_.t[k], s0) + eps_;
                const double t1 = (k + 1 < dst_.t.size() ? std::min(dst_.t[k + 1], s1) : s1) - eps_;
                if (!(t1 > t0)) continue;
                const double u0 = a + (t0 - s0) * slope;
                const double u1 = a + (t1 - s0) * slope;
                const std::size_t lo = src_.at(u0), hi = src_.before(u1);
                sup = std::max(sup, src_.table.max_abs_diff(dst_.v[k], lo, std::max(lo, hi)));
                if (sup >= limit) return sup;
            }
        }
        return sup;
    }

    const IndexedPath& src_;
    const IndexedPath& dst_;
    double horizon_;
    double eps_;
};

}  // namespace

double skorokhod_j1_distance(const CadlagPath& x, const CadlagPath& y, int resolution) {
    if (resolution < 1) throw DomainError("skorokhod_j1_distance: resolution must be >= 1");
    // sup_distance also validates the horizons; it is the identity time change.
    double bound = sup_distance(x, y);
    const double closing = std::abs(x.values().back() - y.values().back());
    if (bound == 0.0 || closing >= bound) return bound;

    const IndexedPath xi(x), yi(y);
    const OneSidedSearch forward(xi, yi, x.horizon());
    const OneSidedSearch backward(yi, xi, x.horizon());
    const int levels = std::bit_width(static_cast<unsigned>(resolution - 1));
    for (int level = 1; level <= levels; ++level) {
        const int knots = 1 << level;
        bound = std::min(bound, forward.run(knots, bound));
        bound = std::min(bound, backward.run(knots, bound));
        if (bound <= closing) break;
    }
    return std::max(bound, closing);
}

}  // namespace stoplab
