#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace stoplab {

/// Strictly increasing times on [0, T] starting at 0 and ending at T.
class TimeGrid {
public:
    /// Throws DomainError unless points[0] == 0, points strictly increase and
    /// the last point is > 0 (it becomes the horizon).
    explicit TimeGrid(std::vector<double> points);

    /// intervals + 1 equally spaced points, the last one exactly `horizon`.
    static TimeGrid uniform(double horizon, std::size_t intervals);

    double horizon() const noexcept { return points_.back(); }
    std::size_t size() const noexcept { return points_.size(); }
    std::span<const double> points() const noexcept { return points_; }
    double operator[](std::size_t i) const noexcept { return points_[i]; }

    /// Largest consecutive gap.
    double mesh() const noexcept;

    /// Index of the largest grid point <= t. Requires 0 <= t <= horizon.
    std::size_t index_at(double t) const;

    friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

private:
    std::vector<double> points_;
};

/// Piecewise-constant right-continuous path: the value at t is the value at the
/// largest grid point <= t.
class CadlagPath {
public:
    CadlagPath(TimeGrid grid, std::vector<double> values);

    /// Constant path on the two-point grid {0, horizon}.
    static CadlagPath constant(double horizon, double value);

    const TimeGrid& grid() const noexcept { return grid_; }
    std::span<const double> values() const noexcept { return values_; }
    double horizon() const noexcept { return grid_.horizon(); }
    std::size_t size() const noexcept { return values_.size(); }

    /// Throws DomainError when t is outside [0, T].
    double evaluate(double t) const;

    friend bool operator==(const CadlagPath&, const CadlagPath&) = default;

private:
    TimeGrid grid_;
    std::vector<double> values_;
};

inline double evaluate(const CadlagPath& path, double t) { return path.evaluate(t); }

/// Discretization on a subdivision: value path(t_i) held on [t_i, t_{i+1}); at
/// the horizon the value from the last subdivision point strictly before T is
/// kept, so the result ignores path(T).
CadlagPath discretize(const CadlagPath& path, const TimeGrid& subdivision);

/// Restriction of a path to [0, horizon] for horizon <= path.horizon().
CadlagPath restrict_to(const CadlagPath& path, double horizon);

/// Exact sup_t |x(t) - y(t)| over the merged grid.
double sup_distance(const CadlagPath& x, const CadlagPath& y);

/// Upper approximation of the Skorokhod J1 distance.
///
/// Time changes are continuous piecewise-linear increasing maps with
/// lambda(0) = 0, lambda(T) = T, knots at i*T/m where m is the smallest power
/// of two >= resolution, knot values on a grid four times finer, and slopes in
/// [1/4, 4]. The families are nested in m and contain the identity, so the
/// result is never above sup_distance and never increases with resolution. The
/// minimum is taken over both x(lambda(t)) - y(t) and y(lambda(t)) - x(t), which
/// makes the value symmetric. Sub-intervals shorter than 1e-9*T are ignored.
double skorokhod_j1_distance(const CadlagPath& x, const CadlagPath& y, int resolution);

/// CSV with header `t,x`, one row per grid point.
void write_path_csv(std::ostream& out, const CadlagPath& path);
CadlagPath read_path_csv(std::istream& in);

/// Full-precision decimal form used by every CSV writer in the project.
std::string format_number(double value);

}  // namespace stoplab
