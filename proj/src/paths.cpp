#include "stoplab/paths.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "stoplab/errors.hpp"

namespace stoplab {

TimeGrid::TimeGrid(std::vector<double> points) : points_(std::move(points)) {
    if (points_.size() < 2) throw DomainError("time grid needs at least two points");
    if (points_.front() != 0.0) throw DomainError("time grid must start at 0");
    for (std::size_t i = 1; i < points_.size(); ++i) {
        if (!(points_[i] > points_[i - 1]))
            throw DomainError("time grid points must be strictly increasing (index " +
                              std::to_string(i) + ")");
    }
    if (!std::isfinite(points_.back())) throw DomainError("time grid horizon must be finite");
}

TimeGrid TimeGrid::uniform(double horizon, std::size_t intervals) {
    if (!(horizon > 0.0)) throw DomainError("horizon must be positive");
    if (intervals == 0) throw DomainError("uniform grid needs at least one interval");
    std::vector<double> pts(intervals + 1);
    for (std::size_t i = 0; i < intervals; ++i)
        pts[i] = horizon * static_cast<double>(i) / static_cast<double>(intervals);
    pts[intervals] = horizon;
    return TimeGrid(std::move(pts));
}

double TimeGrid::mesh() const noexcept {
    double m = 0.0;
    for (std::size_t i = 1; i < points_.size(); ++i) m = std::max(m, points_[i] - points_[i - 1]);
    return m;
}

std::size_t TimeGrid::index_at(double t) const {
    if (!(t >= 0.0 && t <= horizon()))
        throw DomainError("time " + format_number(t) + " outside [0, " + format_number(horizon()) +
                          "]");
    auto it = std::upper_bound(points_.begin(), points_.end(), t);
    return static_cast<std::size_t>(it - points_.begin()) - 1;
}

CadlagPath::CadlagPath(TimeGrid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_.size())
        throw DomainError("path has " + std::to_string(values_.size()) + " values for " +
                          std::to_string(grid_.size()) + " grid points");
}

CadlagPath CadlagPath::constant(double horizon, double value) {
    return CadlagPath(TimeGrid({0.0, horizon}), {value, value});
}

double CadlagPath::evaluate(double t) const { return values_[grid_.index_at(t)]; }

namespace {

void require_same_horizon(const CadlagPath& x, const CadlagPath& y, const char* op) {
    if (x.horizon() != y.horizon())
        throw DomainError(std::string(op) + ": horizons differ (" + format_number(x.horizon()) +
                          " vs " + format_number(y.horizon()) + ")");
}

}  // namespace

CadlagPath discretize(const CadlagPath& path, const TimeGrid& subdivision) {
    if (subdivision.horizon() != path.horizon())
        throw DomainError("discretize: subdivision horizon differs from path horizon");
    const std::size_t k = subdivision.size();
    std::vector<double> values(k);
    for (std::size_t i = 0; i + 1 < k; ++i) values[i] = path.evaluate(subdivision[i]);
    values[k - 1] = values[k - 2];
    return CadlagPath(subdivision, std::move(values));
}

CadlagPath restrict_to(const CadlagPath& path, double horizon) {
    if (!(horizon > 0.0 && horizon <= path.horizon()))
        throw DomainError("restrict_to: horizon outside (0, " + format_number(path.horizon()) +
                          "]");
    const auto pts = path.grid().points();
    const auto vals = path.values();
    const std::size_t last = path.grid().index_at(horizon);
    std::vector<double> new_pts(pts.begin(), pts.begin() + static_cast<std::ptrdiff_t>(last) + 1);
    std::vector<double> new_vals(vals.begin(), vals.begin() + static_cast<std::ptrdiff_t>(last) + 1);
    if (new_pts.back() < horizon) {
        new_pts.push_back(horizon);
        new_vals.push_back(vals[last]);
    }
    return CadlagPath(TimeGrid(std::move(new_pts)), std::move(new_vals));
}

double sup_distance(const CadlagPath& x, const CadlagPath& y) {
    require_same_horizon(x, y, "sup_distance");
    const auto xp = x.grid().points();
    const auto yp = y.grid().points();
    const auto xv = x.values();
    const auto yv = y.values();
    // Both grids start at 0: walk the merged grid keeping the active index of each path.
    std::size_t i = 0, j = 0;
    double best = std::abs(xv[0] - yv[0]);
    while (i + 1 < xp.size() || j + 1 < yp.size()) {
        const double next_x = i + 1 < xp.size() ? xp[i + 1] : INFINITY;
        const double next_y = j + 1 < yp.size() ? yp[j + 1] : INFINITY;
        const double t = std::min(next_x, next_y);
        if (next_x == t) ++i;
        if (next_y == t) ++j;
        best = std::max(best, std::abs(xv[i] - yv[j]));
    }
    return best;
}

std::string format_number(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

void write_path_csv(std::ostream& out, const CadlagPath& path) {
    out << "t,x\n";
    const auto pts = path.grid().points();
    const auto vals = path.values();
    for (std::size_t i = 0; i < pts.size(); ++i)
        out << format_number(pts[i]) << ',' << format_number(vals[i]) << '\n';
}

CadlagPath read_path_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw DomainError("path csv: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "t,x") throw DomainError("path csv: expected header 't,x', got '" + line + "'");
    std::vector<double> ts, xs;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw DomainError("path csv: row " + std::to_string(row) + " has no comma");
        try {
            std::size_t used = 0;
            ts.push_back(std::stod(line.substr(0, comma), &used));
            xs.push_back(std::stod(line.substr(comma + 1), &used));
        } catch (const std::logic_error&) {
            throw DomainError("path csv: row " + std::to_string(row) + " is not numeric");
        }
    }
    return CadlagPath(TimeGrid(std::move(ts)), std::move(xs));
}

}  // namespace stoplab
