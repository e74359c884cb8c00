#include "nuqd/grid.hpp"

#include <cmath>

#include "nuqd/errors.hpp"

namespace nuqd {

namespace {
bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }
} // namespace

Grid::Grid(std::size_t n_points, double spacing, double origin)
    : n_(n_points), spacing_(spacing), origin_(origin) {
    if (n_points < 8 || !is_power_of_two(n_points)) {
        throw ConfigError("grid n_points must be a power of two >= 8, got " +
                          std::to_string(n_points));
    }
    if (!(spacing > 0.0) || !std::isfinite(spacing)) {
        throw ConfigError("grid spacing must be positive and finite");
    }
    if (!std::isfinite(origin)) {
        throw ConfigError("grid origin must be finite");
    }
}

std::vector<double> Grid::positions() const {
    std::vector<double> xs(n_);
    for (std::size_t j = 0; j < n_; ++j) xs[j] = position(j);
    return xs;
}

double Grid::min_image(double dx) const {
    const double L = extent();
    double d = std::remainder(dx, L); // in [-L/2, L/2]
    if (d == L / 2.0) d = -d;
    return d;
}

std::size_t Grid::nearest_index(double x) const {
    const double rel = (x - origin_) / spacing_;
    double r = std::round(rel);
    const auto n = static_cast<double>(n_);
    r = r - std::floor(r / n) * n; // wrap into [0, n)
    auto idx = static_cast<std::size_t>(r);
    return idx >= n_ ? 0 : idx;
}

Grid make_grid(std::size_t n_points, double spacing, double origin) {
    return Grid(n_points, spacing, origin);
}

} // namespace nuqd
