#pragma once

#include <cstddef>
#include <vector>

namespace nuqd {

/// Uniform 1-D periodic lattice. n_points must be a power of two (>= 8) so
/// the kinetic step can run through a radix-friendly spectral transform.
class Grid {
public:
    Grid(std::size_t n_points, double spacing, double origin);

    std::size_t n_points() const { return n_; }
    double spacing() const { return spacing_; }
    double origin() const { return origin_; }
    double extent() const { return static_cast<double>(n_) * spacing_; }

    double position(std::size_t j) const { return origin_ + static_cast<double>(j) * spacing_; }
    std::vector<double> positions() const;

    /// Signed displacement x - x0 folded into [-extent/2, extent/2).
    double min_image(double dx) const;

    /// Index of the lattice site nearest to x (periodic wrap).
    std::size_t nearest_index(double x) const;

    bool operator==(const Grid& other) const {
        return n_ == other.n_ && spacing_ == other.spacing_ && origin_ == other.origin_;
    }

private:
    std::size_t n_;
    double spacing_;
    double origin_;
};

Grid make_grid(std::size_t n_points, double spacing, double origin);

} // namespace nuqd
