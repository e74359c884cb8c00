#pragma once

#include <complex>
#include <span>
#include <vector>

#include "nuqd/grid.hpp"

namespace nuqd {

using cplx = std::complex<double>;

/// Bulk physical parameters of the collective coordinate. Total mass is
/// n_particles * mass; n_particles carries the large-N scaling.
struct PhysicalParams {
    double n_particles = 1.0;
    double mass = 1.0;
    double hbar = 1.0;

    double total_mass() const { return n_particles * mass; }
    void validate() const;
};

/// Complex amplitudes on a Grid. The norm is tracked, never assumed to be 1:
/// all observables divide by the instantaneous squared norm, so any nonzero
/// global rescaling of the amplitudes is physically equivalent.
class WaveFunction {
public:
    WaveFunction(Grid grid, std::vector<cplx> amplitudes);

    const Grid& grid() const { return grid_; }
    std::size_t size() const { return amps_.size(); }

    std::span<const cplx> amplitudes() const { return amps_; }
    std::span<cplx> amplitudes() { return amps_; }
    cplx& operator[](std::size_t j) { return amps_[j]; }
    const cplx& operator[](std::size_t j) const { return amps_[j]; }

    /// sum |psi_j|^2 * spacing  (Riemann-sum convention, grid-resolution stable)
    double norm_squared() const;
    double norm() const;

    void scale(cplx factor);

private:
    Grid grid_;
    std::vector<cplx> amps_;
};

/// Completely delocalised zero-momentum state: equal real positive amplitudes.
WaveFunction uniform_state(const Grid& grid);

/// Normalized packet exp(-(x-center)^2/(4 width^2)) * exp(i momentum x / hbar),
/// with the displacement (x-center) taken minimal-image on the periodic grid.
/// width must be at least one lattice spacing; center must lie in the grid extent.
WaveFunction gaussian_packet(const Grid& grid, double center, double width,
                             double momentum = 0.0, double hbar = 1.0);

/// Pointwise weighted sum of components sharing one grid. Not renormalized.
WaveFunction superpose(const std::vector<std::pair<cplx, WaveFunction>>& components);

/// <psi|O|psi> / <psi|psi> for an observable diagonal in position.
double expectation(const WaveFunction& psi, std::span<const double> observable);

/// Norm-relative position mean and standard deviation.
double position_mean(const WaveFunction& psi);
double spread(const WaveFunction& psi);

/// Relative probability weight of the segments cut by `boundaries`
/// (strictly increasing, inside the grid extent). k boundaries produce k+1
/// segments of [origin, origin+extent); an empty list yields {1.0}.
/// Weights sum to 1.
std::vector<double> region_weights(const WaveFunction& psi,
                                   std::span<const double> boundaries);

} // namespace nuqd
