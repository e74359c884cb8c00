#include "nuqd/wavefunction.hpp"

#include <algorithm>
#include <cmath>

#include "nuqd/errors.hpp"

namespace nuqd {

void PhysicalParams::validate() const {
    if (!(n_particles > 0.0)) throw ConfigError("n_particles must be > 0");
    if (!(mass > 0.0)) throw ConfigError("mass must be > 0");
    if (!(hbar > 0.0)) throw ConfigError("hbar must be > 0");
}

WaveFunction::WaveFunction(Grid grid, std::vector<cplx> amplitudes)
    : grid_(grid), amps_(std::move(amplitudes)) {
    if (amps_.size() != grid_.n_points()) {
        throw ConfigError("amplitude count does not match grid size");
    }
}

double WaveFunction::norm_squared() const {
    double s = 0.0;
    for (const cplx& a : amps_) s += std::norm(a);
    return s * grid_.spacing();
}

double WaveFunction::norm() const { return std::sqrt(norm_squared()); }

void WaveFunction::scale(cplx factor) {
    for (cplx& a : amps_) a *= factor;
}

WaveFunction uniform_state(const Grid& grid) {
    const double amp = 1.0 / std::sqrt(grid.extent());
    return WaveFunction(grid, std::vector<cplx>(grid.n_points(), cplx(amp, 0.0)));
}

WaveFunction gaussian_packet(const Grid& grid, double center, double width,
                             double momentum, double hbar) {
    if (!(width >= grid.spacing())) {
        throw ConfigError("gaussian packet width " + std::to_string(width) +
                          " is below the lattice spacing " + std::to_string(grid.spacing()));
    }
    const double lo = grid.origin();
    const double hi = grid.origin() + grid.extent();
    if (!(center >= lo && center < hi)) {
        throw ConfigError("gaussian packet center outside the grid extent");
    }
    std::vector<cplx> amps(grid.n_points());
    const double inv4w2 = 1.0 / (4.0 * width * width);
    for (std::size_t j = 0; j < grid.n_points(); ++j) {
        const double x = grid.position(j);
        const double d = grid.min_image(x - center);
        const double mag = std::exp(-d * d * inv4w2);
        const double phase = momentum * x / hbar;
        amps[j] = mag * cplx(std::cos(phase), std::sin(phase));
    }
    WaveFunction psi(grid, std::move(amps));
    psi.scale(1.0 / psi.norm());
    return psi;
}

WaveFunction superpose(const std::vector<std::pair<cplx, WaveFunction>>& components) {
    if (components.empty()) throw ConfigError("superpose needs at least one component");
    const Grid& g = components.front().second.grid();
    std::vector<cplx> amps(g.n_points(), cplx(0.0, 0.0));
    for (const auto& [coeff, packet] : components) {
        if (!(packet.grid() == g)) throw ConfigError("superpose components use different grids");
        for (std::size_t j = 0; j < amps.size(); ++j) amps[j] += coeff * packet[j];
    }
    WaveFunction out(g, std::move(amps));
    if (!(out.norm_squared() > 0.0)) {
        throw ConfigError("superposition cancels to the zero state");
    }
    return out;
}

namespace {
double checked_norm_squared(const WaveFunction& psi) {
    const double n2 = psi.norm_squared();
    if (!(n2 > 0.0) || !std::isfinite(n2)) {
        throw RunError("observable requested on a zero-norm state");
    }
    return n2;
}
} // namespace

double expectation(const WaveFunction& psi, std::span<const double> observable) {
    if (observable.size() != psi.size()) {
        throw ConfigError("observable length does not match grid size");
    }
    const double n2 = checked_norm_squared(psi);
    double acc = 0.0;
    for (std::size_t j = 0; j < psi.size(); ++j) acc += observable[j] * std::norm(psi[j]);
    return acc * psi.grid().spacing() / n2;
}

double position_mean(const WaveFunction& psi) {
    const double n2 = checked_norm_squared(psi);
    const Grid& g = psi.grid();
    double acc = 0.0;
    for (std::size_t j = 0; j < psi.size(); ++j) acc += g.position(j) * std::norm(psi[j]);
    return acc * g.spacing() / n2;
}

double spread(const WaveFunction& psi) {
    const double n2 = checked_norm_squared(psi);
    const Grid& g = psi.grid();
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t j = 0; j < psi.size(); ++j) {
        const double w = std::norm(psi[j]);
        const double x = g.position(j);
        m1 += x * w;
        m2 += x * x * w;
    }
    m1 *= g.spacing() / n2;
    m2 *= g.spacing() / n2;
    const double var = m2 - m1 * m1;
    return var > 0.0 ? std::sqrt(var) : 0.0;
}

std::vector<double> region_weights(const WaveFunction& psi,
                                   std::span<const double> boundaries) {
    const Grid& g = psi.grid();
    const double lo = g.origin();
    const double hi = g.origin() + g.extent();
    for (std::size_t i = 0; i < boundaries.size(); ++i) {
        if (!(boundaries[i] > lo && boundaries[i] < hi)) {
            throw ConfigError("region boundary outside the grid extent");
        }
        if (i > 0 && !(boundaries[i] > boundaries[i - 1])) {
            throw ConfigError("region boundaries must be strictly increasing");
        }
    }
    const double n2 = checked_norm_squared(psi);
    std::vector<double> weights(boundaries.size() + 1, 0.0);
    for (std::size_t j = 0; j < psi.size(); ++j) {
        const double x = g.position(j);
        const auto region = static_cast<std::size_t>(
            std::upper_bound(boundaries.begin(), boundaries.end(), x) - boundaries.begin());
        weights[region] += std::norm(psi[j]);
    }
    const double scale = g.spacing() / n2;
    for (double& w : weights) w *= scale;
    return weights;
}

} // namespace nuqd
