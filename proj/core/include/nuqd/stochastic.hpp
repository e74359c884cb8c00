#pragma once

#include <cstdint>

#include "nuqd/grid.hpp"
#include "nuqd/wavefunction.hpp"

namespace nuqd {

namespace rng {

/// Philox4x32-10 counter-based generator. The output is a pure function of
/// (key, counter, salt), so any draw in any stream can be reproduced from its
/// indices alone, independent of execution order or thread count.
std::uint64_t philox(std::uint64_t key, std::uint64_t counter, std::uint64_t salt = 0);

/// Uniform double in [0, 1) from the top 53 bits of philox().
double uniform01(std::uint64_t key, std::uint64_t counter, std::uint64_t salt = 0);

// Salt values separating the independent streams drawn from one seed.
inline constexpr std::uint64_t stream_x0 = 1;
inline constexpr std::uint64_t stream_trial_seed = 2;
inline constexpr std::uint64_t stream_oracle = 3;
inline constexpr std::uint64_t stream_tilt_base = 1ull << 32;

} // namespace rng

enum class NoiseKind {
    fixed,       // constant localization center
    white_noise, // fresh uniform draw over the grid extent every dwell window
    norm_tilted  // white noise reweighted by the per-step norm ratio (see evolution)
};

/// Descriptor for the localization-center process X0(t). Immutable; sampling
/// is a pure function of (seed, step_index), safe for concurrent use.
struct X0Source {
    NoiseKind kind = NoiseKind::fixed;
    double value = 0.0;          // fixed mode
    std::uint64_t seed = 0;
    std::uint32_t dwell_steps = 1; // steps a drawn value is held for

    void validate() const;
};

/// X0 for the given step. white_noise draws land on lattice sites, uniformly
/// over all n of them, held for dwell_steps consecutive steps. norm_tilted
/// cannot be sampled without the state; the evolution engine owns that path.
double next_x0(const X0Source& source, const Grid& grid, std::uint64_t step_index);

enum class CouplingMode { omega, gamma, gravity };

/// The three physically distinct couplings that all reduce to one quadratic
/// coefficient kappa in the evolution: a trap frequency, a per-particle
/// environmental coupling, or a gravitational self-coupling.
struct CouplingSpec {
    CouplingMode mode = CouplingMode::omega;
    double omega = 0.0;    // trap frequency
    double gamma = 0.0;    // energy/length^2 per particle
    double g_newton = 0.0; // gravitational constant
    double density = 0.0;  // mass density

    void validate(const PhysicalParams& params) const;
};

/// kappa [energy/length^2]:
///   omega   -> N*m*Omega^2 / 2
///   gamma   -> N*gamma
///   gravity -> N*m*G*rho / 2
double coupling_from(const CouplingSpec& spec, const PhysicalParams& params);

} // namespace nuqd
