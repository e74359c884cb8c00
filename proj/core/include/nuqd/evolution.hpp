#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "nuqd/grid.hpp"
#include "nuqd/stochastic.hpp"
#include "nuqd/wavefunction.hpp"

namespace nuqd {

enum class PotentialKind {
    none,                     // free evolution
    non_hermitian_fixed,      // decay exp(-kappa (x-x0)^2 dt / hbar), constant x0
    non_hermitian_stochastic, // same factor, x0 drawn from the noise source
    hermitian_fixed           // pure phase exp(-i kappa (x-x0)^2 dt / hbar)
};

struct PotentialMode {
    PotentialKind kind = PotentialKind::none;
    double kappa = 0.0; // quadratic coupling, energy/length^2
    double x0 = 0.0;    // used by the fixed kinds

    void validate() const;
};

struct EvolutionSpec {
    PhysicalParams params{};
    PotentialMode potential{};
    double dt = 0.0;
    bool kinetic_enabled = true;
    bool renormalize_each_step = true;

    /// Representability guard: a single potential application may not span
    /// more than this many natural-log units between the strongest and the
    /// weakest decay factor on the grid.
    double max_step_log_range = 700.0;

    /// Relative amplitude floor applied inside evolve(): grid points whose
    /// |psi| falls below tail_floor * max|psi| are zeroed each step, so
    /// transform roundoff cannot seed spurious far-field amplitude that the
    /// suppression term would then amplify. 0 disables the floor.
    double tail_floor = 1e-14;

    /// dt ceiling 0.1*hbar/(kappa*Lmax^2), Lmax = extent/2 being the largest
    /// minimal-image distance from any x0. Keeps per-step factors gentle so a
    /// fluctuating x0 can still revive suppressed regions.
    double stability_dt_bound(const Grid& grid) const;

    void validate(const Grid& grid) const;
};

/// Observable record along one run. log_norms accumulate the per-step norm
/// factors in log space relative to the initial state, so the series is
/// meaningful far past the range where the raw norm would underflow.
struct Trajectory {
    std::vector<double> times;
    std::vector<double> log_norms;
    std::vector<double> x_means;
    std::vector<double> spreads;
    std::vector<double> kinetic_energies;
    std::vector<double> region_boundaries;                 // empty if unused
    std::vector<std::vector<double>> region_weight_series; // one row per record
    bool stopped_early = false; // a stop predicate fired before t_final
    std::optional<WaveFunction> final_state; // filled when requested
};

/// One recorded observation, handed to stop predicates during evolve().
struct RecordPoint {
    double t;
    double log_norm;
    double x_mean;
    double spread;
    double kinetic_energy;
    const std::vector<double>& region_weights; // empty if no boundaries
};

/// exp(-i dt P^2 / (2 N m hbar)) applied exactly in the plane-wave basis.
WaveFunction kinetic_step(const WaveFunction& psi, double dt, const PhysicalParams& params);

/// Position-diagonal factor for one step: pure decay towards x0 for the
/// non-Hermitian kinds, pure phase for hermitian_fixed. Distances are
/// minimal-image. Throws RunError if the factor range exceeds max_log_range.
WaveFunction potential_step(const WaveFunction& psi, double dt, const PotentialMode& mode,
                            double x0, double hbar = 1.0, double max_log_range = 700.0);

/// One Strang step: half kinetic, full potential, half kinetic. Returns the
/// evolved state and the step's norm factor (new norm / old norm). With
/// renormalize_each_step the state is rescaled to unit norm before return.
std::pair<WaveFunction, double> step(const WaveFunction& psi, const EvolutionSpec& spec,
                                     double x0);

using StopPredicate = std::function<bool(const RecordPoint&)>;

struct EvolveOptions {
    double t_final = 0.0;
    std::size_t record_every = 1;
    std::vector<double> region_boundaries{};
    StopPredicate stop{}; // optional; checked at every record point
    bool capture_final_state = false;
};

/// Integrate for t_final (rounded down to whole steps), drawing x0 from the
/// source each step and recording observables every record_every steps
/// (including the initial state). Deterministic given spec, initial state and
/// source seed. Throws RunError if the state norm collapses to zero.
Trajectory evolve(const WaveFunction& psi0, const EvolutionSpec& spec,
                  const X0Source& source, const EvolveOptions& options);

} // namespace nuqd
