#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nuqd/evolution.hpp"
#include "nuqd/grid.hpp"
#include "nuqd/stochastic.hpp"

namespace nuqd {

/// Least-squares fit of log(y) = exponent * log(x) + log_prefactor.
struct FitResult {
    double exponent = 0.0;
    double log_prefactor = 0.0;
    double rms_residual = 0.0; // RMS of log-space residuals
};

FitResult power_law_fit(std::span<const double> xs, std::span<const double> ys);

/// Shared knobs for the time-scale measurements. dt, t_max and the recording
/// stride are derived from the stability bound and the analytic estimate of
/// the measured time unless set explicitly (0 = derive).
struct MeasurementSetup {
    Grid grid{1024, 1.0, -512.0};
    PhysicalParams params{};
    CouplingSpec coupling{CouplingMode::omega, 0.1, 0.0, 0.0, 0.0};
    bool kinetic_enabled = true;
    double x0 = 0.0;           // localization center
    double distance = 10.0;    // relocation: packet starts at x0 + distance
    double packet_width = 0.0; // 0 = the trap's equilibrium width
    double tail_floor = 1e-14;
    double dt = 0.0;
    double t_max = 0.0;
    std::size_t record_every = 0;
    double t_max_factor = 8.0; // auto time budget as a multiple of the estimate
    std::size_t target_records = 400;
    NoiseKind noise = NoiseKind::fixed;
    std::uint64_t seed = 1;
    std::uint32_t dwell_steps = 1;
    int threads = 0;

    double kappa() const { return coupling_from(coupling, params); }
    /// Trap frequency equivalent to kappa: sqrt(2 kappa / (N m)).
    double effective_omega() const;
    /// Stationary width of the quadratic suppression balanced against
    /// dispersion: sigma^2 = hbar / (sqrt(2) M Omega).
    double equilibrium_width() const;
};

struct TimedRun {
    double time = 0.0;
    Trajectory trajectory;
};

/// First recorded time at which a delocalised state has shrunk to one lattice
/// spacing. Throws TimeBudgetExceeded (carrying the final spread) past t_max.
double localization_time(const MeasurementSetup& setup);
TimedRun localization_run(const MeasurementSetup& setup);

/// First recorded time at which a packet started at x0 + distance has its
/// position mean within one lattice spacing of x0. Fixed-x0 mode.
double relocation_time(const MeasurementSetup& setup);
TimedRun relocation_run(const MeasurementSetup& setup);

enum class SweepMeasure { loc, reloc };

struct ScalingResult {
    std::string swept_parameter;
    std::vector<double> values;
    std::vector<double> measured_times;
    double fitted_exponent = 0.0;
    double fit_residual = 0.0;
};

/// Measure loc or reloc times over >= 4 increasing positive values of
/// "omega", "n_particles" or "distance", and fit the scaling exponent.
/// Points run in parallel.
ScalingResult scaling_sweep(const MeasurementSetup& base, const std::string& parameter,
                            std::span<const double> values, SweepMeasure measure);

/// t_loc and t_reloc over an (N, Omega) grid; row-major [n_index][omega_index].
struct LimitsTable {
    std::vector<double> n_values;
    std::vector<double> omega_values;
    std::vector<double> t_loc;
    std::vector<double> t_reloc;

    double loc(std::size_t i_n, std::size_t i_omega) const {
        return t_loc[i_n * omega_values.size() + i_omega];
    }
    double reloc(std::size_t i_n, std::size_t i_omega) const {
        return t_reloc[i_n * omega_values.size() + i_omega];
    }
};

LimitsTable limits_table(const MeasurementSetup& base, std::span<const double> n_values,
                         std::span<const double> omega_values);

/// One stochastic collapse run of a two-packet superposition.
struct TrialOutcome {
    int selected_component = -1; // 0 = the alpha^2 packet, 1 = the other
    double collapse_time = 0.0;
    std::uint64_t seed = 0;
    double log_norm = 0.0; // accumulated log norm at stop
    bool collapsed = false;
};

struct TrialSetup {
    Grid grid{1024, 1.0, -512.0};
    PhysicalParams params{100.0, 1.0, 1.0};
    CouplingSpec coupling{CouplingMode::gamma, 0.0, 1e-6, 0.0, 0.0};
    NoiseKind noise = NoiseKind::norm_tilted;
    std::uint32_t dwell_steps = 1;
    double packet_width = 4.0;
    double packet_separation = 80.0; // born_ensemble places packets center -+ sep/2
    double collapse_threshold = 1e-3; // collapsed when a region weight >= 1 - this
    double t_max = 800.0;
    double dt = 0.0; // 0 = stability bound
    std::size_t record_every = 16;
    bool kinetic_enabled = true;
    int threads = 0;
};

/// Evolve alpha |x1> + beta |x2> under the stochastic quadratic suppression
/// until one side of the midpoint holds all but collapse_threshold of the
/// weight, or t_max passes.
TrialOutcome collapse_trial(double alpha2, double x1, double x2, const TrialSetup& setup,
                            std::uint64_t seed);

struct BornResult {
    double frequency = 0.0; // fraction of collapsed trials selecting component 0
    double ci95 = 0.0;      // binomial 95% half-width
    std::size_t n_trials = 0;
    std::size_t n_collapsed = 0;
    double mean_collapse_time = 0.0;
    std::vector<TrialOutcome> outcomes;
};

/// n_trials (>= 100) collapse trials with per-trial seeds derived from
/// base_seed by counter. Throws if more than 1% fail to collapse.
BornResult born_ensemble(double alpha2, std::size_t n_trials, std::uint64_t base_seed,
                         const TrialSetup& setup);

struct OracleResult {
    double frequency = 0.0;
    std::size_t n_trials = 0;
    double mean_steps = 0.0;
};

/// Two-component ruin game played directly on the weights, with no wave
/// function: each step one component is picked and multiplied by (1 + gain),
/// then the pair is renormalized. The pick probability (1 + gain*w)/(2 + gain)
/// is the unique choice that keeps the weight a martingale, so the absorption
/// frequency reproduces the initial weight.
OracleResult gambler_oracle(double alpha2, std::size_t n_trials, double gain,
                            std::uint64_t seed, double threshold = 1e-6, int threads = 0);

} // namespace nuqd
