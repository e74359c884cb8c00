#include "nuqd/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "nuqd/errors.hpp"
#include "nuqd/parallel.hpp"

namespace nuqd {

FitResult power_law_fit(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size() || xs.size() < 2) {
        throw ConfigError("power_law_fit needs >= 2 matched samples");
    }
    const auto n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    std::vector<double> lx(xs.size()), ly(ys.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) {
            throw ConfigError("power_law_fit needs strictly positive samples");
        }
        lx[i] = std::log(xs[i]);
        ly[i] = std::log(ys[i]);
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (!(sxx > 0.0)) throw ConfigError("power_law_fit needs distinct x values");
    FitResult fit;
    fit.exponent = sxy / sxx;
    fit.log_prefactor = my - fit.exponent * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ly[i] - (fit.log_prefactor + fit.exponent * lx[i]);
        ss += r * r;
    }
    fit.rms_residual = std::sqrt(ss / n);
    return fit;
}

double MeasurementSetup::effective_omega() const {
    return std::sqrt(2.0 * kappa() / params.total_mass());
}

double MeasurementSetup::equilibrium_width() const {
    return std::sqrt(params.hbar /
                     (std::sqrt(2.0) * params.total_mass() * effective_omega()));
}

namespace {

struct DerivedRun {
    EvolutionSpec spec;
    X0Source source;
    double t_max;
    std::size_t record_every;
};

DerivedRun derive_run(const MeasurementSetup& setup, double t_estimate, bool force_fixed_x0) {
    const double kappa = setup.kappa();
    if (kappa <= 0.0) {
        throw ConfigError("time-scale measurements need kappa > 0");
    }
    DerivedRun run;
    run.spec.params = setup.params;
    run.spec.kinetic_enabled = setup.kinetic_enabled;
    run.spec.renormalize_each_step = true;

    const bool stochastic = !force_fixed_x0 && setup.noise != NoiseKind::fixed;
    run.spec.potential.kind = stochastic ? PotentialKind::non_hermitian_stochastic
                                         : PotentialKind::non_hermitian_fixed;
    run.spec.potential.kappa = kappa;
    run.spec.potential.x0 = setup.x0;
    run.spec.tail_floor = setup.tail_floor;

    run.spec.dt = setup.dt > 0.0 ? setup.dt : run.spec.stability_dt_bound(setup.grid);
    if (!(run.spec.dt > 0.0) || !std::isfinite(run.spec.dt)) {
        throw ConfigError("could not derive a finite dt; set one explicitly");
    }

    run.t_max = setup.t_max > 0.0 ? setup.t_max : setup.t_max_factor * t_estimate;
    run.t_max = std::max(run.t_max, 64.0 * run.spec.dt);

    if (setup.record_every > 0) {
        run.record_every = setup.record_every;
    } else {
        const double steps_est = std::max(1.0, t_estimate / run.spec.dt);
        run.record_every = std::max<std::size_t>(
            1, static_cast<std::size_t>(steps_est / static_cast<double>(setup.target_records)));
    }

    run.source.kind = stochastic ? setup.noise : NoiseKind::fixed;
    run.source.value = setup.x0;
    run.source.seed = setup.seed;
    run.source.dwell_steps = setup.dwell_steps;
    return run;
}

// Stationary shape of the suppression trap: a Gaussian with the complex width
// parameter sqrt(kappa M)(1 - i)/(2 hbar), i.e. the equilibrium width and its
// matching phase chirp. A packet launched in this shape follows the trap's
// linear center dynamics with no width transient.
WaveFunction stationary_packet(const MeasurementSetup& setup, double center) {
    const Grid& g = setup.grid;
    const double kappa = setup.kappa();
    const double hbar = setup.params.hbar;
    const double re = std::sqrt(kappa * setup.params.total_mass()) / (2.0 * hbar);
    std::vector<cplx> amps(g.n_points());
    for (std::size_t j = 0; j < g.n_points(); ++j) {
        const double u = g.min_image(g.position(j) - center);
        const double u2 = u * u;
        amps[j] = std::exp(cplx(-re * u2, re * u2));
    }
    WaveFunction psi(g, std::move(amps));
    psi.scale(1.0 / psi.norm());
    return psi;
}

} // namespace

TimedRun localization_run(const MeasurementSetup& setup) {
    const double kappa = setup.kappa();
    const double a = setup.grid.spacing();
    const double t_est = setup.params.hbar / (4.0 * kappa * a * a);
    const DerivedRun run = derive_run(setup, t_est, false);

    WaveFunction psi = uniform_state(setup.grid);
    EvolveOptions opts;
    opts.t_final = run.t_max;
    opts.record_every = run.record_every;
    double t_hit = -1.0;
    opts.stop = [&](const RecordPoint& p) {
        if (p.spread <= a) {
            t_hit = p.t;
            return true;
        }
        return false;
    };
    TimedRun out;
    out.trajectory = evolve(psi, run.spec, run.source, opts);
    if (!out.trajectory.stopped_early) {
        throw TimeBudgetExceeded("spread did not reach one lattice spacing by t_max = " +
                                     std::to_string(run.t_max) + "; final spread = " +
                                     std::to_string(out.trajectory.spreads.back()),
                                 out.trajectory.spreads.back());
    }
    out.time = t_hit;
    return out;
}

double localization_time(const MeasurementSetup& setup) { return localization_run(setup).time; }

TimedRun relocation_run(const MeasurementSetup& setup) {
    const double a = setup.grid.spacing();
    const double omega = setup.effective_omega();
    // Two transport mechanisms set the scale: the trap's damped center spiral
    // (rate Omega/sqrt(2)) and ballistic front propagation of a packet of
    // width sigma (speed ~ few hbar/(M sigma)). The estimate tracks both so
    // the recorder resolves the first crossing in either regime.
    const double sigma = setup.packet_width > 0.0 ? setup.packet_width
                                                  : setup.equilibrium_width();
    const double t_spiral = std::numbers::sqrt2 * 0.25 * std::numbers::pi / omega;
    const double t_front = setup.params.total_mass() * sigma * std::abs(setup.distance) /
                           (3.7 * setup.params.hbar);
    const double t_est = t_spiral + t_front;
    const DerivedRun run = derive_run(setup, std::max(t_est, 1.0), true);

    const double x_init = setup.x0 + setup.distance;
    WaveFunction psi = setup.packet_width > 0.0
                           ? gaussian_packet(setup.grid, x_init, setup.packet_width, 0.0,
                                             setup.params.hbar)
                           : stationary_packet(setup, x_init);
    EvolveOptions opts;
    opts.t_final = run.t_max;
    opts.record_every = run.record_every;
    double t_hit = -1.0;
    opts.stop = [&](const RecordPoint& p) {
        if (std::abs(p.x_mean - setup.x0) <= a) {
            t_hit = p.t;
            return true;
        }
        return false;
    };
    TimedRun out;
    out.trajectory = evolve(psi, run.spec, run.source, opts);
    if (!out.trajectory.stopped_early) {
        throw TimeBudgetExceeded(
            "position mean did not reach x0 by t_max = " + std::to_string(run.t_max) +
                "; final |<X>-x0| = " +
                std::to_string(std::abs(out.trajectory.x_means.back() - setup.x0)),
            std::abs(out.trajectory.x_means.back() - setup.x0));
    }
    out.time = t_hit;
    return out;
}

double relocation_time(const MeasurementSetup& setup) { return relocation_run(setup).time; }

namespace {

MeasurementSetup with_parameter(const MeasurementSetup& base, const std::string& parameter,
                                double value) {
    MeasurementSetup setup = base;
    if (parameter == "omega") {
        if (setup.coupling.mode != CouplingMode::omega) {
            throw ConfigError("sweeping omega requires the omega coupling mode");
        }
        setup.coupling.omega = value;
    } else if (parameter == "n_particles") {
        setup.params.n_particles = value;
    } else if (parameter == "distance") {
        setup.distance = value;
    } else {
        throw ConfigError("unknown sweep parameter '" + parameter +
                          "' (expected omega, n_particles or distance)");
    }
    return setup;
}

} // namespace

ScalingResult scaling_sweep(const MeasurementSetup& base, const std::string& parameter,
                            std::span<const double> values, SweepMeasure measure) {
    if (values.size() < 4) throw ConfigError("scaling_sweep needs >= 4 values");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] > 0.0)) throw ConfigError("sweep values must be positive");
        if (i > 0 && !(values[i] > values[i - 1])) {
            throw ConfigError("sweep values must be strictly increasing");
        }
    }
    if (parameter == "distance" && measure != SweepMeasure::reloc) {
        throw ConfigError("distance sweeps only apply to the relocation measure");
    }

    ScalingResult result;
    result.swept_parameter = parameter;
    result.values.assign(values.begin(), values.end());
    result.measured_times.assign(values.size(), 0.0);

    parallel_for(values.size(), base.threads, [&](std::size_t i) {
        const MeasurementSetup setup = with_parameter(base, parameter, values[i]);
        result.measured_times[i] = measure == SweepMeasure::loc ? localization_time(setup)
                                                                : relocation_time(setup);
    });

    const FitResult fit = power_law_fit(result.values, result.measured_times);
    result.fitted_exponent = fit.exponent;
    result.fit_residual = fit.rms_residual;
    return result;
}

LimitsTable limits_table(const MeasurementSetup& base, std::span<const double> n_values,
                         std::span<const double> omega_values) {
    if (n_values.size() < 3 || omega_values.size() < 3) {
        throw ConfigError("limits_table needs >= 3 values per axis");
    }
    if (base.coupling.mode != CouplingMode::omega) {
        throw ConfigError("limits_table requires the omega coupling mode");
    }
    LimitsTable table;
    table.n_values.assign(n_values.begin(), n_values.end());
    table.omega_values.assign(omega_values.begin(), omega_values.end());
    const std::size_t cells = n_values.size() * omega_values.size();
    table.t_loc.assign(cells, 0.0);
    table.t_reloc.assign(cells, 0.0);

    parallel_for(cells * 2, base.threads, [&](std::size_t job) {
        const std::size_t cell = job / 2;
        const bool reloc = (job % 2) == 1;
        const std::size_t i_n = cell / omega_values.size();
        const std::size_t i_o = cell % omega_values.size();
        MeasurementSetup setup = base;
        setup.params.n_particles = n_values[i_n];
        setup.coupling.omega = omega_values[i_o];
        if (reloc) {
            table.t_reloc[cell] = relocation_time(setup);
        } else {
            table.t_loc[cell] = localization_time(setup);
        }
    });
    return table;
}

TrialOutcome collapse_trial(double alpha2, double x1, double x2, const TrialSetup& setup,
                            std::uint64_t seed) {
    if (!(alpha2 > 0.0 && alpha2 < 1.0)) throw ConfigError("alpha2 must lie in (0, 1)");
    if (x1 == x2) throw ConfigError("collapse trial packets must sit at distinct positions");
    if (setup.noise == NoiseKind::fixed) {
        throw ConfigError("collapse trials need a stochastic X0 source");
    }

    const Grid& grid = setup.grid;
    const double kappa = coupling_from(setup.coupling, setup.params);

    WaveFunction packet1 = gaussian_packet(grid, x1, setup.packet_width, 0.0, setup.params.hbar);
    WaveFunction packet2 = gaussian_packet(grid, x2, setup.packet_width, 0.0, setup.params.hbar);
    WaveFunction psi = superpose({{cplx(std::sqrt(alpha2), 0.0), packet1},
                                  {cplx(std::sqrt(1.0 - alpha2), 0.0), packet2}});

    EvolutionSpec spec;
    spec.params = setup.params;
    spec.potential = {PotentialKind::non_hermitian_stochastic, kappa, 0.0};
    spec.kinetic_enabled = setup.kinetic_enabled;
    spec.renormalize_each_step = true;
    spec.dt = setup.dt > 0.0 ? setup.dt : spec.stability_dt_bound(grid);

    X0Source source{setup.noise, 0.0, seed, setup.dwell_steps};

    const double mid = 0.5 * (x1 + x2);
    const std::size_t comp0_region = x1 < x2 ? 0 : 1;

    EvolveOptions opts;
    opts.t_final = setup.t_max;
    opts.record_every = setup.record_every;
    opts.region_boundaries = {mid};
    const double win_level = 1.0 - setup.collapse_threshold;
    opts.stop = [&](const RecordPoint& p) {
        return p.region_weights[0] >= win_level || p.region_weights[1] >= win_level;
    };

    const Trajectory traj = evolve(psi, spec, source, opts);

    TrialOutcome outcome;
    outcome.seed = seed;
    outcome.log_norm = traj.log_norms.back();
    if (traj.stopped_early) {
        const auto& weights = traj.region_weight_series.back();
        const std::size_t winner_region = weights[0] >= weights[1] ? 0 : 1;
        outcome.selected_component = winner_region == comp0_region ? 0 : 1;
        outcome.collapse_time = traj.times.back();
        outcome.collapsed = true;
    } else {
        outcome.selected_component = -1;
        outcome.collapse_time = traj.times.back();
        outcome.collapsed = false;
    }
    return outcome;
}

BornResult born_ensemble(double alpha2, std::size_t n_trials, std::uint64_t base_seed,
                         const TrialSetup& setup) {
    if (n_trials < 100) throw ConfigError("born_ensemble needs >= 100 trials");
    BornResult result;
    result.n_trials = n_trials;
    result.outcomes.resize(n_trials);

    const double center = setup.grid.origin() + 0.5 * setup.grid.extent();
    const double x1 = center - 0.5 * setup.packet_separation;
    const double x2 = center + 0.5 * setup.packet_separation;
    parallel_for(n_trials, setup.threads, [&](std::size_t i) {
        const std::uint64_t trial_seed = rng::philox(base_seed, i, rng::stream_trial_seed);
        result.outcomes[i] = collapse_trial(alpha2, x1, x2, setup, trial_seed);
    });

    std::size_t collapsed = 0, wins = 0;
    double time_sum = 0.0;
    for (const TrialOutcome& o : result.outcomes) {
        if (!o.collapsed) continue;
        ++collapsed;
        if (o.selected_component == 0) ++wins;
        time_sum += o.collapse_time;
    }
    result.n_collapsed = collapsed;
    const double miss_fraction =
        static_cast<double>(n_trials - collapsed) / static_cast<double>(n_trials);
    if (miss_fraction > 0.01) {
        throw RunError("born_ensemble: " + std::to_string(n_trials - collapsed) + " of " +
                       std::to_string(n_trials) + " trials failed to collapse by t_max");
    }
    result.frequency = static_cast<double>(wins) / static_cast<double>(collapsed);
    result.ci95 = 1.96 * std::sqrt(result.frequency * (1.0 - result.frequency) /
                                   static_cast<double>(collapsed));
    result.mean_collapse_time = time_sum / static_cast<double>(collapsed);
    return result;
}

OracleResult gambler_oracle(double alpha2, std::size_t n_trials, double gain,
                            std::uint64_t seed, double threshold, int threads) {
    if (!(alpha2 > 0.0 && alpha2 < 1.0)) throw ConfigError("alpha2 must lie in (0, 1)");
    if (!(gain > 0.0 && gain < 1.0)) throw ConfigError("gain must lie in (0, 1)");
    if (!(threshold > 0.0 && threshold < 0.5)) throw ConfigError("threshold must lie in (0, 0.5)");
    if (n_trials == 0) throw ConfigError("n_trials must be >= 1");

    std::vector<unsigned char> wins(n_trials, 0);
    std::vector<double> steps_taken(n_trials, 0.0);

    parallel_for(n_trials, threads, [&](std::size_t trial) {
        const std::uint64_t trial_seed = rng::philox(seed, trial, rng::stream_trial_seed);
        double w = alpha2;
        std::uint64_t step_count = 0;
        std::uint64_t word = 0;
        for (;;) {
            if (w >= 1.0 - threshold) {
                wins[trial] = 1;
                break;
            }
            if (w <= threshold) break;
            if ((step_count & 1) == 0) {
                word = rng::philox(trial_seed, step_count >> 1, rng::stream_oracle);
            }
            const std::uint32_t bits = (step_count & 1)
                                           ? static_cast<std::uint32_t>(word >> 32)
                                           : static_cast<std::uint32_t>(word);
            const double u = static_cast<double>(bits) * 0x1.0p-32;
            const double pick0 = (1.0 + gain * w) / (2.0 + gain);
            if (u < pick0) {
                w = w * (1.0 + gain) / (1.0 + gain * w);
            } else {
                w = w / (1.0 + gain * (1.0 - w));
            }
            if (++step_count > (1ull << 40)) {
                throw RunError("gambler_oracle trial failed to absorb");
            }
        }
        steps_taken[trial] = static_cast<double>(step_count);
    });

    OracleResult result;
    result.n_trials = n_trials;
    std::size_t win_count = 0;
    double step_sum = 0.0;
    for (std::size_t i = 0; i < n_trials; ++i) {
        win_count += wins[i];
        step_sum += steps_taken[i];
    }
    result.frequency = static_cast<double>(win_count) / static_cast<double>(n_trials);
    result.mean_steps = step_sum / static_cast<double>(n_trials);
    return result;
}

} // namespace nuqd
