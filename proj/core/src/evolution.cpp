#include "nuqd/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "nuqd/errors.hpp"
#include "nuqd/fft.hpp"

namespace nuqd {

namespace {

// Single source of truth for the decay exponent so every code path (public
// potential_step, fixed-x0 tables, offset tables) produces identical factors.
inline double decay_exponent(double kappa, double d, double dt, double hbar) {
    return -(kappa * d * d * dt) / hbar;
}

double max_min_image_distance(const Grid& grid) { return 0.5 * grid.extent(); }

} // namespace

void PotentialMode::validate() const {
    if (!(kappa >= 0.0) || !std::isfinite(kappa)) {
        throw ConfigError("kappa must be >= 0 and finite");
    }
    if (!std::isfinite(x0)) throw ConfigError("potential x0 must be finite");
}

double EvolutionSpec::stability_dt_bound(const Grid& grid) const {
    if (potential.kind == PotentialKind::none || potential.kappa == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    const double lmax = max_min_image_distance(grid);
    return 0.1 * params.hbar / (potential.kappa * lmax * lmax);
}

void EvolutionSpec::validate(const Grid& grid) const {
    params.validate();
    potential.validate();
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be > 0");
    const double bound = stability_dt_bound(grid);
    if (dt > bound * (1.0 + 1e-12)) {
        throw ConfigError("dt " + std::to_string(dt) +
                          " exceeds the stability bound 0.1*hbar/(kappa*Lmax^2) = " +
                          std::to_string(bound));
    }
}

WaveFunction kinetic_step(const WaveFunction& psi, double dt, const PhysicalParams& params) {
    params.validate();
    const Grid& g = psi.grid();
    const std::size_t n = g.n_points();
    Fft fft(n);
    auto buf = fft.buffer();
    std::copy(psi.amplitudes().begin(), psi.amplitudes().end(), buf.begin());
    fft.forward();
    const auto ks = dft_wavenumbers(n, g.spacing());
    const double total_mass = params.total_mass();
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double theta = -dt * params.hbar * ks[j] * ks[j] / (2.0 * total_mass);
        buf[j] *= cplx(std::cos(theta), std::sin(theta)) * inv_n;
    }
    fft.backward();
    return WaveFunction(g, std::vector<cplx>(buf.begin(), buf.end()));
}

WaveFunction potential_step(const WaveFunction& psi, double dt, const PotentialMode& mode,
                            double x0, double hbar, double max_log_range) {
    mode.validate();
    if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
    if (!(hbar > 0.0)) throw ConfigError("hbar must be > 0");
    const Grid& g = psi.grid();
    if (mode.kind == PotentialKind::none || mode.kappa == 0.0) {
        return psi;
    }
    const bool hermitian = mode.kind == PotentialKind::hermitian_fixed;
    const double lmax = max_min_image_distance(g);
    if (!hermitian && mode.kappa * lmax * lmax * dt / hbar > max_log_range) {
        throw RunError("potential step spans more than " + std::to_string(max_log_range) +
                       " log units across the grid; reduce dt");
    }
    std::vector<cplx> amps(psi.amplitudes().begin(), psi.amplitudes().end());
    for (std::size_t j = 0; j < amps.size(); ++j) {
        const double d = g.min_image(g.position(j) - x0);
        const double e = decay_exponent(mode.kappa, d, dt, hbar);
        if (hermitian) {
            amps[j] *= cplx(std::cos(e), std::sin(e));
        } else {
            amps[j] *= std::exp(e);
        }
    }
    return WaveFunction(g, std::move(amps));
}

std::pair<WaveFunction, double> step(const WaveFunction& psi, const EvolutionSpec& spec,
                                     double x0) {
    spec.validate(psi.grid());
    const double norm_before = psi.norm();
    if (!(norm_before > 0.0)) throw RunError("step requested on a zero-norm state");
    WaveFunction current = psi;
    if (spec.kinetic_enabled) {
        current = kinetic_step(current, 0.5 * spec.dt, spec.params);
    }
    if (spec.potential.kind != PotentialKind::none) {
        current = potential_step(current, spec.dt, spec.potential, x0, spec.params.hbar,
                                 spec.max_step_log_range);
    }
    if (spec.kinetic_enabled) {
        current = kinetic_step(current, 0.5 * spec.dt, spec.params);
    }
    const double norm_after = current.norm();
    if (!(norm_after > 0.0)) throw RunError("state norm collapsed to zero during step");
    const double factor = norm_after / norm_before;
    if (spec.renormalize_each_step) {
        current.scale(1.0 / norm_after);
    }
    return {std::move(current), factor};
}

// ---------------------------------------------------------------------------
// evolve(): block-structured integrator. Adjacent half kinetic factors of
// consecutive Strang steps are fused into full factors; the true (unfused)
// frame is restored at every record point. Between potential applications the
// working buffer always holds the mid-step state in position space, which is
// exactly the state the norm-tilted x0 sampler has to see.
// ---------------------------------------------------------------------------

namespace {

class EvolveEngine {
public:
    EvolveEngine(const WaveFunction& psi0, const EvolutionSpec& spec, const X0Source& source,
                 const EvolveOptions& options)
        : grid_(psi0.grid()), spec_(spec), source_(source), opts_(options),
          n_(grid_.n_points()), fft_(grid_.n_points()), density_(n_, 0.0) {
        spec_.validate(grid_);
        source_.validate();
        check_source_compatibility();
        if (!(opts_.t_final > 0.0)) throw ConfigError("t_final must be > 0");
        if (opts_.record_every < 1) throw ConfigError("record_every must be >= 1");

        steps_total_ = static_cast<std::uint64_t>(std::floor(opts_.t_final / spec_.dt + 1e-9));
        if (steps_total_ < 1) {
            throw ConfigError("t_final shorter than one step (dt = " + std::to_string(spec_.dt) + ")");
        }

        auto buf = fft_.buffer();
        std::copy(psi0.amplitudes().begin(), psi0.amplitudes().end(), buf.begin());
        const double n2 = norm_squared_from_buffer();
        if (!(n2 > 0.0)) throw RunError("initial state has zero norm");
        if (spec_.renormalize_each_step) {
            scale_buffer(1.0 / std::sqrt(n2));
        }
        initial_norm2_ = spec_.renormalize_each_step ? 1.0 : n2;

        build_tables();
        build_region_index();
    }

    Trajectory run() {
        Trajectory traj;
        traj.region_boundaries = opts_.region_boundaries;

        record(traj, 0);
        if (traj.stopped_early) return traj;

        bool half_open = false;
        for (std::uint64_t s = 1; s <= steps_total_; ++s) {
            if (spec_.kinetic_enabled && !half_open) {
                apply_kspace(kin_half_, false);
                half_open = true;
            }

            apply_potential(s - 1); // x0 index stream counts from step 0

            const bool will_record =
                (s % opts_.record_every == 0) || s == steps_total_;
            if (spec_.kinetic_enabled) {
                if (will_record) {
                    apply_kspace(kin_half_, true);
                    half_open = false;
                } else {
                    apply_kspace(kin_full_, false);
                }
            }
            if (will_record) {
                record(traj, s);
                if (traj.stopped_early) break;
            }
        }
        if (opts_.capture_final_state) {
            auto buf = fft_.buffer();
            traj.final_state.emplace(grid_, std::vector<cplx>(buf.begin(), buf.end()));
        }
        return traj;
    }

private:
    void check_source_compatibility() const {
        const PotentialKind kind = spec_.potential.kind;
        if (kind == PotentialKind::non_hermitian_stochastic) {
            if (source_.kind == NoiseKind::fixed) {
                throw ConfigError("stochastic potential needs a white_noise or norm_tilted source");
            }
        } else if (source_.kind != NoiseKind::fixed && kind != PotentialKind::none) {
            throw ConfigError("fixed potential kinds require a fixed X0 source");
        }
    }

    void build_tables() {
        const double dt = spec_.dt;
        const double hbar = spec_.params.hbar;
        const double kappa = spec_.potential.kappa;

        if (spec_.kinetic_enabled) {
            const auto ks = dft_wavenumbers(n_, grid_.spacing());
            const double total_mass = spec_.params.total_mass();
            const double inv_n = 1.0 / static_cast<double>(n_);
            kin_half_.resize(n_);
            kin_full_.resize(n_);
            for (std::size_t j = 0; j < n_; ++j) {
                const double w = hbar * ks[j] * ks[j] / (2.0 * total_mass);
                const double th = -0.5 * dt * w;
                const double tf = -dt * w;
                kin_half_[j] = cplx(std::cos(th), std::sin(th)) * inv_n;
                kin_full_[j] = cplx(std::cos(tf), std::sin(tf)) * inv_n;
            }
        }

        const PotentialKind kind = spec_.potential.kind;
        if (kind == PotentialKind::none || kappa == 0.0) return;

        const double lmax = max_min_image_distance(grid_);
        if (kind != PotentialKind::hermitian_fixed &&
            kappa * lmax * lmax * dt / hbar > spec_.max_step_log_range) {
            throw RunError("potential step spans more than " +
                           std::to_string(spec_.max_step_log_range) +
                           " log units across the grid; reduce dt");
        }

        if (kind == PotentialKind::non_hermitian_stochastic) {
            // x0 lands on lattice sites, so one offset-indexed table covers
            // every draw: factor(j; idx) = decay_offset_[(j - idx) mod n].
            decay_offset_.resize(n_);
            tilt_offset_.resize(n_);
            for (std::size_t d = 0; d < n_; ++d) {
                const double dist = grid_.min_image(static_cast<double>(d) * grid_.spacing());
                const double e = decay_exponent(kappa, dist, dt, hbar);
                decay_offset_[d] = std::exp(e);
                tilt_offset_[d] = std::exp(2.0 * e); // squared amplitude factor
            }
        } else if (kind == PotentialKind::hermitian_fixed) {
            phase_fixed_.resize(n_);
            for (std::size_t j = 0; j < n_; ++j) {
                const double d = grid_.min_image(grid_.position(j) - spec_.potential.x0);
                const double e = decay_exponent(kappa, d, dt, hbar);
                phase_fixed_[j] = cplx(std::cos(e), std::sin(e));
            }
        } else { // non_hermitian_fixed
            decay_fixed_.resize(n_);
            for (std::size_t j = 0; j < n_; ++j) {
                const double d = grid_.min_image(grid_.position(j) - spec_.potential.x0);
                decay_fixed_[j] = std::exp(decay_exponent(kappa, d, dt, hbar));
            }
        }
    }

    void build_region_index() {
        const auto& bounds = opts_.region_boundaries;
        if (bounds.empty()) return;
        const double lo = grid_.origin();
        const double hi = grid_.origin() + grid_.extent();
        for (std::size_t i = 0; i < bounds.size(); ++i) {
            if (!(bounds[i] > lo && bounds[i] < hi)) {
                throw ConfigError("region boundary outside the grid extent");
            }
            if (i > 0 && !(bounds[i] > bounds[i - 1])) {
                throw ConfigError("region boundaries must be strictly increasing");
            }
        }
        region_of_.resize(n_);
        for (std::size_t j = 0; j < n_; ++j) {
            const double x = grid_.position(j);
            region_of_[j] = static_cast<std::uint32_t>(
                std::upper_bound(bounds.begin(), bounds.end(), x) - bounds.begin());
        }
    }

    double norm_squared_from_buffer() const {
        auto buf = fft_.buffer();
        double s = 0.0;
        for (std::size_t j = 0; j < n_; ++j) s += std::norm(buf[j]);
        return s * grid_.spacing();
    }

    void scale_buffer(double f) {
        auto buf = fft_.buffer();
        for (std::size_t j = 0; j < n_; ++j) buf[j] *= f;
    }

    // Forward transform, multiply by the (1/n-folded) phase table, transform
    // back. At record closings also captures <k^2> for the kinetic energy;
    // the phase multiply does not change |phi_k|, so sampling here is exact.
    void apply_kspace(const std::vector<cplx>& table, bool capture_k2) {
        fft_.forward();
        auto buf = fft_.buffer();
        if (capture_k2) {
            if (ks_.empty()) ks_ = dft_wavenumbers(n_, grid_.spacing());
            double sk2 = 0.0, s0 = 0.0;
            for (std::size_t j = 0; j < n_; ++j) {
                const double w = std::norm(buf[j]);
                sk2 += ks_[j] * ks_[j] * w;
                s0 += w;
            }
            last_k2_mean_ = s0 > 0.0 ? sk2 / s0 : 0.0;
            have_k2_ = true;
        }
        for (std::size_t j = 0; j < n_; ++j) buf[j] *= table[j];
        fft_.backward();
    }

    double draw_x0(std::uint64_t step_index) {
        if (source_.kind == NoiseKind::white_noise) {
            return next_x0(source_, grid_, step_index);
        }
        const std::uint64_t window = step_index / source_.dwell_steps;
        // norm_tilted: uniform proposal over lattice sites, accepted with
        // probability proportional to the norm the state would keep under that
        // draw. This samples x0 from density(z) ~ sum_j |psi_j|^2 T[(j-z) mod n],
        // the per-step norm ratio of the full Strang step.
        if (window == tilt_window_ && have_tilt_value_) return tilt_value_;
        auto buf = fft_.buffer();
        double total = 0.0;
        for (std::size_t j = 0; j < n_; ++j) {
            density_[j] = std::norm(buf[j]);
            total += density_[j];
        }
        if (!(total > 0.0)) throw RunError("state norm collapsed to zero during evolution");
        const std::size_t mask = n_ - 1;
        for (std::uint64_t attempt = 0;; ++attempt) {
            if (attempt > 100000) throw RunError("norm-tilted x0 sampler failed to accept");
            const std::uint64_t word =
                rng::philox(source_.seed, window, rng::stream_tilt_base + attempt);
            const std::size_t idx = static_cast<std::size_t>(word >> 32) & mask;
            const double u = static_cast<double>(word & 0xFFFFFFFFull) * 0x1.0p-32;
            double r = 0.0;
            for (std::size_t j = 0; j < n_; ++j) {
                r += density_[j] * tilt_offset_[(j - idx) & mask];
            }
            if (u * total <= r) {
                tilt_window_ = window;
                tilt_value_ = grid_.position(idx);
                have_tilt_value_ = true;
                return tilt_value_;
            }
        }
    }

    void apply_potential(std::uint64_t step_index) {
        const PotentialKind kind = spec_.potential.kind;
        if (kind == PotentialKind::none || spec_.potential.kappa == 0.0) return;

        auto buf = fft_.buffer();
        double n2 = 0.0;
        if (kind == PotentialKind::non_hermitian_stochastic) {
            const double x0 = draw_x0(step_index);
            const std::size_t idx = grid_.nearest_index(x0);
            const std::size_t mask = n_ - 1;
            for (std::size_t j = 0; j < n_; ++j) {
                buf[j] *= decay_offset_[(j - idx) & mask];
                n2 += std::norm(buf[j]);
            }
        } else if (kind == PotentialKind::hermitian_fixed) {
            for (std::size_t j = 0; j < n_; ++j) {
                buf[j] *= phase_fixed_[j];
                n2 += std::norm(buf[j]);
            }
        } else {
            for (std::size_t j = 0; j < n_; ++j) {
                buf[j] *= decay_fixed_[j];
                n2 += std::norm(buf[j]);
            }
        }
        n2 *= grid_.spacing();
        if (!(n2 > 0.0)) throw RunError("state norm collapsed to zero during evolution");
        if (spec_.renormalize_each_step) {
            log_norm_acc_ += 0.5 * std::log(n2);
            scale_buffer(1.0 / std::sqrt(n2));
        }
        clamp_tails();
    }

    // Zero amplitudes below tail_floor relative to the current maximum. The
    // threshold is scale-invariant, so renormalized and raw runs make the
    // same decisions.
    void clamp_tails() {
        if (!(spec_.tail_floor > 0.0)) return;
        auto buf = fft_.buffer();
        double max_abs2 = 0.0;
        for (std::size_t j = 0; j < n_; ++j) max_abs2 = std::max(max_abs2, std::norm(buf[j]));
        const double cut = max_abs2 * spec_.tail_floor * spec_.tail_floor;
        for (std::size_t j = 0; j < n_; ++j) {
            if (std::norm(buf[j]) < cut) buf[j] = cplx(0.0, 0.0);
        }
    }

    void record(Trajectory& traj, std::uint64_t s) {
        auto buf = fft_.buffer();
        double m0 = 0.0, m1 = 0.0, m2 = 0.0;
        std::vector<double> weights(region_of_.empty() ? 0 : opts_.region_boundaries.size() + 1,
                                    0.0);
        for (std::size_t j = 0; j < n_; ++j) {
            const double w = std::norm(buf[j]);
            const double x = grid_.position(j);
            m0 += w;
            m1 += x * w;
            m2 += x * x * w;
            if (!region_of_.empty()) weights[region_of_[j]] += w;
        }
        if (!(m0 > 0.0)) throw RunError("state norm collapsed to zero during evolution");
        const double x_mean = m1 / m0;
        const double var = m2 / m0 - x_mean * x_mean;
        for (double& w : weights) w /= m0;

        double log_norm;
        if (spec_.renormalize_each_step) {
            log_norm = log_norm_acc_ + 0.5 * std::log(m0 * grid_.spacing());
        } else {
            log_norm = 0.5 * std::log(m0 * grid_.spacing() / initial_norm2_);
        }

        if (!have_k2_) capture_k2_now();
        const double e_kin = spec_.params.hbar * spec_.params.hbar * last_k2_mean_ /
                             (2.0 * spec_.params.total_mass());
        have_k2_ = false;

        traj.times.push_back(static_cast<double>(s) * spec_.dt);
        traj.log_norms.push_back(log_norm);
        traj.x_means.push_back(x_mean);
        traj.spreads.push_back(var > 0.0 ? std::sqrt(var) : 0.0);
        traj.kinetic_energies.push_back(e_kin);
        if (!region_of_.empty()) traj.region_weight_series.push_back(weights);

        if (opts_.stop) {
            RecordPoint point{traj.times.back(), log_norm, x_mean, traj.spreads.back(), e_kin,
                              region_of_.empty() ? empty_weights_
                                                 : traj.region_weight_series.back()};
            if (opts_.stop(point)) traj.stopped_early = true;
        }
    }

    // Out-of-place scratch transform used when the main loop has no k-space
    // pass at this record (kinetic disabled, or the t=0 record).
    void capture_k2_now() {
        if (ks_.empty()) ks_ = dft_wavenumbers(n_, grid_.spacing());
        if (!scratch_) scratch_.emplace(n_);
        auto sbuf = scratch_->buffer();
        auto buf = fft_.buffer();
        std::copy(buf.begin(), buf.end(), sbuf.begin());
        scratch_->forward();
        double sk2 = 0.0, s0 = 0.0;
        for (std::size_t j = 0; j < n_; ++j) {
            const double w = std::norm(sbuf[j]);
            sk2 += ks_[j] * ks_[j] * w;
            s0 += w;
        }
        last_k2_mean_ = s0 > 0.0 ? sk2 / s0 : 0.0;
        have_k2_ = true;
    }

    Grid grid_;
    EvolutionSpec spec_;
    X0Source source_;
    EvolveOptions opts_;
    std::size_t n_;
    Fft fft_;
    std::optional<Fft> scratch_;
    std::uint64_t steps_total_ = 0;

    std::vector<cplx> kin_half_, kin_full_;
    std::vector<double> decay_fixed_;
    std::vector<cplx> phase_fixed_;
    std::vector<double> decay_offset_, tilt_offset_;
    std::vector<double> density_;
    std::vector<double> ks_;
    std::vector<std::uint32_t> region_of_;
    std::vector<double> empty_weights_{};

    double initial_norm2_ = 1.0;
    double log_norm_acc_ = 0.0;
    double last_k2_mean_ = 0.0;
    bool have_k2_ = false;

    std::uint64_t tilt_window_ = ~0ull;
    double tilt_value_ = 0.0;
    bool have_tilt_value_ = false;
};

} // namespace

Trajectory evolve(const WaveFunction& psi0, const EvolutionSpec& spec, const X0Source& source,
                  const EvolveOptions& options) {
    EvolveEngine engine(psi0, spec, source, options);
    return engine.run();
}

} // namespace nuqd
