#include "nuqd/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>
#include <sstream>

#include "nuqd/errors.hpp"
#include "nuqd/experiments.hpp"
#include "nuqd/io.hpp"

namespace nuqd {

namespace {

using json = nlohmann::json;

const std::set<std::string> kExperiments = {"evolve",  "localization", "relocation", "sweep",
                                            "limits",  "born",         "oracle"};
const std::set<std::string> kPotentials = {"none", "non_hermitian_fixed",
                                           "non_hermitian_stochastic", "hermitian_fixed"};
const std::set<std::string> kNoises = {"fixed", "white_noise", "norm_tilted"};
const std::set<std::string> kInitials = {"uniform", "gaussian", "two_packet"};
const std::set<std::string> kCouplings = {"omega", "gamma", "gravity"};

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

CouplingMode parse_coupling(const std::string& s) {
    if (s == "omega") return CouplingMode::omega;
    if (s == "gamma") return CouplingMode::gamma;
    if (s == "gravity") return CouplingMode::gravity;
    throw ConfigError("unknown coupling mode '" + s + "'");
}

NoiseKind parse_noise(const std::string& s) {
    if (s == "fixed") return NoiseKind::fixed;
    if (s == "white_noise") return NoiseKind::white_noise;
    if (s == "norm_tilted") return NoiseKind::norm_tilted;
    throw ConfigError("unknown noise kind '" + s + "'");
}

PotentialKind parse_potential(const std::string& s) {
    if (s == "none") return PotentialKind::none;
    if (s == "non_hermitian_fixed") return PotentialKind::non_hermitian_fixed;
    if (s == "non_hermitian_stochastic") return PotentialKind::non_hermitian_stochastic;
    if (s == "hermitian_fixed") return PotentialKind::hermitian_fixed;
    throw ConfigError("unknown potential kind '" + s + "'");
}

CouplingSpec coupling_of(const RunConfig& cfg) {
    CouplingSpec c;
    c.mode = parse_coupling(cfg.coupling_mode);
    c.omega = cfg.omega;
    c.gamma = cfg.gamma;
    c.g_newton = cfg.g_newton;
    c.density = cfg.density;
    return c;
}

PhysicalParams params_of(const RunConfig& cfg) {
    return PhysicalParams{cfg.n_particles, cfg.mass, cfg.hbar};
}

Grid grid_of(const RunConfig& cfg) { return Grid(cfg.n_points, cfg.spacing, cfg.origin); }

bool needs_seed(const RunConfig& cfg) {
    if (cfg.experiment == "born" || cfg.experiment == "oracle") return true;
    return cfg.noise != "fixed";
}

bool uses_coupling(const RunConfig& cfg) {
    if (cfg.experiment == "oracle") return false;
    if (cfg.experiment == "evolve" && cfg.potential == "none") return false;
    return true;
}

} // namespace

RunConfig default_config(const std::string& experiment) {
    RunConfig cfg;
    cfg.experiment = experiment;
    if (experiment == "evolve") {
        // superposition with a near light packet and a far heavy one; the far
        // one loses weight first, then the survivor drifts to x0
        cfg.n_points = 256;
        cfg.origin = -128.0;
        cfg.n_particles = 8.0;
        cfg.mass = 0.5;
        cfg.omega = 0.1;
        cfg.initial = "two_packet";
        cfg.alpha2 = 0.4;
        cfg.x1 = 5.0;
        cfg.x2 = -20.0;
        cfg.packet_width = 2.0;
        cfg.width = 2.0;
        cfg.t_final = 150.0;
        cfg.potential = "non_hermitian_fixed";
        cfg.x0 = 0.0;
    } else if (experiment == "localization") {
        cfg.n_points = 256;
        cfg.origin = -128.0;
        cfg.n_particles = 16.0;
        cfg.mass = 1.0;
        cfg.omega = 0.25; // N m Omega^2 = 1 => analytic estimate 0.5
    } else if (experiment == "relocation") {
        cfg.n_points = 128;
        cfg.origin = -64.0;
        cfg.n_particles = 8.0;
        cfg.mass = 0.5;
        cfg.omega = 0.1;
        cfg.distance = 10.0;
        cfg.packet_width = 0.0; // equilibrium width
    } else if (experiment == "sweep") {
        cfg.n_points = 1024;
        cfg.origin = -512.0;
        cfg.n_particles = 16.0;
        cfg.mass = 1.0;
        cfg.sweep_parameter = "omega";
        cfg.sweep_measure = "loc";
        cfg.sweep_values = {0.5, 1.0, 2.0, 4.0, 8.0};
    } else if (experiment == "limits") {
        cfg.n_points = 256;
        cfg.origin = -128.0;
        cfg.mass = 0.25;
        cfg.omega = 0.5;
        cfg.limits_n = {32.0, 64.0, 128.0};
        cfg.limits_omega = {0.25, 0.5, 1.0};
        cfg.distance = 10.0;
    } else if (experiment == "born") {
        cfg.n_points = 1024;
        cfg.origin = -512.0;
        cfg.n_particles = 100.0;
        cfg.mass = 1.0;
        cfg.coupling_mode = "gamma";
        cfg.gamma = 1e-6; // kappa = N*gamma = 1e-4
        cfg.noise = "norm_tilted";
        cfg.alpha2 = 0.64;
        cfg.separation = 80.0;
        cfg.packet_width = 4.0;
        cfg.trials = 2000;
        cfg.t_max = 800.0;
        cfg.record_every = 16;
    } else if (experiment == "oracle") {
        cfg.alpha2 = 0.64;
        cfg.trials = 10000;
        cfg.gain = 0.01;
    } else {
        throw ConfigError("unknown experiment '" + experiment + "'");
    }
    return cfg;
}

void apply_json(RunConfig& cfg, const json& doc) {
    if (!doc.is_object()) throw ConfigError("config document must be a JSON object");
    for (const auto& [key, value] : doc.items()) {
        try {
            if (key == "experiment") cfg.experiment = value.get<std::string>();
            else if (key == "n_points") cfg.n_points = value.get<std::size_t>();
            else if (key == "spacing") cfg.spacing = value.get<double>();
            else if (key == "origin") cfg.origin = value.get<double>();
            else if (key == "n_particles") cfg.n_particles = value.get<double>();
            else if (key == "mass") cfg.mass = value.get<double>();
            else if (key == "hbar") cfg.hbar = value.get<double>();
            else if (key == "coupling_mode") cfg.coupling_mode = value.get<std::string>();
            else if (key == "omega") cfg.omega = value.get<double>();
            else if (key == "gamma") cfg.gamma = value.get<double>();
            else if (key == "g_newton") cfg.g_newton = value.get<double>();
            else if (key == "density") cfg.density = value.get<double>();
            else if (key == "potential") cfg.potential = value.get<std::string>();
            else if (key == "x0") cfg.x0 = value.get<double>();
            else if (key == "kinetic") cfg.kinetic = value.get<bool>();
            else if (key == "renormalize") cfg.renormalize = value.get<bool>();
            else if (key == "noise") cfg.noise = value.get<std::string>();
            else if (key == "seed") { cfg.seed = value.get<std::uint64_t>(); cfg.has_seed = true; }
            else if (key == "dwell_steps") cfg.dwell_steps = value.get<std::uint32_t>();
            else if (key == "initial") cfg.initial = value.get<std::string>();
            else if (key == "center") cfg.center = value.get<double>();
            else if (key == "width") cfg.width = value.get<double>();
            else if (key == "momentum") cfg.momentum = value.get<double>();
            else if (key == "alpha2") cfg.alpha2 = value.get<double>();
            else if (key == "x1") cfg.x1 = value.get<double>();
            else if (key == "x2") cfg.x2 = value.get<double>();
            else if (key == "separation") cfg.separation = value.get<double>();
            else if (key == "collapse_threshold") cfg.collapse_threshold = value.get<double>();
            else if (key == "tail_floor") cfg.tail_floor = value.get<double>();
            else if (key == "dt") cfg.dt = value.get<double>();
            else if (key == "t_final") cfg.t_final = value.get<double>();
            else if (key == "t_max") cfg.t_max = value.get<double>();
            else if (key == "record_every") cfg.record_every = value.get<std::size_t>();
            else if (key == "trials") cfg.trials = value.get<std::size_t>();
            else if (key == "gain") cfg.gain = value.get<double>();
            else if (key == "oracle_threshold") cfg.oracle_threshold = value.get<double>();
            else if (key == "distance") cfg.distance = value.get<double>();
            else if (key == "packet_width") cfg.packet_width = value.get<double>();
            else if (key == "sweep_parameter") cfg.sweep_parameter = value.get<std::string>();
            else if (key == "sweep_values") cfg.sweep_values = value.get<std::vector<double>>();
            else if (key == "sweep_measure") cfg.sweep_measure = value.get<std::string>();
            else if (key == "limits_n") cfg.limits_n = value.get<std::vector<double>>();
            else if (key == "limits_omega") cfg.limits_omega = value.get<std::vector<double>>();
            else if (key == "region_boundaries")
                cfg.region_boundaries = value.get<std::vector<double>>();
            else if (key == "threads") cfg.threads = value.get<int>();
            else if (key == "out_dir") cfg.out_dir = value.get<std::string>();
            else throw ConfigError("unknown config key '" + key + "'");
        } catch (const json::exception& e) {
            throw ConfigError("config key '" + key + "': " + e.what());
        }
    }
}

json to_json(const RunConfig& cfg) {
    json doc;
    doc["experiment"] = cfg.experiment;
    doc["n_points"] = cfg.n_points;
    doc["spacing"] = cfg.spacing;
    doc["origin"] = cfg.origin;
    doc["n_particles"] = cfg.n_particles;
    doc["mass"] = cfg.mass;
    doc["hbar"] = cfg.hbar;
    doc["coupling_mode"] = cfg.coupling_mode;
    doc["omega"] = cfg.omega;
    doc["gamma"] = cfg.gamma;
    doc["g_newton"] = cfg.g_newton;
    doc["density"] = cfg.density;
    doc["potential"] = cfg.potential;
    doc["x0"] = cfg.x0;
    doc["kinetic"] = cfg.kinetic;
    doc["renormalize"] = cfg.renormalize;
    doc["noise"] = cfg.noise;
    if (cfg.has_seed) doc["seed"] = cfg.seed;
    doc["dwell_steps"] = cfg.dwell_steps;
    doc["initial"] = cfg.initial;
    doc["center"] = cfg.center;
    doc["width"] = cfg.width;
    doc["momentum"] = cfg.momentum;
    doc["alpha2"] = cfg.alpha2;
    doc["x1"] = cfg.x1;
    doc["x2"] = cfg.x2;
    doc["separation"] = cfg.separation;
    doc["collapse_threshold"] = cfg.collapse_threshold;
    doc["tail_floor"] = cfg.tail_floor;
    doc["dt"] = cfg.dt;
    doc["t_final"] = cfg.t_final;
    doc["t_max"] = cfg.t_max;
    doc["record_every"] = cfg.record_every;
    doc["trials"] = cfg.trials;
    doc["gain"] = cfg.gain;
    doc["oracle_threshold"] = cfg.oracle_threshold;
    doc["distance"] = cfg.distance;
    doc["packet_width"] = cfg.packet_width;
    doc["sweep_parameter"] = cfg.sweep_parameter;
    doc["sweep_values"] = cfg.sweep_values;
    doc["sweep_measure"] = cfg.sweep_measure;
    doc["limits_n"] = cfg.limits_n;
    doc["limits_omega"] = cfg.limits_omega;
    doc["region_boundaries"] = cfg.region_boundaries;
    doc["threads"] = cfg.threads;
    doc["out_dir"] = cfg.out_dir;
    return doc;
}

std::vector<std::string> validate(const RunConfig& cfg) {
    std::vector<std::string> diags;
    auto flag = [&](const std::string& msg) { diags.push_back(msg); };

    if (!kExperiments.count(cfg.experiment)) {
        flag("unknown experiment '" + cfg.experiment + "'");
        return diags;
    }
    if (cfg.n_points < 8 || !is_power_of_two(cfg.n_points)) {
        flag("n_points must be a power of two >= 8 (got " + std::to_string(cfg.n_points) +
             "); the spectral kinetic step requires it");
    }
    if (!(cfg.spacing > 0.0)) flag("spacing must be > 0");
    if (!(cfg.n_particles > 0.0)) flag("n_particles must be > 0");
    if (!(cfg.mass > 0.0)) flag("mass must be > 0");
    if (!(cfg.hbar > 0.0)) flag("hbar must be > 0");
    if (!kPotentials.count(cfg.potential)) flag("unknown potential '" + cfg.potential + "'");
    if (!kNoises.count(cfg.noise)) flag("unknown noise '" + cfg.noise + "'");
    if (!kInitials.count(cfg.initial)) flag("unknown initial state '" + cfg.initial + "'");
    if (!kCouplings.count(cfg.coupling_mode)) {
        flag("unknown coupling mode '" + cfg.coupling_mode + "'");
        return diags;
    }

    double kappa = 0.0;
    if (uses_coupling(cfg)) {
        try {
            kappa = coupling_from(coupling_of(cfg), params_of(cfg));
        } catch (const std::exception& e) {
            flag(std::string("coupling: ") + e.what());
        }
    }

    if (cfg.dt > 0.0 && kappa > 0.0 && cfg.n_points >= 8 && cfg.spacing > 0.0) {
        const double lmax = 0.5 * static_cast<double>(cfg.n_points) * cfg.spacing;
        const double bound = 0.1 * cfg.hbar / (kappa * lmax * lmax);
        if (cfg.dt > bound * (1.0 + 1e-12)) {
            flag("dt = " + format_double(cfg.dt) +
                 " violates the stability bound 0.1*hbar/(kappa*Lmax^2) = " +
                 format_double(bound) + " (kappa = " + format_double(kappa) +
                 ", Lmax = " + format_double(lmax) + ")");
        }
    }
    if (cfg.dt < 0.0) flag("dt must be >= 0 (0 selects the stability bound)");

    if (needs_seed(cfg) && !cfg.has_seed) {
        flag("stochastic experiment requires an explicit seed (reproducibility rule)");
    }
    if (cfg.dwell_steps < 1) flag("dwell_steps must be >= 1");

    const bool wants_packet = cfg.experiment == "relocation" || cfg.experiment == "born" ||
                              (cfg.experiment == "evolve" && cfg.initial != "uniform") ||
                              (cfg.experiment == "sweep" && cfg.sweep_measure == "reloc") ||
                              cfg.experiment == "limits";
    const double width = cfg.experiment == "evolve" ? cfg.width : cfg.packet_width;
    if (wants_packet && cfg.spacing > 0.0 && width != 0.0 && width < cfg.spacing) {
        flag("packet width " + format_double(width) + " is below the lattice spacing " +
             format_double(cfg.spacing) + " (unresolvable packet)");
    }

    if (cfg.experiment == "evolve") {
        if (!(cfg.t_final > 0.0)) flag("t_final must be > 0");
        if (cfg.potential == "non_hermitian_stochastic" && cfg.noise == "fixed") {
            flag("stochastic potential needs white_noise or norm_tilted noise");
        }
        if (cfg.potential != "non_hermitian_stochastic" && cfg.potential != "none" &&
            cfg.noise != "fixed") {
            flag("fixed potential kinds require fixed noise");
        }
        if (cfg.initial == "two_packet") {
            if (!(cfg.alpha2 > 0.0 && cfg.alpha2 < 1.0)) flag("alpha2 must lie in (0, 1)");
            if (cfg.x1 == cfg.x2) flag("two_packet needs distinct x1, x2");
            const double sep = std::abs(cfg.x2 - cfg.x1);
            const double extent = static_cast<double>(cfg.n_points) * cfg.spacing;
            if (extent < 8.0 * sep) {
                flag("grid extent " + format_double(extent) +
                     " is below 8x the packet separation " + format_double(sep) +
                     "; periodic images would not be negligible");
            }
        }
    }
    if (cfg.experiment == "born") {
        if (cfg.trials < 100) flag("born needs trials >= 100");
        if (!(cfg.alpha2 > 0.0 && cfg.alpha2 < 1.0)) flag("alpha2 must lie in (0, 1)");
        if (!(cfg.separation > 0.0)) flag("separation must be > 0");
        if (!(cfg.collapse_threshold > 0.0 && cfg.collapse_threshold < 0.5)) {
            flag("collapse_threshold must lie in (0, 0.5)");
        }
        if (cfg.noise == "fixed") flag("born needs white_noise or norm_tilted noise");
        if (!(cfg.t_max > 0.0)) flag("born needs t_max > 0");
        const double extent = static_cast<double>(cfg.n_points) * cfg.spacing;
        if (extent < 8.0 * cfg.separation) {
            flag("grid extent " + format_double(extent) + " is below 8x the packet separation " +
                 format_double(cfg.separation));
        }
    }
    if (cfg.experiment == "oracle") {
        if (cfg.trials < 1) flag("oracle needs trials >= 1");
        if (!(cfg.alpha2 > 0.0 && cfg.alpha2 < 1.0)) flag("alpha2 must lie in (0, 1)");
        if (!(cfg.gain > 0.0 && cfg.gain < 1.0)) flag("gain must lie in (0, 1)");
        if (!(cfg.oracle_threshold > 0.0 && cfg.oracle_threshold < 0.5)) {
            flag("oracle_threshold must lie in (0, 0.5)");
        }
    }
    if (cfg.experiment == "sweep") {
        if (cfg.sweep_values.size() < 4) flag("sweep needs >= 4 values");
        for (std::size_t i = 0; i < cfg.sweep_values.size(); ++i) {
            if (!(cfg.sweep_values[i] > 0.0)) {
                flag("sweep values must be positive");
                break;
            }
            if (i > 0 && !(cfg.sweep_values[i] > cfg.sweep_values[i - 1])) {
                flag("sweep values must be strictly increasing");
                break;
            }
        }
        if (cfg.sweep_measure != "loc" && cfg.sweep_measure != "reloc") {
            flag("sweep_measure must be loc or reloc");
        }
        if (cfg.sweep_parameter != "omega" && cfg.sweep_parameter != "n_particles" &&
            cfg.sweep_parameter != "distance") {
            flag("sweep_parameter must be omega, n_particles or distance");
        }
        if (cfg.sweep_parameter == "distance" && cfg.sweep_measure != "reloc") {
            flag("distance sweeps only apply to the reloc measure");
        }
        if (cfg.sweep_parameter == "omega" && cfg.coupling_mode != "omega") {
            flag("sweeping omega requires the omega coupling mode");
        }
    }
    if (cfg.experiment == "limits") {
        if (cfg.limits_n.size() < 3 || cfg.limits_omega.size() < 3) {
            flag("limits needs >= 3 values per axis");
        }
        if (cfg.coupling_mode != "omega") flag("limits requires the omega coupling mode");
    }
    if (cfg.experiment == "relocation" || cfg.experiment == "localization") {
        if (cfg.noise == "norm_tilted") {
            flag("time-scale measurements use fixed or white_noise X0");
        }
    }
    return diags;
}

namespace {

std::filesystem::path resolve_out_dir(const RunConfig& cfg) {
    if (!cfg.out_dir.empty()) return cfg.out_dir;
    if (const char* env = std::getenv("NUQD_OUT"); env && *env) return env;
    return ".";
}

std::string hash_suffix(const RunConfig& cfg, std::uint64_t hash) {
    std::ostringstream name;
    name << "s" << cfg.seed << "-h" << std::hex << hash;
    return name.str();
}

MeasurementSetup measurement_setup_of(const RunConfig& cfg) {
    MeasurementSetup setup;
    setup.grid = grid_of(cfg);
    setup.params = params_of(cfg);
    setup.coupling = coupling_of(cfg);
    setup.kinetic_enabled = cfg.kinetic;
    setup.x0 = cfg.x0;
    setup.distance = cfg.distance;
    setup.packet_width = cfg.packet_width;
    setup.tail_floor = cfg.tail_floor;
    setup.dt = cfg.dt;
    setup.t_max = cfg.t_max;
    setup.record_every = cfg.record_every;
    setup.noise = parse_noise(cfg.noise);
    setup.seed = cfg.seed;
    setup.dwell_steps = cfg.dwell_steps;
    setup.threads = cfg.threads;
    return setup;
}

json trial_json(const TrialOutcome& o) {
    json j;
    j["selected_component"] = o.selected_component;
    j["collapse_time"] = o.collapse_time;
    j["seed"] = o.seed;
    j["log_norm"] = o.log_norm;
    j["collapsed"] = o.collapsed;
    return j;
}

} // namespace

RunArtifacts run_experiment(const RunConfig& cfg) {
    const auto diags = validate(cfg);
    if (!diags.empty()) {
        std::string joined = "invalid config:";
        for (const auto& d : diags) joined += "\n  - " + d;
        throw ConfigError(joined);
    }

    const json cfg_json = to_json(cfg);
    const std::uint64_t cfg_hash = fnv1a_hash(cfg_json.dump());
    const std::filesystem::path out_dir = resolve_out_dir(cfg);
    const std::string suffix = hash_suffix(cfg, cfg_hash);

    json result;
    result["experiment"] = cfg.experiment;
    result["config"] = cfg_json;
    std::ostringstream hash_hex;
    hash_hex << std::hex << cfg_hash;
    result["config_hash"] = hash_hex.str();

    RunArtifacts artifacts;
    std::ostringstream summary;

    if (cfg.experiment == "evolve") {
        const Grid grid = grid_of(cfg);
        const PhysicalParams params = params_of(cfg);
        const PotentialKind kind = parse_potential(cfg.potential);
        const double kappa =
            kind == PotentialKind::none ? 0.0 : coupling_from(coupling_of(cfg), params);

        EvolutionSpec spec;
        spec.params = params;
        spec.potential = {kind, kappa, cfg.x0};
        spec.kinetic_enabled = cfg.kinetic;
        spec.renormalize_each_step = cfg.renormalize;
        spec.tail_floor = cfg.tail_floor;
        spec.dt = cfg.dt > 0.0 ? cfg.dt : spec.stability_dt_bound(grid);
        if (!std::isfinite(spec.dt) || spec.dt <= 0.0) {
            throw ConfigError("free evolution needs an explicit dt");
        }

        WaveFunction psi = [&]() {
            if (cfg.initial == "uniform") return uniform_state(grid);
            if (cfg.initial == "gaussian") {
                return gaussian_packet(grid, cfg.center, cfg.width, cfg.momentum, cfg.hbar);
            }
            WaveFunction p1 = gaussian_packet(grid, cfg.x1, cfg.width, 0.0, cfg.hbar);
            WaveFunction p2 = gaussian_packet(grid, cfg.x2, cfg.width, 0.0, cfg.hbar);
            return superpose({{cplx(std::sqrt(cfg.alpha2), 0.0), p1},
                              {cplx(std::sqrt(1.0 - cfg.alpha2), 0.0), p2}});
        }();

        X0Source source{parse_noise(cfg.noise), cfg.x0, cfg.seed, cfg.dwell_steps};

        EvolveOptions opts;
        opts.t_final = cfg.t_final;
        const double steps = cfg.t_final / spec.dt;
        opts.record_every = cfg.record_every > 0
                                ? cfg.record_every
                                : std::max<std::size_t>(1, static_cast<std::size_t>(steps / 1000.0));
        opts.region_boundaries = cfg.region_boundaries;
        if (opts.region_boundaries.empty() && cfg.initial == "two_packet") {
            opts.region_boundaries = {0.5 * (cfg.x1 + cfg.x2)};
        }
        opts.capture_final_state = true;

        const Trajectory traj = evolve(psi, spec, source, opts);

        const auto series_path = out_dir / ("series-" + suffix + ".csv");
        write_trajectory_csv(series_path, traj, cfg.seed, cfg.dwell_steps, cfg_hash);
        artifacts.series_paths.push_back(series_path);
        const auto state_path = out_dir / ("state-" + suffix + ".csv");
        write_wavefunction_csv(state_path, *traj.final_state);
        artifacts.series_paths.push_back(state_path);

        json r;
        r["dt"] = spec.dt;
        r["steps"] = static_cast<std::uint64_t>(steps);
        r["records"] = traj.times.size();
        r["final_t"] = traj.times.back();
        r["final_x_mean"] = traj.x_means.back();
        r["final_spread"] = traj.spreads.back();
        r["final_log_norm"] = traj.log_norms.back();
        if (!traj.region_weight_series.empty()) {
            r["final_region_weights"] = traj.region_weight_series.back();
        }
        r["kinetic_energies_recorded"] = true;
        result["results"] = r;
        result["trajectory"] = {{"times", traj.times},
                                {"log_norms", traj.log_norms},
                                {"x_means", traj.x_means},
                                {"spreads", traj.spreads},
                                {"kinetic_energies", traj.kinetic_energies}};

        summary << "evolve: t=" << format_double(traj.times.back())
                << " x_mean=" << format_double(traj.x_means.back())
                << " spread=" << format_double(traj.spreads.back())
                << " log_norm=" << format_double(traj.log_norms.back());
    } else if (cfg.experiment == "localization" || cfg.experiment == "relocation") {
        MeasurementSetup setup = measurement_setup_of(cfg);
        const TimedRun run = cfg.experiment == "localization" ? localization_run(setup)
                                                              : relocation_run(setup);
        const auto series_path = out_dir / ("series-" + suffix + ".csv");
        write_trajectory_csv(series_path, run.trajectory, cfg.seed, cfg.dwell_steps, cfg_hash);
        artifacts.series_paths.push_back(series_path);

        json r;
        r["measured_time"] = run.time;
        if (cfg.experiment == "localization") {
            const double analytic =
                cfg.hbar / (4.0 * coupling_from(coupling_of(cfg), params_of(cfg)) *
                            cfg.spacing * cfg.spacing);
            r["analytic_estimate"] = analytic;
        } else {
            r["analytic_estimate"] = std::abs(cfg.distance) /
                                     (cfg.spacing * setup.effective_omega());
        }
        result["results"] = r;
        summary << cfg.experiment << ": measured_time=" << format_double(run.time);
    } else if (cfg.experiment == "sweep") {
        MeasurementSetup setup = measurement_setup_of(cfg);
        const SweepMeasure measure =
            cfg.sweep_measure == "loc" ? SweepMeasure::loc : SweepMeasure::reloc;
        const ScalingResult sweep =
            scaling_sweep(setup, cfg.sweep_parameter, cfg.sweep_values, measure);

        std::ostringstream csv;
        csv << "# seed=" << cfg.seed << " dwell_steps=" << cfg.dwell_steps << " config_hash="
            << std::hex << cfg_hash << std::dec << '\n';
        csv << cfg.sweep_parameter << ",measured_time\n";
        for (std::size_t i = 0; i < sweep.values.size(); ++i) {
            csv << format_double(sweep.values[i]) << ','
                << format_double(sweep.measured_times[i]) << '\n';
        }
        const auto series_path = out_dir / ("series-" + suffix + ".csv");
        write_file_atomic(series_path, csv.str());
        artifacts.series_paths.push_back(series_path);

        json r;
        r["swept_parameter"] = sweep.swept_parameter;
        r["values"] = sweep.values;
        r["measured_times"] = sweep.measured_times;
        r["fitted_exponent"] = sweep.fitted_exponent;
        r["fit_residual"] = sweep.fit_residual;
        result["results"] = r;
        summary << "sweep " << cfg.sweep_parameter << "[" << cfg.sweep_measure
                << "]: exponent=" << format_double(sweep.fitted_exponent)
                << " residual=" << format_double(sweep.fit_residual);
    } else if (cfg.experiment == "limits") {
        MeasurementSetup setup = measurement_setup_of(cfg);
        const LimitsTable table = limits_table(setup, cfg.limits_n, cfg.limits_omega);

        std::ostringstream csv;
        csv << "# seed=" << cfg.seed << " dwell_steps=" << cfg.dwell_steps << " config_hash="
            << std::hex << cfg_hash << std::dec << '\n';
        csv << "n_particles,omega,t_loc,t_reloc\n";
        for (std::size_t i = 0; i < table.n_values.size(); ++i) {
            for (std::size_t j = 0; j < table.omega_values.size(); ++j) {
                csv << format_double(table.n_values[i]) << ','
                    << format_double(table.omega_values[j]) << ','
                    << format_double(table.loc(i, j)) << ',' << format_double(table.reloc(i, j))
                    << '\n';
            }
        }
        const auto series_path = out_dir / ("series-" + suffix + ".csv");
        write_file_atomic(series_path, csv.str());
        artifacts.series_paths.push_back(series_path);

        json r;
        r["n_values"] = table.n_values;
        r["omega_values"] = table.omega_values;
        r["t_loc"] = table.t_loc;
        r["t_reloc"] = table.t_reloc;
        result["results"] = r;
        summary << "limits: " << table.n_values.size() << "x" << table.omega_values.size()
                << " table, t_loc range [" << format_double(*std::min_element(
                       table.t_loc.begin(), table.t_loc.end()))
                << ", " << format_double(*std::max_element(table.t_loc.begin(), table.t_loc.end()))
                << "]";
    } else if (cfg.experiment == "born") {
        TrialSetup setup;
        setup.grid = grid_of(cfg);
        setup.params = params_of(cfg);
        setup.coupling = coupling_of(cfg);
        setup.noise = parse_noise(cfg.noise);
        setup.dwell_steps = cfg.dwell_steps;
        setup.packet_width = cfg.packet_width;
        setup.packet_separation = cfg.separation;
        setup.collapse_threshold = cfg.collapse_threshold;
        setup.t_max = cfg.t_max;
        setup.dt = cfg.dt;
        setup.record_every = cfg.record_every > 0 ? cfg.record_every : 16;
        setup.kinetic_enabled = cfg.kinetic;
        setup.threads = cfg.threads;

        const BornResult born = born_ensemble(cfg.alpha2, cfg.trials, cfg.seed, setup);

        std::ostringstream csv;
        csv << "# seed=" << cfg.seed << " dwell_steps=" << cfg.dwell_steps << " config_hash="
            << std::hex << cfg_hash << std::dec << '\n';
        csv << "trial,seed,selected_component,collapse_time,log_norm,collapsed\n";
        for (std::size_t i = 0; i < born.outcomes.size(); ++i) {
            const TrialOutcome& o = born.outcomes[i];
            csv << i << ',' << o.seed << ',' << o.selected_component << ','
                << format_double(o.collapse_time) << ',' << format_double(o.log_norm) << ','
                << (o.collapsed ? 1 : 0) << '\n';
        }
        const auto series_path = out_dir / ("trials-" + suffix + ".csv");
        write_file_atomic(series_path, csv.str());
        artifacts.series_paths.push_back(series_path);

        json r;
        r["alpha2"] = cfg.alpha2;
        r["frequency"] = born.frequency;
        r["ci95"] = born.ci95;
        r["n_trials"] = born.n_trials;
        r["n_collapsed"] = born.n_collapsed;
        r["mean_collapse_time"] = born.mean_collapse_time;
        json trials = json::array();
        for (const auto& o : born.outcomes) trials.push_back(trial_json(o));
        r["trials"] = trials;
        result["results"] = r;
        summary << "born: alpha2=" << format_double(cfg.alpha2)
                << " frequency=" << format_double(born.frequency)
                << " ci95=" << format_double(born.ci95) << " (" << born.n_collapsed << "/"
                << born.n_trials << " collapsed)";
    } else if (cfg.experiment == "oracle") {
        const OracleResult oracle =
            gambler_oracle(cfg.alpha2, cfg.trials, cfg.gain, cfg.seed, cfg.oracle_threshold,
                           cfg.threads);
        json r;
        r["alpha2"] = cfg.alpha2;
        r["gain"] = cfg.gain;
        r["threshold"] = cfg.oracle_threshold;
        r["frequency"] = oracle.frequency;
        r["n_trials"] = oracle.n_trials;
        r["mean_steps"] = oracle.mean_steps;
        result["results"] = r;
        summary << "oracle: alpha2=" << format_double(cfg.alpha2)
                << " frequency=" << format_double(oracle.frequency)
                << " mean_steps=" << format_double(oracle.mean_steps);
    }

    const auto result_path = out_dir / "result.json";
    write_file_atomic(result_path, result.dump(2) + "\n");
    artifacts.result_path = result_path;
    artifacts.summary = summary.str();
    return artifacts;
}

} // namespace nuqd
