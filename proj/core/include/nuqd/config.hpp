#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace nuqd {

/// Declarative description of one experiment run. Serialized into every
/// result document so any output can be replayed exactly.
struct RunConfig {
    std::string experiment = "evolve";

    // grid
    std::size_t n_points = 1024;
    double spacing = 1.0;
    double origin = -512.0;

    // physical parameters
    double n_particles = 10.0;
    double mass = 1.0;
    double hbar = 1.0;

    // coupling -> kappa
    std::string coupling_mode = "omega"; // omega | gamma | gravity
    double omega = 0.1;
    double gamma = 0.0;
    double g_newton = 0.0;
    double density = 0.0;

    // potential term (evolve experiment)
    std::string potential = "non_hermitian_fixed";
    double x0 = 0.0;
    bool kinetic = true;
    bool renormalize = true;

    // localization-center noise
    std::string noise = "fixed"; // fixed | white_noise | norm_tilted
    bool has_seed = false;
    std::uint64_t seed = 0;
    std::uint32_t dwell_steps = 1;

    // initial state (evolve experiment)
    std::string initial = "gaussian"; // uniform | gaussian | two_packet
    double center = 0.0;
    double width = 4.0;
    double momentum = 0.0;

    // two-packet superpositions (evolve two_packet, born)
    double alpha2 = 0.64;
    double x1 = -40.0;
    double x2 = 40.0;
    double separation = 80.0;
    double collapse_threshold = 1e-3;

    // run controls
    double tail_floor = 1e-14; // relative amplitude floor inside evolve
    double dt = 0.0;        // 0 = stability bound
    double t_final = 10.0;  // evolve
    double t_max = 0.0;     // 0 = derived from the analytic estimate
    std::size_t record_every = 0; // 0 = derived
    std::size_t trials = 2000;
    double gain = 0.01;
    double oracle_threshold = 1e-6;
    double distance = 10.0;
    double packet_width = 4.0;

    // sweep experiment
    std::string sweep_parameter = "omega";
    std::vector<double> sweep_values;
    std::string sweep_measure = "loc";

    // limits experiment
    std::vector<double> limits_n;
    std::vector<double> limits_omega;

    std::vector<double> region_boundaries; // evolve: optional weight tracking

    int threads = 0;
    std::string out_dir; // empty: $NUQD_OUT or the working directory
};

/// Spec defaults for the named experiment.
RunConfig default_config(const std::string& experiment);

/// Overlay the keys present in a JSON document (config file or the embedded
/// "config" object of a result document) onto cfg. Unknown keys are rejected.
void apply_json(RunConfig& cfg, const nlohmann::json& doc);

/// Canonical JSON form; apply_json(default_config(e), to_json(cfg)) == cfg.
nlohmann::json to_json(const RunConfig& cfg);

/// Every violated invariant, without running anything. Empty means runnable.
std::vector<std::string> validate(const RunConfig& cfg);

struct RunArtifacts {
    std::string summary;                // one line, printed by the CLI
    std::filesystem::path result_path;  // result.json
    std::vector<std::filesystem::path> series_paths;
};

/// Validate, execute and write artifacts (result.json + CSV series) into the
/// resolved output directory. Throws ConfigError / RunError / IoError.
RunArtifacts run_experiment(const RunConfig& cfg);

} // namespace nuqd
