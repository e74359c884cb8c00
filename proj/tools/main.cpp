#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nuqd/config.hpp"
#include "nuqd/errors.hpp"

namespace {

using nlohmann::json;

struct FlagValues {
    std::string config_path;
    std::string experiment_override;

    // every override is staged into a JSON doc so the config layer applies
    // them exactly like config-file keys
    json staged = json::object();
};

void add_common_options(CLI::App* sub, FlagValues& flags) {
    sub->add_option("--config", flags.config_path, "JSON config file");

    auto stage_u64 = [&flags](const std::string& key) {
        return [&flags, key](std::uint64_t v) { flags.staged[key] = v; };
    };
    auto stage_usize = [&flags](const std::string& key) {
        return [&flags, key](std::size_t v) { flags.staged[key] = v; };
    };
    auto stage_double = [&flags](const std::string& key) {
        return [&flags, key](double v) { flags.staged[key] = v; };
    };
    auto stage_string = [&flags](const std::string& key) {
        return [&flags, key](const std::string& v) { flags.staged[key] = v; };
    };
    auto stage_vector = [&flags](const std::string& key) {
        return [&flags, key](const std::vector<double>& v) { flags.staged[key] = v; };
    };
    auto stage_bool = [&flags](const std::string& key) {
        return [&flags, key](bool v) { flags.staged[key] = v; };
    };

    sub->add_option_function<std::uint64_t>("--seed", stage_u64("seed"), "base RNG seed");
    sub->add_option_function<std::string>("--out", stage_string("out_dir"), "output directory");
    sub->add_option_function<std::size_t>("--trials", stage_usize("trials"), "trial count");
    sub->add_option_function<double>("--t-max", stage_double("t_max"), "time budget");
    sub->add_option_function<double>("--t-final", stage_double("t_final"), "evolve duration");
    sub->add_option_function<double>("--dt", stage_double("dt"),
                                     "step size (0 = stability bound)");
    sub->add_option_function<double>("--tail-floor", stage_double("tail_floor"),
                                     "relative amplitude floor (0 = off)");
    sub->add_option_function<std::size_t>("--record-every", stage_usize("record_every"),
                                          "steps between records");
    sub->add_option_function<std::size_t>("--n-points", stage_usize("n_points"), "grid points");
    sub->add_option_function<double>("--spacing", stage_double("spacing"), "lattice spacing");
    sub->add_option_function<double>("--origin", stage_double("origin"), "grid origin");
    sub->add_option_function<double>("--n-particles", stage_double("n_particles"), "N");
    sub->add_option_function<double>("--mass", stage_double("mass"), "particle mass");
    sub->add_option_function<double>("--hbar", stage_double("hbar"), "hbar");
    sub->add_option_function<std::string>("--coupling", stage_string("coupling_mode"),
                                          "omega|gamma|gravity");
    sub->add_option_function<double>("--omega", stage_double("omega"), "trap frequency");
    sub->add_option_function<double>("--gamma", stage_double("gamma"), "per-particle coupling");
    sub->add_option_function<double>("--g-newton", stage_double("g_newton"), "G");
    sub->add_option_function<double>("--density", stage_double("density"), "mass density");
    sub->add_option_function<std::string>("--potential", stage_string("potential"),
                                          "potential kind");
    sub->add_option_function<double>("--x0", stage_double("x0"), "localization center");
    sub->add_option_function<std::string>("--noise", stage_string("noise"),
                                          "fixed|white_noise|norm_tilted");
    sub->add_option_function<std::uint32_t>(
        "--dwell",
        [&flags](std::uint32_t v) { flags.staged["dwell_steps"] = v; },
        "steps per noise draw");
    sub->add_option_function<std::string>("--initial", stage_string("initial"),
                                          "uniform|gaussian|two_packet");
    sub->add_option_function<double>("--center", stage_double("center"), "packet center");
    sub->add_option_function<double>("--width", stage_double("width"), "packet width (evolve)");
    sub->add_option_function<double>("--packet-width", stage_double("packet_width"),
                                     "packet width (measurements)");
    sub->add_option_function<double>("--momentum", stage_double("momentum"), "packet momentum");
    sub->add_option_function<double>("--alpha2", stage_double("alpha2"), "component-0 weight");
    sub->add_option_function<double>("--x1", stage_double("x1"), "packet 1 position");
    sub->add_option_function<double>("--x2", stage_double("x2"), "packet 2 position");
    sub->add_option_function<double>("--separation", stage_double("separation"),
                                     "born packet separation");
    sub->add_option_function<double>("--distance", stage_double("distance"),
                                     "relocation distance");
    sub->add_option_function<double>("--gain", stage_double("gain"), "oracle gain per step");
    sub->add_option_function<double>("--collapse-threshold", stage_double("collapse_threshold"),
                                     "trial win level = 1 - threshold");
    sub->add_option_function<double>("--oracle-threshold", stage_double("oracle_threshold"),
                                     "oracle absorption threshold");
    sub->add_option_function<std::string>("--sweep-parameter", stage_string("sweep_parameter"),
                                          "omega|n_particles|distance");
    sub->add_option_function<std::vector<double>>("--sweep-values", stage_vector("sweep_values"),
                                                  "sweep points")
        ->delimiter(',');
    sub->add_option_function<std::string>("--sweep-measure", stage_string("sweep_measure"),
                                          "loc|reloc");
    sub->add_option_function<std::vector<double>>("--limits-n", stage_vector("limits_n"),
                                                  "limits table N values")
        ->delimiter(',');
    sub->add_option_function<std::vector<double>>("--limits-omega", stage_vector("limits_omega"),
                                                  "limits table omega values")
        ->delimiter(',');
    sub->add_option_function<std::vector<double>>(
        "--boundaries", stage_vector("region_boundaries"), "region boundaries")
        ->delimiter(',');
    sub->add_option_function<int>(
        "--threads", [&flags](int v) { flags.staged["threads"] = v; }, "worker threads (0 = hw)");
    sub->add_flag_function(
        "--kinetic,!--no-kinetic", stage_bool("kinetic"), "toggle the kinetic term");
    sub->add_flag_function(
        "--renormalize,!--no-renormalize", stage_bool("renormalize"),
        "toggle per-step renormalization");
}

json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw nuqd::IoError("cannot open config file " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw nuqd::ConfigError("config file " + path + ": " + e.what());
    }
    return doc;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"nuqd: non-unitary dynamics of a collective coordinate"};
    app.require_subcommand(1);

    const std::vector<std::string> experiments = {"evolve", "localization", "relocation",
                                                  "sweep",  "limits",       "born",
                                                  "oracle"};
    std::map<std::string, FlagValues> flag_map;
    for (const auto& name : experiments) {
        auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
        add_common_options(sub, flag_map[name]);
    }
    auto* validate_sub = app.add_subcommand("validate", "check a config without running");
    FlagValues validate_flags;
    add_common_options(validate_sub, validate_flags);
    validate_sub->add_option("--experiment", validate_flags.experiment_override,
                             "experiment to validate");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        const bool validating = validate_sub->parsed();
        FlagValues* flags = nullptr;
        std::string experiment;
        if (validating) {
            flags = &validate_flags;
            experiment = "evolve";
        } else {
            for (const auto& name : experiments) {
                if (app.get_subcommand(name)->parsed()) {
                    flags = &flag_map[name];
                    experiment = name;
                    break;
                }
            }
        }

        json file_doc = json::object();
        if (!flags->config_path.empty()) file_doc = load_config_file(flags->config_path);

        if (validating) {
            if (file_doc.contains("experiment")) {
                experiment = file_doc["experiment"].get<std::string>();
            }
            if (!flags->experiment_override.empty()) experiment = flags->experiment_override;
        }

        nuqd::RunConfig cfg = nuqd::default_config(experiment);
        nuqd::apply_json(cfg, file_doc);
        nuqd::apply_json(cfg, flags->staged);
        cfg.experiment = experiment;

        if (validating) {
            const auto diags = nuqd::validate(cfg);
            for (const auto& d : diags) std::cout << d << '\n';
            if (diags.empty()) std::cout << "config ok\n";
            return diags.empty() ? 0 : 2;
        }

        const nuqd::RunArtifacts artifacts = nuqd::run_experiment(cfg);
        std::cout << artifacts.summary << '\n';
        return 0;
    } catch (const nuqd::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const nuqd::IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const nuqd::RunError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
