#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "nuqd/evolution.hpp"
#include "nuqd/wavefunction.hpp"

namespace nuqd {

/// Shortest decimal form that round-trips the exact IEEE-754 double.
std::string format_double(double value);

/// FNV-1a over a string; used to tag output files with a hash of the
/// serialized run configuration.
std::uint64_t fnv1a_hash(const std::string& text);

/// Write text to path via a temp file + rename so readers never see a
/// partially written artifact.
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

/// Snapshot CSV: position, re, im, abs2 with a header row.
void write_wavefunction_csv(const std::filesystem::path& path, const WaveFunction& psi);

/// Series CSV: t, log_norm, x_mean, spread, w_region_0..k. The comment line
/// carries seed, dwell_steps and the config hash for exact replay.
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj,
                          std::uint64_t seed, std::uint32_t dwell_steps,
                          std::uint64_t config_hash);

} // namespace nuqd
