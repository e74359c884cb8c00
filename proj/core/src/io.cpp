#include "nuqd/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include "nuqd/errors.hpp"

namespace nuqd {

std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

std::uint64_t fnv1a_hash(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path(), ec);
    }
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out << text;
        if (!out) throw IoError("write failed for " + tmp.string());
    }
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("rename to " + path.string() + " failed: " + ec.message());
}

void write_wavefunction_csv(const std::filesystem::path& path, const WaveFunction& psi) {
    std::ostringstream out;
    out << "position,re,im,abs2\n";
    const Grid& g = psi.grid();
    for (std::size_t j = 0; j < psi.size(); ++j) {
        const cplx a = psi[j];
        out << format_double(g.position(j)) << ',' << format_double(a.real()) << ','
            << format_double(a.imag()) << ',' << format_double(std::norm(a)) << '\n';
    }
    write_file_atomic(path, out.str());
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj,
                          std::uint64_t seed, std::uint32_t dwell_steps,
                          std::uint64_t config_hash) {
    std::ostringstream out;
    out << "# seed=" << seed << " dwell_steps=" << dwell_steps << " config_hash=" << std::hex
        << config_hash << std::dec << '\n';
    out << "t,log_norm,x_mean,spread";
    const std::size_t n_regions =
        traj.region_boundaries.empty() ? 0 : traj.region_boundaries.size() + 1;
    for (std::size_t r = 0; r < n_regions; ++r) out << ",w_region_" << r;
    out << '\n';
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        out << format_double(traj.times[i]) << ',' << format_double(traj.log_norms[i]) << ','
            << format_double(traj.x_means[i]) << ',' << format_double(traj.spreads[i]);
        if (n_regions > 0) {
            for (double w : traj.region_weight_series[i]) out << ',' << format_double(w);
        }
        out << '\n';
    }
    write_file_atomic(path, out.str());
}

} // namespace nuqd
