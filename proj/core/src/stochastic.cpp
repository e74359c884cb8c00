#include "nuqd/stochastic.hpp"

#include <cmath>

#include "nuqd/errors.hpp"

namespace nuqd {

namespace rng {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo, std::uint32_t& hi) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    lo = static_cast<std::uint32_t>(p);
    hi = static_cast<std::uint32_t>(p >> 32);
}

inline void round_once(std::uint32_t c[4], const std::uint32_t k[2]) {
    std::uint32_t lo0, hi0, lo1, hi1;
    mulhilo(kMul0, c[0], lo0, hi0);
    mulhilo(kMul1, c[2], lo1, hi1);
    const std::uint32_t n0 = hi1 ^ c[1] ^ k[0];
    const std::uint32_t n1 = lo1;
    const std::uint32_t n2 = hi0 ^ c[3] ^ k[1];
    const std::uint32_t n3 = lo0;
    c[0] = n0;
    c[1] = n1;
    c[2] = n2;
    c[3] = n3;
}

} // namespace

std::uint64_t philox(std::uint64_t key, std::uint64_t counter, std::uint64_t salt) {
    std::uint32_t c[4] = {
        static_cast<std::uint32_t>(counter),
        static_cast<std::uint32_t>(counter >> 32),
        static_cast<std::uint32_t>(salt),
        static_cast<std::uint32_t>(salt >> 32),
    };
    std::uint32_t k[2] = {
        static_cast<std::uint32_t>(key),
        static_cast<std::uint32_t>(key >> 32),
    };
    for (int r = 0; r < 10; ++r) {
        round_once(c, k);
        k[0] += kWeyl0;
        k[1] += kWeyl1;
    }
    return (static_cast<std::uint64_t>(c[1]) << 32) | c[0];
}

double uniform01(std::uint64_t key, std::uint64_t counter, std::uint64_t salt) {
    return static_cast<double>(philox(key, counter, salt) >> 11) * 0x1.0p-53;
}

} // namespace rng

void X0Source::validate() const {
    if (dwell_steps < 1) throw ConfigError("dwell_steps must be >= 1");
    if (kind == NoiseKind::fixed && !std::isfinite(value)) {
        throw ConfigError("fixed X0 value must be finite");
    }
}

double next_x0(const X0Source& source, const Grid& grid, std::uint64_t step_index) {
    switch (source.kind) {
    case NoiseKind::fixed:
        return source.value;
    case NoiseKind::white_noise: {
        const std::uint64_t window = step_index / source.dwell_steps;
        const std::uint64_t word = rng::philox(source.seed, window, rng::stream_x0);
        // n_points is a power of two, so masking gives an unbiased lattice site.
        const std::size_t idx = static_cast<std::size_t>(word) & (grid.n_points() - 1);
        return grid.position(idx);
    }
    case NoiseKind::norm_tilted:
        throw ConfigError("norm_tilted X0 requires the evolving state; use evolve()");
    }
    throw ConfigError("unknown noise kind");
}

void CouplingSpec::validate(const PhysicalParams& params) const {
    params.validate();
    switch (mode) {
    case CouplingMode::omega:
        if (!(omega > 0.0)) throw ConfigError("omega coupling requires omega > 0");
        break;
    case CouplingMode::gamma:
        if (!(gamma > 0.0)) throw ConfigError("gamma coupling requires gamma > 0");
        break;
    case CouplingMode::gravity:
        if (!(g_newton > 0.0) || !(density > 0.0)) {
            throw ConfigError("gravity coupling requires g_newton > 0 and density > 0");
        }
        break;
    }
}

double coupling_from(const CouplingSpec& spec, const PhysicalParams& params) {
    spec.validate(params);
    switch (spec.mode) {
    case CouplingMode::omega:
        return 0.5 * params.n_particles * params.mass * spec.omega * spec.omega;
    case CouplingMode::gamma:
        return params.n_particles * spec.gamma;
    case CouplingMode::gravity:
        return 0.5 * params.n_particles * params.mass * spec.g_newton * spec.density;
    }
    throw ConfigError("unknown coupling mode");
}

} // namespace nuqd
