#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace nuqd {

/// In-place complex FFT workspace of fixed length. Owns an aligned buffer and
/// forward/backward plans. Transforms are unnormalized; the caller folds the
/// 1/n factor into whatever multiplier it applies in between.
///
/// Plan creation is serialized internally (the planner is not thread-safe);
/// separate instances can execute concurrently.
class Fft {
public:
    explicit Fft(std::size_t n);
    ~Fft();

    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;
    Fft(Fft&& other) noexcept;
    Fft& operator=(Fft&& other) noexcept;

    std::size_t size() const { return n_; }
    std::span<std::complex<double>> buffer() { return {buf_, n_}; }
    std::span<const std::complex<double>> buffer() const { return {buf_, n_}; }

    void forward();
    void backward();

private:
    std::size_t n_ = 0;
    std::complex<double>* buf_ = nullptr;
    void* plan_fwd_ = nullptr;
    void* plan_bwd_ = nullptr;
};

/// Momentum-space wavenumbers in DFT order: k_j = 2*pi*j/(n*a) for j < n/2,
/// then the negative branch.
std::vector<double> dft_wavenumbers(std::size_t n, double spacing);

} // namespace nuqd
