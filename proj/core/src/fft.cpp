#include "nuqd/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <numbers>
#include <vector>

namespace nuqd {

namespace {
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
} // namespace

Fft::Fft(std::size_t n) : n_(n) {
    std::lock_guard<std::mutex> lock(planner_mutex());
    buf_ = reinterpret_cast<std::complex<double>*>(fftw_alloc_complex(n));
    auto* raw = reinterpret_cast<fftw_complex*>(buf_);
    plan_fwd_ = fftw_plan_dft_1d(static_cast<int>(n), raw, raw, FFTW_FORWARD, FFTW_ESTIMATE);
    plan_bwd_ = fftw_plan_dft_1d(static_cast<int>(n), raw, raw, FFTW_BACKWARD, FFTW_ESTIMATE);
}

Fft::~Fft() {
    if (!buf_) return;
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
    fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
    fftw_free(buf_);
    buf_ = nullptr;
}

Fft::Fft(Fft&& other) noexcept
    : n_(other.n_), buf_(other.buf_), plan_fwd_(other.plan_fwd_), plan_bwd_(other.plan_bwd_) {
    other.buf_ = nullptr;
    other.plan_fwd_ = nullptr;
    other.plan_bwd_ = nullptr;
}

Fft& Fft::operator=(Fft&& other) noexcept {
    if (this != &other) {
        this->~Fft();
        n_ = other.n_;
        buf_ = other.buf_;
        plan_fwd_ = other.plan_fwd_;
        plan_bwd_ = other.plan_bwd_;
        other.buf_ = nullptr;
        other.plan_fwd_ = nullptr;
        other.plan_bwd_ = nullptr;
    }
    return *this;
}

void Fft::forward() { fftw_execute(static_cast<fftw_plan>(plan_fwd_)); }
void Fft::backward() { fftw_execute(static_cast<fftw_plan>(plan_bwd_)); }

std::vector<double> dft_wavenumbers(std::size_t n, double spacing) {
    std::vector<double> ks(n);
    const double dk = 2.0 * std::numbers::pi / (static_cast<double>(n) * spacing);
    for (std::size_t j = 0; j < n; ++j) {
        const auto sj = static_cast<std::ptrdiff_t>(j);
        const auto sn = static_cast<std::ptrdiff_t>(n);
        ks[j] = dk * static_cast<double>(sj < sn / 2 ? sj : sj - sn);
    }
    return ks;
}

} // namespace nuqd
