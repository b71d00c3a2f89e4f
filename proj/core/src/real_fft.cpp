#include "real_fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <vector>

#include "bmvdr/error.hpp"

namespace bmvdr::detail {

namespace {
// FFTW's planner is not thread-safe; new-array execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct RealFft::Plans {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
  ~Plans() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (inverse) fftw_destroy_plan(inverse);
  }
};

RealFft::RealFft(std::size_t n) : n_(n), plans_(std::make_unique<Plans>()) {
  if (n < 2 || n % 2 != 0) throw DomainError("real FFT size must be even and >= 2");
  std::vector<double> real(n);
  std::vector<fftw_complex> cplx(bins());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  std::lock_guard<std::mutex> lock(planner_mutex());
  plans_->forward = fftw_plan_dft_r2c_1d(static_cast<int>(n), real.data(), cplx.data(), flags);
  plans_->inverse = fftw_plan_dft_c2r_1d(static_cast<int>(n), cplx.data(), real.data(), flags | FFTW_DESTROY_INPUT);
  if (!plans_->forward || !plans_->inverse) throw Error("failed to create FFT plans");
}

RealFft::~RealFft() = default;
RealFft::RealFft(RealFft&&) noexcept = default;
RealFft& RealFft::operator=(RealFft&&) noexcept = default;

void RealFft::forward(std::span<const double> in, std::span<std::complex<double>> out) const {
  if (in.size() != n_ || out.size() != bins()) throw DomainError("real FFT: buffer size mismatch");
  static_assert(sizeof(std::complex<double>) == sizeof(fftw_complex));
  // r2c does not modify its input.
  fftw_execute_dft_r2c(plans_->forward, const_cast<double*>(in.data()), reinterpret_cast<fftw_complex*>(out.data()));
}

void RealFft::inverse(std::span<const std::complex<double>> in, std::span<double> out) const {
  if (in.size() != bins() || out.size() != n_) throw DomainError("real FFT: buffer size mismatch");
  std::vector<std::complex<double>> buf(in.begin(), in.end());
  buf.front() = buf.front().real();
  buf.back() = buf.back().real();
  fftw_execute_dft_c2r(plans_->inverse, reinterpret_cast<fftw_complex*>(buf.data()), out.data());
  const double scale = 1.0 / static_cast<double>(n_);
  for (double& v : out) v *= scale;
}

}  // namespace bmvdr::detail
