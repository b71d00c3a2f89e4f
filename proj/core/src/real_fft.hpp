#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>

namespace bmvdr::detail {

// Unnormalized forward / 1/n-normalized inverse real FFT of a fixed size.
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(RealFft&&) noexcept;
  RealFft& operator=(RealFft&&) noexcept;

  std::size_t size() const { return n_; }
  std::size_t bins() const { return n_ / 2 + 1; }

  void forward(std::span<const double> in, std::span<std::complex<double>> out) const;
  // DC and Nyquist imaginary parts are discarded.
  void inverse(std::span<const std::complex<double>> in, std::span<double> out) const;

 private:
  struct Plans;
  std::size_t n_;
  std::unique_ptr<Plans> plans_;
};

}  // namespace bmvdr::detail
