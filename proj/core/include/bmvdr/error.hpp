#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bmvdr {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Violated precondition or malformed input (bad index, size mismatch, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

class NotPositiveDefinite : public Error {
 public:
  explicit NotPositiveDefinite(std::size_t pivot)
      : Error("matrix is not positive definite (pivot " + std::to_string(pivot) + ")"),
        pivot_(pivot) {}
  std::size_t pivot() const noexcept { return pivot_; }

 private:
  std::size_t pivot_;
};

class ConvergenceFailure : public Error {
 public:
  explicit ConvergenceFailure(double residual)
      : Error("eigensolver did not converge (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

// A normalizing entry is numerically zero; the estimate for this bin is unusable.
class ZeroDenominator : public Error {
 public:
  using Error::Error;
};

// Covariance-whitening back-transform has a vanishing reference entry.
class NearZeroReference : public Error {
 public:
  using Error::Error;
};

}  // namespace bmvdr
