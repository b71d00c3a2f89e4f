#pragma once

#include <complex>
#include <cstddef>

#include <Eigen/Dense>

namespace bmvdr {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

// Dense complex matrix that is Hermitian by construction. Inputs are
// re-Hermitized, H <- (H + H^H) / 2.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;

  // Throws DomainError when `m` is not square or deviates from Hermitian by
  // more than 1e-12 relative (Frobenius).
  explicit HermitianMatrix(const CMatrix& m);

  // Re-Hermitizes without the tolerance check; for matrices produced by
  // internal arithmetic whose asymmetry is pure rounding.
  static HermitianMatrix symmetrized(const CMatrix& m);
  static HermitianMatrix identity(std::size_t dim, double scale = 1.0);
  static HermitianMatrix zeros(std::size_t dim);
  // scale * v v^H
  static HermitianMatrix outer(const CVector& v, double scale = 1.0);

  std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
  const CMatrix& matrix() const { return m_; }
  Complex operator()(std::size_t i, std::size_t j) const { return m_(i, j); }
  double diag(std::size_t i) const { return m_(i, i).real(); }
  double trace() const { return m_.diagonal().real().sum(); }
  double norm() const { return m_.norm(); }

  // this <- alpha * this + beta * v v^H, followed by re-Hermitization.
  void blend_outer(double alpha, double beta, const CVector& v);
  void add_diagonal(double delta);

  HermitianMatrix operator+(const HermitianMatrix& o) const;
  HermitianMatrix operator-(const HermitianMatrix& o) const;
  HermitianMatrix operator*(double s) const;

 private:
  void hermitize();
  CMatrix m_;
};

// Upper-triangular factor R with A = R^H R.
class CholeskyFactor {
 public:
  CholeskyFactor() = default;
  explicit CholeskyFactor(CMatrix upper) : upper_(std::move(upper)) {}

  std::size_t dim() const { return static_cast<std::size_t>(upper_.rows()); }
  const CMatrix& upper() const { return upper_; }
  CMatrix lower() const { return upper_.adjoint(); }

  // A^{-1} b
  CVector solve(const CVector& b) const;
  CMatrix solve(const CMatrix& b) const;
  // R^{-H} b
  CMatrix whiten(const CMatrix& b) const;
  // R^{-1} b
  CMatrix unwhiten_inverse(const CMatrix& b) const;
  // R^H b
  CMatrix apply_lower(const CMatrix& b) const { return upper_.adjoint() * b; }
  // R^{-H} A R^{-1}
  HermitianMatrix whiten_congruence(const HermitianMatrix& a) const;
  // smallest squared pivot, i.e. min_i R_ii^2
  double min_pivot_squared() const;

 private:
  CMatrix upper_;
};

struct EigenPair {
  double value = 0.0;
  CVector vector;
};

// Relative floor on squared Cholesky pivots used by the positive-definiteness
// check shared by the tracker, estimators and beamformer: every pivot^2 must
// exceed kPdPivotFloor * trace(A) / dim.
inline constexpr double kPdPivotFloor = 1e-10;
// Diagonal loading delta = kLoadingFactor * trace(A) / dim.
inline constexpr double kLoadingFactor = 1e-6;

// Throws NotPositiveDefinite(pivot) when a pivot is not strictly positive or
// its square falls below pivot_floor * trace / dim.
CholeskyFactor cholesky(const HermitianMatrix& a, double pivot_floor = 0.0);

// True when cholesky(a, kPdPivotFloor) succeeds.
bool passes_pd_check(const HermitianMatrix& a);

struct LoadedFactor {
  CholeskyFactor factor;
  bool loading_applied = false;
  double delta = 0.0;
};

// Factors `a`, applying diagonal loading once when the PD check fails.
// Throws NotPositiveDefinite if the loaded matrix still fails.
LoadedFactor cholesky_with_loading(const HermitianMatrix& a, double loading_factor = kLoadingFactor);

CVector solve_hpd(const HermitianMatrix& a, const CVector& b);

// Largest eigenpair of a Hermitian matrix. The eigenvector has unit norm and
// its largest-magnitude entry is real and nonnegative.
EigenPair principal_eigvec_hermitian(const HermitianMatrix& a);

// argmax_c (c^H A c) / (c^H B c) via whitening with B = R^H R. The returned
// vector has unit norm and follows the same phase convention.
EigenPair principal_eigvec_pencil(const HermitianMatrix& a, const HermitianMatrix& b);
EigenPair principal_eigvec_pencil(const HermitianMatrix& a, const CholeskyFactor& b_factor,
                                  const HermitianMatrix& b);

// Rotates v so that its largest-magnitude entry is real and nonnegative.
void apply_phase_convention(CVector& v);

double rayleigh_quotient(const HermitianMatrix& a, const CVector& v);
double rayleigh_quotient(const HermitianMatrix& a, const HermitianMatrix& b, const CVector& v);

}  // namespace bmvdr
