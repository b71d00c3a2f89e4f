#include "bmvdr/linalg.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "bmvdr/error.hpp"

namespace bmvdr {

namespace {

constexpr double kHermitianTolerance = 1e-12;
constexpr double kEigenResidualTolerance = 1e-9;

void require_square(const CMatrix& m) {
  if (m.rows() != m.cols()) {
    throw DomainError("expected a square matrix, got " + std::to_string(m.rows()) + "x" +
                      std::to_string(m.cols()));
  }
}

EigenPair top_eigenpair(const HermitianMatrix& a) {
  const Eigen::Index n = a.matrix().rows();
  if (n == 0) throw DomainError("eigenproblem on an empty matrix");
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(a.matrix());
  EigenPair out;
  if (solver.info() != Eigen::Success) {
    throw ConvergenceFailure(std::numeric_limits<double>::quiet_NaN());
  }
  out.value = solver.eigenvalues()(n - 1);
  out.vector = solver.eigenvectors().col(n - 1);
  return out;
}

}  // namespace

HermitianMatrix::HermitianMatrix(const CMatrix& m) : m_(m) {
  require_square(m_);
  const double scale = m_.norm();
  const double asym = (m_ - m_.adjoint()).norm();
  if (asym > kHermitianTolerance * scale * 2.0) {
    throw DomainError("matrix is not Hermitian (relative asymmetry " + std::to_string(asym / scale) + ")");
  }
  hermitize();
}

HermitianMatrix HermitianMatrix::symmetrized(const CMatrix& m) {
  require_square(m);
  HermitianMatrix h;
  h.m_ = m;
  h.hermitize();
  return h;
}

HermitianMatrix HermitianMatrix::identity(std::size_t dim, double scale) {
  HermitianMatrix h;
  const auto n = static_cast<Eigen::Index>(dim);
  h.m_ = CMatrix::Identity(n, n) * scale;
  return h;
}

HermitianMatrix HermitianMatrix::zeros(std::size_t dim) {
  HermitianMatrix h;
  const auto n = static_cast<Eigen::Index>(dim);
  h.m_ = CMatrix::Zero(n, n);
  return h;
}

HermitianMatrix HermitianMatrix::outer(const CVector& v, double scale) {
  HermitianMatrix h;
  h.m_ = scale * (v * v.adjoint());
  h.hermitize();
  return h;
}

void HermitianMatrix::hermitize() {
  m_ = (0.5 * (m_ + m_.adjoint())).eval();
  for (Eigen::Index i = 0; i < m_.rows(); ++i) m_(i, i) = Complex(m_(i, i).real(), 0.0);
}

void HermitianMatrix::blend_outer(double alpha, double beta, const CVector& v) {
  if (v.size() != m_.rows()) throw DomainError("vector dimension does not match matrix");
  m_ *= alpha;
  m_.noalias() += beta * (v * v.adjoint());
  hermitize();
}

void HermitianMatrix::add_diagonal(double delta) {
  for (Eigen::Index i = 0; i < m_.rows(); ++i) m_(i, i) += delta;
}

HermitianMatrix HermitianMatrix::operator+(const HermitianMatrix& o) const {
  return symmetrized(m_ + o.m_);
}

HermitianMatrix HermitianMatrix::operator-(const HermitianMatrix& o) const {
  return symmetrized(m_ - o.m_);
}

HermitianMatrix HermitianMatrix::operator*(double s) const { return symmetrized(m_ * s); }

CVector CholeskyFactor::solve(const CVector& b) const {
  CVector y = upper_.triangularView<Eigen::Upper>().adjoint().solve(b);
  return upper_.triangularView<Eigen::Upper>().solve(y);
}

CMatrix CholeskyFactor::solve(const CMatrix& b) const {
  CMatrix y = upper_.triangularView<Eigen::Upper>().adjoint().solve(b);
  return upper_.triangularView<Eigen::Upper>().solve(y);
}

CMatrix CholeskyFactor::whiten(const CMatrix& b) const {
  return upper_.triangularView<Eigen::Upper>().adjoint().solve(b);
}

CMatrix CholeskyFactor::unwhiten_inverse(const CMatrix& b) const {
  return upper_.triangularView<Eigen::Upper>().solve(b);
}

HermitianMatrix CholeskyFactor::whiten_congruence(const HermitianMatrix& a) const {
  // X = R^{-H} A, then R^{-H} A R^{-1} = (R^{-H} X^H)^H.
  CMatrix x = whiten(a.matrix());
  CMatrix c = whiten(CMatrix(x.adjoint())).adjoint();
  return HermitianMatrix::symmetrized(c);
}

double CholeskyFactor::min_pivot_squared() const {
  return upper_.diagonal().real().cwiseAbs2().minCoeff();
}

CholeskyFactor cholesky(const HermitianMatrix& a, double pivot_floor) {
  const auto n = static_cast<Eigen::Index>(a.dim());
  if (n == 0) throw DomainError("cholesky of an empty matrix");
  const double floor_abs = pivot_floor > 0.0 ? pivot_floor * a.trace() / static_cast<double>(n) : 0.0;
  const CMatrix& m = a.matrix();
  CMatrix r = CMatrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double s = m(j, j).real();
    for (Eigen::Index k = 0; k < j; ++k) s -= std::norm(r(k, j));
    if (!(s > 0.0) || !(s > floor_abs) || !std::isfinite(s)) {
      throw NotPositiveDefinite(static_cast<std::size_t>(j));
    }
    const double pivot = std::sqrt(s);
    r(j, j) = pivot;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      Complex acc = m(j, i);
      for (Eigen::Index k = 0; k < j; ++k) acc -= std::conj(r(k, j)) * r(k, i);
      r(j, i) = acc / pivot;
    }
  }
  return CholeskyFactor(std::move(r));
}

bool passes_pd_check(const HermitianMatrix& a) {
  try {
    cholesky(a, kPdPivotFloor);
    return true;
  } catch (const NotPositiveDefinite&) {
    return false;
  }
}

LoadedFactor cholesky_with_loading(const HermitianMatrix& a, double loading_factor) {
  try {
    return {cholesky(a, kPdPivotFloor), false, 0.0};
  } catch (const NotPositiveDefinite&) {
  }
  const double delta = loading_factor * a.trace() / static_cast<double>(a.dim());
  if (!(delta > 0.0)) throw NotPositiveDefinite(0);
  HermitianMatrix loaded = a;
  loaded.add_diagonal(delta);
  return {cholesky(loaded, kPdPivotFloor), true, delta};
}

CVector solve_hpd(const HermitianMatrix& a, const CVector& b) {
  if (b.size() != static_cast<Eigen::Index>(a.dim())) throw DomainError("right-hand side dimension mismatch");
  return cholesky(a).solve(b);
}

void apply_phase_convention(CVector& v) {
  if (v.size() == 0) return;
  Eigen::Index imax = 0;
  v.cwiseAbs2().maxCoeff(&imax);
  const double mag = std::abs(v(imax));
  if (mag == 0.0) return;
  v *= std::conj(v(imax)) / mag;
  v(imax) = Complex(v(imax).real(), 0.0);
}

double rayleigh_quotient(const HermitianMatrix& a, const CVector& v) {
  return (v.adjoint() * a.matrix() * v)(0).real() / v.squaredNorm();
}

double rayleigh_quotient(const HermitianMatrix& a, const HermitianMatrix& b, const CVector& v) {
  const double num = (v.adjoint() * a.matrix() * v)(0).real();
  const double den = (v.adjoint() * b.matrix() * v)(0).real();
  return num / den;
}

EigenPair principal_eigvec_hermitian(const HermitianMatrix& a) {
  EigenPair pair = top_eigenpair(a);
  pair.vector.normalize();
  apply_phase_convention(pair.vector);
  const double residual = (a.matrix() * pair.vector - pair.value * pair.vector).norm();
  if (!(residual <= kEigenResidualTolerance * a.norm()) && a.norm() > 0.0) {
    throw ConvergenceFailure(residual);
  }
  return pair;
}

EigenPair principal_eigvec_pencil(const HermitianMatrix& a, const HermitianMatrix& b) {
  if (a.dim() != b.dim()) throw DomainError("pencil matrices differ in dimension");
  return principal_eigvec_pencil(a, cholesky(b), b);
}

EigenPair principal_eigvec_pencil(const HermitianMatrix& a, const CholeskyFactor& b_factor,
                                  const HermitianMatrix& b) {
  if (a.dim() != b_factor.dim()) throw DomainError("pencil matrices differ in dimension");
  const HermitianMatrix whitened = b_factor.whiten_congruence(a);
  EigenPair top = top_eigenpair(whitened);
  CVector c = b_factor.unwhiten_inverse(top.vector);
  c.normalize();
  apply_phase_convention(c);
  EigenPair out{top.value, std::move(c)};
  const CVector residual = a.matrix() * out.vector - out.value * (b.matrix() * out.vector);
  const double scale = a.norm() + std::abs(out.value) * b.norm();
  if (!(residual.norm() <= kEigenResidualTolerance * scale) && scale > 0.0) {
    throw ConvergenceFailure(residual.norm());
  }
  return out;
}

}  // namespace bmvdr
