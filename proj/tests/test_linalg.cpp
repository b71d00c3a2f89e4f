#include <doctest.h>

#include <random>

#include "bmvdr/error.hpp"
#include "bmvdr/linalg.hpp"
#include "test_util.hpp"

using namespace bmvdr;
using namespace bmvdr::test;

TEST_CASE("Hermitian construction") {
  CMatrix m(2, 2);
  m << Complex(2, 0), Complex(1, 1), Complex(1, -1), Complex(3, 0);
  const HermitianMatrix h(m);
  CHECK(h.trace() == doctest::Approx(5.0));
  CMatrix bad = m;
  bad(0, 1) = Complex(5, 0);
  CHECK_THROWS_AS(HermitianMatrix{bad}, DomainError);
  CHECK_THROWS_AS(HermitianMatrix{CMatrix(2, 3)}, DomainError);

  // Rounding-level asymmetry is absorbed and the result is exactly Hermitian.
  CMatrix near = m;
  near(0, 1) += Complex(1e-15, 0);
  const HermitianMatrix hn(near);
  CHECK((hn.matrix() - hn.matrix().adjoint()).norm() == 0.0);
}

TEST_CASE("blend_outer keeps exact Hermitian symmetry") {
  std::mt19937_64 rng(3);
  HermitianMatrix h = HermitianMatrix::identity(5, 1e-3);
  for (int i = 0; i < 200; ++i) h.blend_outer(0.93, 0.07, random_cvector(5, rng));
  CHECK((h.matrix() - h.matrix().adjoint()).norm() == 0.0);
}

TEST_CASE("cholesky of a known 2x2") {
  CMatrix m(2, 2);
  m << Complex(4, 0), Complex(2, 2), Complex(2, -2), Complex(6, 0);
  const auto f = cholesky(HermitianMatrix(m));
  CHECK((f.upper().adjoint() * f.upper() - m).norm() < 1e-14);
  CHECK(f.upper()(1, 0) == Complex(0, 0));
  CHECK(f.upper()(0, 0).real() == doctest::Approx(2.0));
}

TEST_CASE("cholesky reconstructs random HPD matrices; solves match the direct inverse") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + trial % 8;
    const auto a = random_hpd(n, rng);
    const auto f = cholesky(a);
    CHECK((f.upper().adjoint() * f.upper() - a.matrix()).norm() <= 1e-12 * a.norm());
    const CVector b = random_cvector(n, rng);
    const CVector x = f.solve(b);
    const CVector ref = a.matrix().inverse() * b;
    CHECK(rel_err(x, ref) < 1e-10);
    CHECK(rel_err(f.whiten(b), f.upper().adjoint().inverse() * b) < 1e-10);
    CHECK(rel_err(f.unwhiten_inverse(b), f.upper().inverse() * b) < 1e-10);
    // R^-H A R^-1 = I
    const auto w = f.whiten_congruence(a);
    CHECK((w.matrix() - CMatrix::Identity(n, n)).norm() < 1e-10);
  }
}

TEST_CASE("non-PD matrices raise NotPositiveDefinite with the failing pivot") {
  CMatrix m = CMatrix::Identity(3, 3);
  m(2, 2) = Complex(-1.0, 0.0);
  try {
    cholesky(HermitianMatrix(m));
    FAIL("expected NotPositiveDefinite");
  } catch (const NotPositiveDefinite& e) {
    CHECK(e.pivot() == 2);
  }
  // Rank-deficient: passes plain factorization nowhere near, fails the floor check.
  const CVector v = CVector::Ones(3);
  const auto rank1 = HermitianMatrix::outer(v);
  CHECK_FALSE(passes_pd_check(rank1));
  CHECK_THROWS_AS(cholesky(rank1, kPdPivotFloor), NotPositiveDefinite);
}

TEST_CASE("diagonal loading is applied only when needed") {
  std::mt19937_64 rng(5);
  const auto good = random_hpd(4, rng);
  const auto lf = cholesky_with_loading(good);
  CHECK_FALSE(lf.loading_applied);
  CHECK(lf.delta == 0.0);

  const auto rank1 = HermitianMatrix::outer(random_cvector(4, rng));
  const auto loaded = cholesky_with_loading(rank1);
  CHECK(loaded.loading_applied);
  CHECK(loaded.delta == doctest::Approx(kLoadingFactor * rank1.trace() / 4.0));
  HermitianMatrix expect = rank1;
  expect.add_diagonal(loaded.delta);
  const CMatrix rec = loaded.factor.upper().adjoint() * loaded.factor.upper();
  CHECK((rec - expect.matrix()).norm() < 1e-10 * expect.norm());

  CHECK_THROWS_AS(cholesky_with_loading(HermitianMatrix::zeros(3)), NotPositiveDefinite);
}

TEST_CASE("principal eigenvector: diagonal example and phase convention") {
  CMatrix m = CMatrix::Zero(3, 3);
  m(0, 0) = 1.0;
  m(1, 1) = 5.0;
  m(2, 2) = 2.0;
  const auto ep = principal_eigvec_hermitian(HermitianMatrix(m));
  CHECK(ep.value == doctest::Approx(5.0));
  CHECK(std::abs(ep.vector(1) - Complex(1.0, 0.0)) < 1e-12);
}

TEST_CASE("principal eigenvector matches an independent oracle on random matrices") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + trial % 7;
    const auto a = random_hpd(n, rng);
    const auto ep = principal_eigvec_hermitian(a);
    // Residual and Rayleigh maximality against random probes.
    CHECK((a.matrix() * ep.vector - ep.value * ep.vector).norm() <= 1e-9 * a.norm());
    CHECK(ep.vector.norm() == doctest::Approx(1.0));
    for (int p = 0; p < 20; ++p) CHECK(rayleigh_quotient(a, random_cvector(n, rng)) <= ep.value * (1 + 1e-12));
    // Power iteration oracle.
    CVector v = CVector::Ones(static_cast<Eigen::Index>(n));
    for (int it = 0; it < 2000; ++it) v = (a.matrix() * v).normalized();
    apply_phase_convention(v);
    CHECK(std::abs(std::abs(v.dot(ep.vector)) - 1.0) < 1e-6);
  }
}

TEST_CASE("pencil eigenvector: residual, scale invariance, phase convention") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 1 + trial % 6;
    const auto a = random_hpd(n, rng);
    const auto b = random_hpd(n, rng);
    const auto ep = principal_eigvec_pencil(a, b);
    const double res = (a.matrix() * ep.vector - ep.value * b.matrix() * ep.vector).norm();
    CHECK(res <= 1e-9 * (a.norm() + std::abs(ep.value) * b.norm()));
    CHECK(ep.vector.norm() == doctest::Approx(1.0));
    for (int p = 0; p < 20; ++p) CHECK(rayleigh_quotient(a, b, random_cvector(n, rng)) <= ep.value * (1 + 1e-12));

    const auto scaled = principal_eigvec_pencil(a * 7.5, b);
    CHECK(scaled.value == doctest::Approx(7.5 * ep.value).epsilon(1e-10));
    CHECK(std::abs(std::abs(scaled.vector.dot(ep.vector)) - 1.0) < 1e-9);
  }
}

TEST_CASE("pencil with B = I reduces to the ordinary eigenproblem") {
  std::mt19937_64 rng(29);
  const auto a = random_hpd(5, rng);
  const auto p = principal_eigvec_pencil(a, HermitianMatrix::identity(5));
  const auto h = principal_eigvec_hermitian(a);
  CHECK(p.value == doctest::Approx(h.value).epsilon(1e-12));
  CHECK((p.vector - h.vector).norm() < 1e-9);
}

TEST_CASE("pencil rejects a non-PD B") {
  std::mt19937_64 rng(31);
  const auto a = random_hpd(3, rng);
  CMatrix b = -CMatrix::Identity(3, 3);
  CHECK_THROWS_AS(principal_eigvec_pencil(a, HermitianMatrix(b)), NotPositiveDefinite);
}

TEST_CASE("solve_hpd") {
  std::mt19937_64 rng(37);
  const auto a = random_hpd(6, rng);
  const CVector b = random_cvector(6, rng);
  CHECK(rel_err(a.matrix() * solve_hpd(a, b), b) < 1e-12);
}
