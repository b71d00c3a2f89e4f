#include <doctest.h>

#include <random>

#include "bmvdr/beamformer.hpp"
#include "bmvdr/error.hpp"
#include "bmvdr/metrics.hpp"
#include "bmvdr/rtf.hpp"
#include "bmvdr/scene.hpp"
#include "test_util.hpp"

using namespace bmvdr;
using namespace bmvdr::test;

TEST_CASE("RtfVector normalization") {
  CVector v(3);
  v << Complex(2, 2), Complex(1, 0), Complex(0, 4);
  const RtfVector a(v, 0, Side::kLeft);
  CHECK(a[0] == Complex(1, 0));
  CHECK(std::abs(a[2] - Complex(0, 4) / Complex(2, 2)) < 1e-15);
  CVector z = v;
  z(1) = 0.0;
  CHECK_THROWS_AS(RtfVector(z, 1, Side::kLeft), ZeroDenominator);
  CHECK_THROWS_AS(RtfVector(v, 3, Side::kLeft), DomainError);
}

TEST_CASE("change_reference gives a_R = a_L / a_L[ref_R]") {
  std::mt19937_64 rng(1);
  const auto al = random_rtf(7, 0, rng);
  const auto ar = change_reference(al, 2, Side::kRight);
  CHECK(ar[2] == Complex(1, 0));
  CHECK(rel_err(ar.values(), al.values() / al[2]) < 1e-14);
}

TEST_CASE("CW recovers the true RTF on exact model covariances") {
  std::mt19937_64 rng(2);
  const ChannelMap map(2, 3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = random_rtf(7, 0, rng);
    const auto rn = random_hpd(7, rng);
    const auto pair = exact_model_covariances(a, 0.5 + trial * 0.1, rn);
    CHECK(rel_err(estimate_cw(pair, map.ref_left(), Side::kLeft).values(), a.values()) <= 1e-8);
    const auto ar = change_reference(a, map.ref_right(), Side::kRight);
    CHECK(rel_err(estimate_cw(pair, map.ref_right(), Side::kRight).values(), ar.values()) <= 1e-8);
  }
}

TEST_CASE("SC is exact except for the external entry, which carries 1 + 1/SNR") {
  std::mt19937_64 rng(3);
  const ChannelMap map(2, 3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = random_rtf(7, 0, rng);
    const auto rn = random_noise_uncorrelated_externals(2, 3, rng);
    const double psd = 0.3 + 0.05 * trial;
    const auto pair = exact_model_covariances(a, psd, rn);
    for (std::size_t i = 1; i <= 3; ++i) {
      const std::size_t e = map.external(i);
      const auto est = estimate_sc(pair, map, i, Side::kLeft);
      for (std::size_t m = 0; m < 7; ++m) {
        if (m == e) continue;
        CHECK(std::abs(est[m] - a[m]) <= 1e-10 * std::abs(a[m]) + 1e-14);
      }
      const double snr = psd * std::norm(a[e]) / rn.diag(e);
      const Complex bias = est[e] / a[e];
      CHECK(std::abs(bias - Complex(1.0 + 1.0 / snr, 0.0)) <= 1e-8 * (1.0 + 1.0 / snr));
    }
  }
}

TEST_CASE("SC bias example: SNR_E = 2 gives factor 1.5") {
  // a = (1, 0.5, 2.5) in (ref, head, external) layout with psd 1:
  // |a_E|^2 = 6.25, so sigma_E^2 = 3.125 makes SNR_E = 2.
  const ChannelMap map(1, 1);
  CVector a(3);
  a << 1.0, 0.5, 2.5;
  CMatrix rn = CMatrix::Zero(3, 3);
  rn(0, 0) = 1.0;
  rn(1, 1) = 1.0;
  rn(0, 1) = rn(1, 0) = 0.3;
  rn(2, 2) = 3.125;
  const auto pair = exact_model_covariances(RtfVector(a, 0, Side::kLeft), 1.0, HermitianMatrix(rn));
  const auto est = estimate_sc(pair, map, 1, Side::kLeft);
  CHECK(est[2].real() == doctest::Approx(2.5 * 1.5).epsilon(1e-12));
}

TEST_CASE("combine: reference entry one, scale invariance in c") {
  std::mt19937_64 rng(4);
  const ChannelMap map(2, 3);
  const auto pair = exact_model_covariances(random_rtf(7, 0, rng), 1.0, random_noise_uncorrelated_externals(2, 3, rng));
  const auto A = sc_matrix(pair.r_y, map, Side::kLeft);
  const CVector c = random_cvector(3, rng);
  const auto a1 = combine(A, c);
  const auto a2 = combine(A, c * Complex(-2.5, 1.3));
  CHECK(a1[0] == Complex(1, 0));
  CHECK(rel_err(a1.values(), a2.values()) < 1e-12);
  CVector e2 = CVector::Zero(3);
  e2(1) = 1.0;
  CHECK(rel_err(combine(A, e2).values(), estimate_sc(pair, map, 2, Side::kLeft).values()) < 1e-14);
}

TEST_CASE("iSNR selection: best external, lowest index on ties") {
  const ChannelMap map(1, 3);
  CMatrix ry = CMatrix::Identity(5, 5) * 2.0, rn = CMatrix::Identity(5, 5);
  ry(3, 3) = 5.0;  // external 2 has SNR 4
  auto c = select_isnr(HermitianMatrix(ry), HermitianMatrix(rn), map);
  CHECK(c.selected == 1);
  CHECK(c.weights(1) == Complex(1, 0));
  CHECK(c.weights.norm() == doctest::Approx(1.0));
  ry(3, 3) = 2.0;  // all equal
  c = select_isnr(HermitianMatrix(ry), HermitianMatrix(rn), map);
  CHECK(c.selected == 0);
}

TEST_CASE("AV weights") {
  const auto c = average_weights(4);
  for (Eigen::Index i = 0; i < 4; ++i) CHECK(c.weights(i) == Complex(0.25, 0));
  CHECK_THROWS_AS(average_weights(0), DomainError);
}

TEST_CASE("mSNR with one external reproduces SC-1") {
  std::mt19937_64 rng(5);
  const ChannelMap map(1, 1);
  const auto pair = exact_model_covariances(random_rtf(3, 0, rng), 1.0, random_noise_uncorrelated_externals(1, 1, rng));
  const auto A = sc_matrix(pair.r_y, map, Side::kLeft);
  const auto c = msnr_weights(A, pair);
  CHECK(rel_err(combine(A, c).values(), estimate_sc(pair, map, 1, Side::kLeft).values()) < 1e-12);
}

TEST_CASE("Rayleigh identity and mSNR dominance on random instances") {
  std::mt19937_64 rng(6);
  const ChannelMap map(2, 3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto ry = random_hpd(7, rng);
    const auto rn = random_hpd(7, rng);
    const auto noise = cholesky(rn);
    const auto A = sc_matrix(ry, map, Side::kLeft);
    const auto rm = rayleigh_matrices(A, ry, noise);
    const HermitianMatrix rx = ry - rn;
    auto snr_for = [&](const CVector& c) {
      const auto a = combine(A, c);
      return output_snr(mvdr_weights(noise, a.values()), rx, rn);
    };
    const CVector c = random_cvector(3, rng);
    const double q = quotient_output_snr(rm, c);
    const double direct = snr_for(c);
    CHECK(std::abs(q - direct) <= 1e-8 * std::max(1.0, std::abs(direct)));

    const double best = snr_for(msnr_weights(A, ry, noise).weights);
    for (Eigen::Index i = 0; i < 3; ++i) CHECK(best >= snr_for(CVector::Unit(3, i)) - 1e-9);
    CHECK(best >= snr_for(average_weights(3).weights) - 1e-9);
    CHECK(best >= snr_for(select_isnr(ry, rn, map).weights) - 1e-9);
  }
}

TEST_CASE("left/right consistency on exact covariances") {
  std::mt19937_64 rng(7);
  const ChannelMap map(2, 3);
  const auto a = random_rtf(7, 0, rng);
  const auto pair = exact_model_covariances(a, 2.0, random_hpd(7, rng));
  const auto l = estimate_cw(pair, map.ref_left(), Side::kLeft);
  const auto r = estimate_cw(pair, map.ref_right(), Side::kRight);
  CHECK(rel_err(change_reference(l, map.ref_right(), Side::kRight).values(), r.values()) < 1e-8);
}

TEST_CASE("CW with a vanishing reference entry is reported") {
  const ChannelMap map(1, 1);
  // Speech absent from channel 0's direction after whitening: r_y == r_n
  // except along e_2, so the principal direction has a zero reference entry.
  CMatrix rn = CMatrix::Identity(3, 3);
  CMatrix ry = rn;
  ry(2, 2) = 10.0;
  CHECK_THROWS_AS(estimate_cw(CovariancePair{HermitianMatrix(ry), HermitianMatrix(rn), 0, 0}, 0, Side::kLeft),
                  NearZeroReference);
}
