#include <doctest.h>

#include <cmath>
#include <random>

#include "bmvdr/metrics.hpp"
#include "bmvdr/error.hpp"
#include "test_util.hpp"

using namespace bmvdr;
using namespace bmvdr::test;

namespace {

BinauralPair noise_pair(std::size_t n, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, scale);
  BinauralPair p{Samples(n), Samples(n)};
  for (std::size_t i = 0; i < n; ++i) {
    p.left[i] = g(rng);
    p.right[i] = g(rng);
  }
  return p;
}

BinauralPair scaled(const BinauralPair& p, double gl, double gr) {
  BinauralPair out = p;
  for (double& v : out.left) v *= gl;
  for (double& v : out.right) v *= gr;
  return out;
}

}  // namespace

TEST_CASE("input and output SNR helpers") {
  CovariancePair pair;
  CMatrix ry = CMatrix::Identity(2, 2) * 3.0, rn = CMatrix::Identity(2, 2);
  ry(1, 1) = 0.5;
  pair.r_y = HermitianMatrix(ry);
  pair.r_n = HermitianMatrix(rn);
  CHECK(input_snr(pair, 0) == doctest::Approx(2.0));
  CHECK(input_snr(pair, 1) == doctest::Approx(-0.5));
  CHECK(input_snr_reported(pair, 1) == 0.0);
  CVector w(2);
  w << 1.0, 0.0;
  CHECK(output_snr(w, HermitianMatrix(ry - rn), HermitianMatrix(rn)) == doctest::Approx(2.0));
  CHECK(to_db(10.0) == doctest::Approx(10.0));
}

TEST_CASE("pass-through gives zero improvement") {
  const auto s = noise_pair(16000 * 3, 1), n = noise_pair(16000 * 3, 2, 0.5);
  const auto r = delta_bsnr(s, n, s, n, 16000.0);
  CHECK(std::abs(r.overall_db) <= 1e-12);
  for (std::size_t i = 0; i < r.segment_db.size(); ++i) {
    if (r.valid[i]) CHECK(std::abs(r.segment_db[i]) <= 1e-12);
  }
  const auto bins = delta_bsnr_per_bin(s, n, s, n, StftConfig{});
  for (double v : bins) CHECK(std::abs(v) <= 1e-9);
}

TEST_CASE("known gains give the model improvement exactly") {
  const auto s = noise_pair(16000 * 2, 3), n = noise_pair(16000 * 2, 4);
  // Speech kept, noise attenuated by 6 dB on both ears.
  const double g = std::pow(10.0, -6.0 / 20.0);
  const auto r = delta_bsnr(s, scaled(n, g, g), s, n, 16000.0);
  CHECK(r.overall_db == doctest::Approx(6.0).epsilon(1e-9));
  const auto bins = delta_bsnr_per_bin(s, scaled(n, g, g), s, n, StftConfig{});
  for (std::size_t k = 1; k + 1 < bins.size(); ++k) CHECK(bins[k] == doctest::Approx(6.0).epsilon(1e-6));
}

TEST_CASE("common output gain does not change the improvement") {
  const auto s = noise_pair(16000 * 2, 5), n = noise_pair(16000 * 2, 6);
  const auto so = scaled(s, 0.9, 0.8), no = scaled(n, 0.3, 0.4);
  const auto a = delta_bsnr(so, no, s, n, 16000.0);
  const auto b = delta_bsnr(scaled(so, 7.0, 7.0), scaled(no, 7.0, 7.0), s, n, 16000.0);
  CHECK(a.overall_db == doctest::Approx(b.overall_db).epsilon(1e-12));
}

TEST_CASE("silent reference segments are excluded") {
  auto s = noise_pair(16000 * 2, 7);
  const auto n = noise_pair(16000 * 2, 8);
  for (std::size_t i = 0; i < 16000; ++i) s.left[i] = s.right[i] = 0.0;
  const auto r = delta_bsnr(s, n, s, n, 16000.0);
  CHECK(r.inactive_speech > 0);
  CHECK(std::isnan(r.segment_db.front()));
  CHECK(std::isfinite(r.overall_db));
  CHECK(aggregate_overall({1.0, std::nan(""), 3.0}) == doctest::Approx(2.0));
}

TEST_CASE("summary rows and reference values") {
  MetricSeries m;
  m.method = "msnr";
  m.overall_delta_bsnr = 4.0;
  m.per_frame_delta_bsnr = {1.0, std::nan(""), 2.0};
  m.frame_time = {0.1, 0.2, 0.3};
  m.per_bin_delta_bsnr = {0.5, 0.6};
  m.bin_frequency = {0.0, 31.25};
  const auto rows = summarize(m);
  REQUIRE(rows.size() == 5);
  CHECK(rows[0].kind == SummaryRow::Kind::kOverall);
  CHECK(rows[2].index == 2);
  CHECK(rows[4].coordinate == 31.25);
  CHECK(reference_delta_bsnr_db("msnr").has_value());
  CHECK_FALSE(reference_delta_bsnr_db("bogus").has_value());
}
