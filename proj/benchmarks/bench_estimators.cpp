#include <benchmark/benchmark.h>

#include <random>

#include "bmvdr/beamformer.hpp"
#include "bmvdr/rtf.hpp"
#include "bmvdr/scene.hpp"
#include "bmvdr/stft.hpp"

using namespace bmvdr;

namespace {

CVector randn(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 0.7);
  CVector v(static_cast<Eigen::Index>(n));
  for (auto& x : v) x = Complex(g(rng), g(rng));
  return v;
}

struct Bin {
  ChannelMap map;
  CovariancePair pair;
  CholeskyFactor noise;

  explicit Bin(std::size_t num_external) : map(2, num_external) {
    std::mt19937_64 rng(7);
    const std::size_t m = map.total();
    CMatrix b(m, m);
    for (Eigen::Index j = 0; j < b.cols(); ++j) b.col(j) = randn(m, rng);
    HermitianMatrix rn = HermitianMatrix::symmetrized(b * b.adjoint());
    rn.add_diagonal(0.1 * static_cast<double>(m));
    CVector a = randn(m, rng);
    a(0) += 1.0;
    pair = exact_model_covariances(RtfVector(a, 0, Side::kLeft), 2.0, rn);
    noise = cholesky(pair.r_n);
  }
};

void BM_Cw(benchmark::State& state) {
  const Bin bin(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto a = estimate_cw(bin.pair.r_y, bin.noise, 0, Side::kLeft);
    benchmark::DoNotOptimize(a);
  }
}

void BM_Isnr(benchmark::State& state) {
  const Bin bin(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    const auto A = sc_matrix(bin.pair.r_y, bin.map, Side::kLeft);
    auto a = combine(A, select_isnr(bin.pair.r_y, bin.pair.r_n, bin.map));
    benchmark::DoNotOptimize(a);
  }
}

void BM_Msnr(benchmark::State& state) {
  const Bin bin(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    const auto A = sc_matrix(bin.pair.r_y, bin.map, Side::kLeft);
    auto a = combine(A, msnr_weights(A, bin.pair.r_y, bin.noise));
    benchmark::DoNotOptimize(a);
  }
}

void BM_Bmvdr(benchmark::State& state) {
  const Bin bin(static_cast<std::size_t>(state.range(0)));
  const auto a = estimate_cw(bin.pair.r_y, bin.noise, 0, Side::kLeft);
  const auto ar = change_reference(a, bin.map.ref_right(), Side::kRight);
  for (auto _ : state) {
    auto f = bmvdr::bmvdr(bin.pair.r_n, a, ar);
    benchmark::DoNotOptimize(f);
  }
}

void BM_StftRoundTrip(benchmark::State& state) {
  const StftConfig cfg;
  const auto len = static_cast<std::size_t>(state.range(0) * cfg.sample_rate);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  MultichannelSamples x(7, Samples(len));
  for (auto& ch : x) {
    for (double& v : ch) v = g(rng);
  }
  const Stft stft(cfg);
  for (auto _ : state) {
    auto y = stft.synthesize(stft.analyze(x), len);
    benchmark::DoNotOptimize(y);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(len * 7));
}

}  // namespace

BENCHMARK(BM_Cw)->Arg(1)->Arg(3)->Arg(6);
BENCHMARK(BM_Isnr)->Arg(1)->Arg(3)->Arg(6);
BENCHMARK(BM_Msnr)->Arg(1)->Arg(3)->Arg(6);
BENCHMARK(BM_Bmvdr)->Arg(3);
BENCHMARK(BM_StftRoundTrip)->Arg(1)->Arg(10)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
