// Acceptance suite: one PASS/FAIL line per criterion, exit status = number of failures.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "app.hpp"
#include "bmvdr/beamformer.hpp"
#include "bmvdr/config.hpp"
#include "bmvdr/log.hpp"
#include "bmvdr/metrics.hpp"
#include "bmvdr/pipeline.hpp"
#include "bmvdr/rtf.hpp"
#include "bmvdr/scene.hpp"
#include "bmvdr/speech_source.hpp"
#include "bmvdr/stft.hpp"
#include "test_util.hpp"

using namespace bmvdr;
using namespace bmvdr::test;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const ChannelMap kMap(2, 3);
constexpr std::size_t kM = 7;

void exact_recovery() {
  std::mt19937_64 rng(1001);
  std::uniform_real_distribution<double> psd_dist(0.1, 10.0);
  double cw_worst = 0.0, sc_worst = 0.0, bias_worst = 0.0;
  for (int n = 0; n < 200; ++n) {
    const auto a = random_rtf(kM, kMap.ref_left(), rng);
    const auto rn = random_noise_uncorrelated_externals(2, 3, rng);
    const double psd = psd_dist(rng);
    const auto pair = exact_model_covariances(a, psd, rn);
    cw_worst = std::max(cw_worst, rel_err(estimate_cw(pair, kMap.ref_left(), Side::kLeft).values(), a.values()));
    const auto ar = change_reference(a, kMap.ref_right(), Side::kRight);
    cw_worst = std::max(cw_worst, rel_err(estimate_cw(pair, kMap.ref_right(), Side::kRight).values(), ar.values()));
    for (std::size_t i = 1; i <= 3; ++i) {
      const std::size_t e = kMap.external(i);
      const auto est = estimate_sc(pair, kMap, i, Side::kLeft);
      for (std::size_t m = 0; m < kM; ++m) {
        if (m != e) sc_worst = std::max(sc_worst, std::abs(est[m] - a[m]) / std::abs(a[m]));
      }
      const double snr = psd * std::norm(a[e]) / rn.diag(e);
      const double expect = 1.0 + 1.0 / snr;
      bias_worst = std::max(bias_worst, std::abs(est[e] / a[e] - expect) / expect);
    }
  }
  report(1, cw_worst <= 1e-8 && sc_worst <= 1e-10 && bias_worst <= 1e-8,
         fmt("exact recovery, 200 instances: CW %.2e (<= 1e-8), SC %.2e (<= 1e-10), bias %.2e (<= 1e-8)", cw_worst,
             sc_worst, bias_worst));
}

void rayleigh_and_dominance() {
  std::mt19937_64 rng(2002);
  double identity_worst = 0.0, dominance_worst = 0.0;
  for (int n = 0; n < 500; ++n) {
    const auto rn = random_hpd(kM, rng);
    const auto a = random_rtf(kM, 0, rng);
    HermitianMatrix ry = exact_model_covariances(a, 0.2 + 0.01 * n, rn).r_y;
    ry = ry + random_hpd(kM, rng) * 0.1;  // speech not exactly rank-1
    const HermitianMatrix rx = ry - rn;
    const auto noise = cholesky(rn);
    for (Side side : {Side::kLeft, Side::kRight}) {
      const auto A = sc_matrix(ry, kMap, side);
      const auto rm = rayleigh_matrices(A, ry, noise);
      auto direct = [&](const CVector& c) {
        return output_snr(mvdr_weights(noise, combine(A, c).values()), rx, rn);
      };
      const CVector c = random_cvector(3, rng);
      const double d = direct(c);
      identity_worst = std::max(identity_worst, std::abs(quotient_output_snr(rm, c) - d) / std::abs(d));

      const double best = direct(msnr_weights(A, ry, noise).weights);
      std::vector<CVector> rivals{average_weights(3).weights, select_isnr(ry, rn, kMap).weights};
      for (Eigen::Index i = 0; i < 3; ++i) rivals.push_back(CVector::Unit(3, i));
      for (const auto& r : rivals) dominance_worst = std::max(dominance_worst, direct(r) - best);
    }
  }
  report(2, identity_worst <= 1e-8, fmt("Rayleigh identity, 500 instances x 2 sides: worst relative gap %.2e (<= 1e-8)",
                                         identity_worst));
  report(3, dominance_worst <= 1e-9,
         fmt("mSNR dominance over e_i, AV, iSNR: worst shortfall %.2e (<= 1e-9)", std::max(0.0, dominance_worst)));
}

void bmvdr_contracts() {
  std::mt19937_64 rng(3003);
  double distortion = 0.0;
  double worst_gain = -1e300;  // most negative perturbation gain relative to tolerance
  bool ok = true;
  for (int n = 0; n < 100; ++n) {
    const auto rn = random_hpd(kM, rng);
    const auto a = random_rtf(kM, 0, rng);
    const auto ry = exact_model_covariances(a, 1.0, rn).r_y;
    // Filters steered by every estimator plus the true RTF.
    std::vector<RtfVector> steer{a, estimate_cw(ry, cholesky(rn), 0, Side::kLeft)};
    const auto A = sc_matrix(ry, kMap, Side::kLeft);
    for (std::size_t i = 0; i < 3; ++i) steer.push_back(A.column(i));
    steer.push_back(combine(A, average_weights(3)));
    steer.push_back(combine(A, select_isnr(ry, rn, kMap)));
    steer.push_back(combine(A, msnr_weights(A, ry, cholesky(rn))));
    for (const auto& al : steer) {
      const auto ar = change_reference(al, kMap.ref_right(), Side::kRight);
      const auto f = bmvdr::bmvdr(rn, al, ar);
      distortion = std::max({distortion, std::abs(f.w_left.dot(al.values()) - 1.0),
                             std::abs(f.w_right.dot(ar.values()) - 1.0)});
    }
    const CVector w = bmvdr::bmvdr(rn, a, change_reference(a, kMap.ref_right(), Side::kRight)).w_left;
    const double base = (w.adjoint() * rn.matrix() * w)(0, 0).real();
    for (int p = 0; p < 100; ++p) {
      CVector d = random_cvector(kM, rng, std::pow(10.0, -3.0 + 0.05 * p));
      d -= a.values() * (a.values().dot(d) / a.values().squaredNorm());
      const CVector w2 = w + d;
      const double pert = (w2.adjoint() * rn.matrix() * w2)(0, 0).real();
      const double margin = pert - base + 1e-12 * rn.trace();
      worst_gain = std::max(worst_gain, -margin);
      if (margin < 0.0) ok = false;
    }
  }
  report(4, ok && distortion <= 1e-12,
         fmt("BMVDR: distortionless worst %.2e (<= 1e-12); 100x100 feasible perturbations, none below the optimum "
             "(%s)",
             distortion, ok ? "held" : "violated"));
}

void stft_reconstruction() {
  std::mt19937_64 rng(4004);
  std::normal_distribution<double> g(0.0, 1.0);
  const StftConfig cfg;
  const std::size_t len = static_cast<std::size_t>(10.0 * cfg.sample_rate);
  MultichannelSamples x(kM, Samples(len));
  for (auto& ch : x) {
    for (double& v : ch) v = g(rng);
  }
  const auto t0 = Clock::now();
  const Stft stft(cfg);
  const auto y = stft.synthesize(stft.analyze(x), len);
  const double elapsed = seconds_since(t0);
  double worst = 0.0;
  for (std::size_t c = 0; c < kM; ++c) {
    for (std::size_t n = cfg.frame_len; n + cfg.frame_len < len; ++n) worst = std::max(worst, std::abs(y[c][n] - x[c][n]));
  }
  report(5, worst <= 1e-10 && elapsed < 5.0,
         fmt("STFT round trip 10 s x 7 ch: interior error %.2e (<= 1e-10), %.2f s (< 5 s)", worst, elapsed));
}

RunConfig experiment_config(std::uint64_t seed) {
  RunConfig cfg;
  cfg.scene.preset = "fig2-moving";
  cfg.scene.duration = 20.0;
  cfg.scene.noise_model = NoiseModel::kDiffuseHead;
  cfg.detector = Detector::kOracleVad;
  cfg.seed = seed;
  cfg.validate();
  return cfg;
}

GroundTruth render(const RunConfig& cfg) {
  const SceneSpec spec = cfg.scene_spec();
  return render_scene(spec, synthetic_speech(spec.sample_rate, spec.duration, cfg.seed, cfg.scene.leading_silence_s));
}

PipelineInput make_input(const GroundTruth& gt) {
  PipelineInput in;
  in.speech = gt.speech;
  in.noise = gt.noise;
  in.vad_mask = gt.vad_mask;
  in.true_rtf_left = gt.rtf_left;
  return in;
}

void passthrough_zero_point() {
  const RunConfig cfg = experiment_config(1);
  const GroundTruth gt = render(cfg);
  PipelineConfig pc = cfg.pipeline();
  pc.methods = {Method::parse("passthrough")};
  const auto r = run_pipeline(pc, make_input(gt));
  const auto& out = r.outputs.front();
  const auto m = app::evaluate_method("passthrough", gt.speech, gt.noise, *out.speech_output, *out.noise_output,
                                      cfg.channel_map(), cfg.stft(), cfg.metrics);
  double worst = 0.0;
  std::size_t valid = 0;
  for (double v : m.per_frame_delta_bsnr) {
    if (std::isfinite(v)) {
      worst = std::max(worst, std::abs(v));
      ++valid;
    }
  }
  report(6, valid > 0 && worst <= 1e-9,
         fmt("pass-through on fig2-moving: worst |dBSNR| %.2e dB over %zu valid segments (<= 1e-9)", worst, valid));
}

void ordering_experiment() {
  const std::vector<std::string> names{"cw", "sc-1", "sc-2", "sc-3", "isnr", "av", "msnr"};
  int msnr_ge_isnr = 0, msnr_ge_av = 0;
  double slowest = 0.0;
  bool positive = true;
  std::string table, negatives;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const RunConfig cfg = experiment_config(seed);
    const GroundTruth gt = render(cfg);
    PipelineConfig pc = cfg.pipeline();
    pc.methods.clear();
    for (const auto& n : names) pc.methods.push_back(Method::parse(n));
    const auto t0 = Clock::now();
    const auto r = run_pipeline(pc, make_input(gt));
    // All methods share one pass, so the pass time bounds each method's time.
    slowest = std::max(slowest, seconds_since(t0));
    std::vector<double> db;
    table += fmt("  seed %llu:", static_cast<unsigned long long>(seed));
    for (const auto& out : r.outputs) {
      const auto m = app::evaluate_method(out.method.name(), gt.speech, gt.noise, *out.speech_output,
                                          *out.noise_output, cfg.channel_map(), cfg.stft(), cfg.metrics);
      db.push_back(m.overall_delta_bsnr);
      table += fmt(" %s %.2f", out.method.name().c_str(), m.overall_delta_bsnr);
      if (!r.incomplete_warmup && !(m.overall_delta_bsnr > 0.0)) {
        positive = false;
        negatives += fmt(" seed%llu/%s", static_cast<unsigned long long>(seed), out.method.name().c_str());
      }
    }
    table += r.incomplete_warmup ? " (warm-up incomplete)\n" : "\n";
    const double msnr = db[6], isnr = db[4], av = db[5];
    msnr_ge_isnr += msnr >= isnr;
    msnr_ge_av += msnr >= av;
  }
  std::fputs(table.c_str(), stdout);
  report(7, msnr_ge_isnr >= 4 && msnr_ge_av == 5 && slowest < 60.0,
         fmt("ordering over seeds 1-5: mSNR >= iSNR in %d/5 (need 4), mSNR >= AV in %d/5 (need 5), slowest run %.1f s "
             "(< 60 s)",
             msnr_ge_isnr, msnr_ge_av, slowest));
  report(8, positive, positive ? "every converged method improves on the reference (> 0 dB)"
                               : "non-positive improvement:" + negatives);
}

void tracker_convergence() {
  // Stationary diffuse-head noise from the simulator; the tracker sees 15 s of
  // noise-only frames per bin and is compared with the sample covariance of
  // those same frames.
  auto spec = preset_fig2(false, 15.0, 9009);
  const GroundTruth gt = render_scene(spec, synthetic_speech(spec.sample_rate, spec.duration, 9009, 1.0));
  const StftConfig cfg = spec.stft();
  const auto spec_n = analyze(gt.noise, cfg);
  TrackerConfig tc;
  tc.hop_seconds = cfg.hop_seconds();
  const std::size_t frames = std::min(spec_n.frames(), static_cast<std::size_t>(std::ceil(15.0 / tc.hop_seconds)));
  double worst = 0.0, mean = 0.0;
  std::size_t within = 0, bins = 0;
  for (std::size_t k = 1; k + 1 < cfg.bins(); ++k) {
    CovarianceTracker tracker(kM, 1, tc);
    CMatrix truth = CMatrix::Zero(kM, kM);
    for (std::size_t t = 0; t < frames; ++t) {
      const CVector y = spec_n.bin_vector(t, k);
      truth += y * y.adjoint();
      tracker.observe(0, y, false);
    }
    truth /= static_cast<double>(frames);
    const double e = (tracker.pair(0).r_n.matrix() - truth).norm() / truth.norm();
    worst = std::max(worst, e);
    mean += e;
    within += e <= 0.1;
    ++bins;
  }
  mean /= static_cast<double>(bins);
  report(9, worst <= 0.1,
         fmt("tracker after 15 s of diffuse noise: relative Frobenius error mean %.3f, worst %.3f, %zu/%zu bins <= 0.1",
             mean, worst, within, bins));
}

}  // namespace

int main() {
  log::set_level(log::Level::kError);
  const auto t0 = Clock::now();
  exact_recovery();
  rayleigh_and_dominance();
  bmvdr_contracts();
  stft_reconstruction();
  passthrough_zero_point();
  ordering_experiment();
  tracker_convergence();
  std::printf("%d of 9 criteria failed (%.1f s)\n", failures, seconds_since(t0));
  return failures;
}
