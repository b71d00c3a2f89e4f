#include <doctest.h>

#include <cmath>
#include <random>

#include "bmvdr/error.hpp"
#include "bmvdr/metrics.hpp"
#include "bmvdr/pipeline.hpp"
#include "bmvdr/scene.hpp"
#include "bmvdr/speech_source.hpp"

using namespace bmvdr;

namespace {

struct Fixture {
  SceneSpec spec;
  GroundTruth gt;
  PipelineConfig cfg;
  PipelineInput input;

  explicit Fixture(double duration, std::uint64_t seed = 1, double lead_in = 3.0) {
    spec = preset_fig2(false, duration, seed);
    gt = render_scene(spec, synthetic_speech(spec.sample_rate, duration, seed, lead_in));
    cfg.channel_map = spec.channel_map;
    cfg.stft = spec.stft();
    cfg.tracker.hop_seconds = cfg.stft.hop_seconds();
    cfg.tracker.detector = Detector::kOracleVad;
    input.speech = gt.speech;
    input.noise = gt.noise;
    input.vad_mask = gt.vad_mask;
    input.true_rtf_left = gt.rtf_left;
  }
};

double improvement(const MethodOutput& out, const GroundTruth& gt, const ChannelMap& map) {
  const BinauralPair so{(*out.speech_output)[0], (*out.speech_output)[1]};
  const BinauralPair no{(*out.noise_output)[0], (*out.noise_output)[1]};
  const BinauralPair sr{gt.speech[map.ref_left()], gt.speech[map.ref_right()]};
  const BinauralPair nr{gt.noise[map.ref_left()], gt.noise[map.ref_right()]};
  return delta_bsnr(so, no, sr, nr, 16000.0).overall_db;
}

}  // namespace

TEST_CASE("method names") {
  for (const char* n : {"passthrough", "cw", "sc-1", "sc-3", "isnr", "av", "msnr", "oracle-rtf"}) {
    CHECK(Method::parse(n).name() == n);
  }
  CHECK_THROWS_AS(Method::parse("sc-0"), DomainError);
  CHECK_THROWS_AS(Method::parse("mvdr"), DomainError);
  const auto std3 = standard_methods(3);
  REQUIRE(std3.size() == 7);
  CHECK(std3[1].name() == "sc-1");
  CHECK(std3[6].name() == "msnr");
}

TEST_CASE("pass-through reproduces the reference channels") {
  Fixture f(4.0);
  f.cfg.methods = {Method::parse("passthrough")};
  const auto r = run_pipeline(f.cfg, f.input);
  REQUIRE(r.outputs.size() == 1);
  const auto& out = r.outputs[0];
  const auto mix = f.gt.mixture();
  double worst = 0.0;
  for (std::size_t n = 0; n < mix[0].size(); ++n) {
    worst = std::max(worst, std::abs(out.output[0][n] - mix[0][n]));
    worst = std::max(worst, std::abs(out.output[1][n] - mix[2][n]));
  }
  CHECK(worst <= 1e-10);
  CHECK(std::abs(improvement(out, f.gt, f.cfg.channel_map)) <= 1e-9);
}

TEST_CASE("shadow outputs add up to the processed mixture") {
  Fixture f(5.0, 2);
  f.cfg.methods = {Method::parse("msnr"), Method::parse("cw")};
  const auto r = run_pipeline(f.cfg, f.input);
  for (const auto& out : r.outputs) {
    REQUIRE(out.output.size() == 2);
    REQUIRE(out.output[0].size() == f.gt.speech[0].size());
    double worst = 0.0;
    for (std::size_t c = 0; c < 2; ++c) {
      for (std::size_t n = 0; n < out.output[c].size(); ++n) {
        worst = std::max(worst, std::abs(out.output[c][n] - (*out.speech_output)[c][n] - (*out.noise_output)[c][n]));
      }
    }
    CHECK(worst <= 1e-9);
    CHECK(out.diagnostics.filter_updates > 0);
  }
}

TEST_CASE("warm-up is reported when the input is too short") {
  Fixture f(2.0, 1, 0.5);
  f.cfg.methods = {Method::parse("cw")};
  const auto r = run_pipeline(f.cfg, f.input);
  CHECK(r.incomplete_warmup);
  CHECK(r.outputs[0].diagnostics.filter_updates == 0);
  CHECK(r.outputs[0].diagnostics.warmup_bins > 0);
}

TEST_CASE("beamforming improves SNR on a static scene") {
  Fixture f(8.0, 3);
  f.cfg.methods = {Method::parse("oracle-rtf"), Method::parse("msnr"), Method::parse("cw")};
  const auto r = run_pipeline(f.cfg, f.input);
  CHECK_FALSE(r.incomplete_warmup);
  for (const auto& out : r.outputs) {
    CAPTURE(out.method.name());
    CHECK(improvement(out, f.gt, f.cfg.channel_map) > 3.0);
  }
}

TEST_CASE("input validation") {
  Fixture f(4.0);
  f.cfg.methods = {Method::parse("cw")};
  auto bad = f.input;
  bad.vad_mask->resize(3);
  CHECK_THROWS_AS(run_pipeline(f.cfg, bad), DomainError);
  bad = f.input;
  bad.vad_mask.reset();
  CHECK_THROWS_AS(run_pipeline(f.cfg, bad), DomainError);
  bad = f.input;
  bad.speech->pop_back();
  CHECK_THROWS_AS(run_pipeline(f.cfg, bad), DomainError);
  auto cfg = f.cfg;
  cfg.methods = {Method::parse("oracle-rtf")};
  bad = f.input;
  bad.true_rtf_left.reset();
  CHECK_THROWS_AS(run_pipeline(cfg, bad), DomainError);
  cfg.methods = {Method::parse("sc-4")};
  CHECK_THROWS_AS(run_pipeline(cfg, f.input), DomainError);
}
