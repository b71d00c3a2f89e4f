#include "bmvdr/pipeline.hpp"

#include <algorithm>
#include <optional>
#include <string>

#include "bmvdr/beamformer.hpp"
#include "bmvdr/error.hpp"
#include "bmvdr/log.hpp"
#include "bmvdr/rtf.hpp"

namespace bmvdr {

Method Method::parse(const std::string& name) {
  if (name == "passthrough") return {Kind::kPassthrough, 0};
  if (name == "cw") return {Kind::kCw, 0};
  if (name == "isnr") return {Kind::kIsnr, 0};
  if (name == "av") return {Kind::kAv, 0};
  if (name == "msnr") return {Kind::kMsnr, 0};
  if (name == "oracle-rtf") return {Kind::kTrueRtf, 0};
  if (name.rfind("sc-", 0) == 0 && name.size() > 3) {
    const std::string digits = name.substr(3);
    if (std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; }) && digits.size() < 6) {
      const auto i = static_cast<std::size_t>(std::stoul(digits));
      if (i > 0) return {Kind::kSc, i};
    }
  }
  throw DomainError("unknown method '" + name + "'");
}

std::string Method::name() const {
  switch (kind) {
    case Kind::kPassthrough: return "passthrough";
    case Kind::kCw: return "cw";
    case Kind::kSc: return "sc-" + std::to_string(external);
    case Kind::kIsnr: return "isnr";
    case Kind::kAv: return "av";
    case Kind::kMsnr: return "msnr";
    case Kind::kTrueRtf: return "oracle-rtf";
  }
  return "?";
}

std::vector<Method> standard_methods(std::size_t num_external) {
  std::vector<Method> methods{{Method::Kind::kCw, 0}};
  for (std::size_t i = 1; i <= num_external; ++i) methods.push_back({Method::Kind::kSc, i});
  methods.push_back({Method::Kind::kIsnr, 0});
  methods.push_back({Method::Kind::kAv, 0});
  methods.push_back({Method::Kind::kMsnr, 0});
  return methods;
}

namespace {

struct BinState {
  std::optional<RtfVector> last_left;
  std::optional<RtfVector> last_right;
  CVector w_left;
  CVector w_right;
};

struct SteeringPair {
  RtfVector left;
  RtfVector right;
};

// Lazily shared per-(frame, bin) quantities.
struct BinContext {
  const ChannelMap& map;
  const CovariancePair& pair;
  const CholeskyFactor& noise;
  std::optional<RtfMatrix> sc_left;
  std::optional<RtfMatrix> sc_right;

  const RtfMatrix& sc(Side side) {
    auto& slot = side == Side::kLeft ? sc_left : sc_right;
    if (!slot) slot.emplace(sc_matrix(pair.r_y, map, side));
    return *slot;
  }
};

RtfVector cw_side(const CVector& direction, std::size_t ref, Side side) {
  if (!(std::abs(direction(static_cast<Eigen::Index>(ref))) >= 1e-12 * direction.norm())) {
    throw NearZeroReference("covariance whitening: reference entry vanishes");
  }
  return RtfVector(direction, ref, side, 1e-12);
}

SteeringPair estimate(const Method& method, BinContext& ctx, const CVector* true_rtf) {
  const ChannelMap& map = ctx.map;
  switch (method.kind) {
    case Method::Kind::kCw: {
      const CVector v = cw_direction(ctx.pair.r_y, ctx.noise);
      return {cw_side(v, map.ref_left(), Side::kLeft), cw_side(v, map.ref_right(), Side::kRight)};
    }
    case Method::Kind::kSc:
      return {estimate_sc(ctx.pair.r_y, map, method.external, Side::kLeft),
              estimate_sc(ctx.pair.r_y, map, method.external, Side::kRight)};
    case Method::Kind::kIsnr: {
      const CombinationVector c = select_isnr(ctx.pair.r_y, ctx.pair.r_n, map);
      return {combine(ctx.sc(Side::kLeft), c), combine(ctx.sc(Side::kRight), c)};
    }
    case Method::Kind::kAv: {
      const CombinationVector c = average_weights(map.num_external());
      return {combine(ctx.sc(Side::kLeft), c), combine(ctx.sc(Side::kRight), c)};
    }
    case Method::Kind::kMsnr: {
      const RtfMatrix& al = ctx.sc(Side::kLeft);
      const RtfMatrix& ar = ctx.sc(Side::kRight);
      return {combine(al, msnr_weights(al, ctx.pair.r_y, ctx.noise)),
              combine(ar, msnr_weights(ar, ctx.pair.r_y, ctx.noise))};
    }
    case Method::Kind::kTrueRtf: {
      RtfVector left(*true_rtf, map.ref_left(), Side::kLeft);
      return {left, change_reference(left, map.ref_right(), Side::kRight)};
    }
    case Method::Kind::kPassthrough: break;
  }
  throw DomainError("estimate: method has no RTF estimator");
}

MultichannelSamples pad(const MultichannelSamples& x, std::size_t front, std::size_t total) {
  MultichannelSamples out(x.size(), Samples(total, 0.0));
  for (std::size_t c = 0; c < x.size(); ++c) std::copy(x[c].begin(), x[c].end(), out[c].begin() + static_cast<long>(front));
  return out;
}

MultichannelSamples trim(const MultichannelSamples& x, std::size_t front, std::size_t len) {
  MultichannelSamples out(x.size());
  for (std::size_t c = 0; c < x.size(); ++c) {
    out[c].assign(x[c].begin() + static_cast<long>(front), x[c].begin() + static_cast<long>(front + len));
  }
  return out;
}

void check_channels(const MultichannelSamples& x, std::size_t channels, std::size_t len, const char* what) {
  if (x.size() != channels) {
    throw DomainError(std::string(what) + " has " + std::to_string(x.size()) + " channels, channel map expects " +
                      std::to_string(channels));
  }
  for (const auto& ch : x) {
    if (ch.size() != len) throw DomainError(std::string(what) + ": channel length mismatch");
  }
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& cfg, const PipelineInput& input) {
  cfg.stft.validate();
  cfg.tracker.validate();
  const ChannelMap& map = cfg.channel_map;
  const std::size_t m = map.total();
  if (cfg.methods.empty()) throw DomainError("no methods requested");
  if (cfg.update_every_n_frames == 0) throw DomainError("update_every_n_frames must be at least 1");
  for (const Method& method : cfg.methods) {
    if (method.kind == Method::Kind::kSc && method.external > map.num_external()) {
      throw DomainError("method " + method.name() + " refers to a missing external microphone");
    }
    if ((method.kind == Method::Kind::kIsnr || method.kind == Method::Kind::kAv ||
         method.kind == Method::Kind::kMsnr) && map.num_external() == 0) {
      throw DomainError("method " + method.name() + " needs external microphones");
    }
    if (method.kind == Method::Kind::kTrueRtf && !input.true_rtf_left) {
      throw DomainError("method oracle-rtf needs ground-truth RTFs");
    }
  }
  if (input.speech.has_value() != input.noise.has_value()) {
    throw DomainError("speech and noise stems must be provided together");
  }
  const bool shadow = input.speech.has_value();

  MultichannelSamples mixture = input.mixture;
  if (mixture.empty()) {
    if (!shadow) throw DomainError("pipeline input has neither a mixture nor stems");
    mixture = *input.speech;
    for (std::size_t c = 0; c < mixture.size(); ++c) {
      for (std::size_t n = 0; n < mixture[c].size(); ++n) mixture[c][n] += (*input.noise)[c][n];
    }
  }
  const std::size_t len = mixture.empty() ? 0 : mixture.front().size();
  check_channels(mixture, m, len, "mixture");
  if (shadow) {
    check_channels(*input.speech, m, len, "speech stem");
    check_channels(*input.noise, m, len, "noise stem");
  }
  if (cfg.tracker.detector == Detector::kOracleVad && !input.vad_mask) {
    throw DomainError("oracle VAD mode requires a ground-truth speech mask");
  }
  if (cfg.tracker.detector == Detector::kOracleVad && input.vad_mask->size() != cfg.stft.frame_count(len)) {
    throw DomainError("speech mask has " + std::to_string(input.vad_mask->size()) + " frames, input has " +
                      std::to_string(cfg.stft.frame_count(len)));
  }

  const std::size_t hop = cfg.stft.hop;
  const std::size_t frame_len = cfg.stft.frame_len;
  const std::size_t front = hop;
  const std::size_t padded_len = ((front + len + hop - 1) / hop) * hop + hop;
  const std::size_t frames = cfg.stft.frame_count(padded_len);
  const std::size_t bins = cfg.stft.bins();

  const Stft stft(cfg.stft);
  const MultichannelSamples y_pad = pad(mixture, front, padded_len);
  std::optional<MultichannelSamples> x_pad, n_pad;
  if (shadow) {
    x_pad = pad(*input.speech, front, padded_len);
    n_pad = pad(*input.noise, front, padded_len);
  }

  SpeechDetector detector(map, bins, cfg.tracker);
  CovarianceTracker tracker(m, bins, cfg.tracker);

  const std::size_t num_methods = cfg.methods.size();
  std::vector<std::vector<BinState>> state(num_methods, std::vector<BinState>(bins));
  const BeamformerFilters through = BeamformerFilters::passthrough(map);
  for (auto& per_bin : state) {
    for (auto& s : per_bin) {
      s.w_left = through.w_left;
      s.w_right = through.w_right;
    }
  }
  std::vector<bool> was_ready(bins, false);

  PipelineResult result;
  result.frames = frames;
  result.outputs.resize(num_methods);
  std::vector<OverlapAdd> ola_mix, ola_speech, ola_noise;
  for (std::size_t i = 0; i < num_methods; ++i) {
    result.outputs[i].method = cfg.methods[i];
    ola_mix.emplace_back(stft, 2, padded_len);
    if (shadow) {
      ola_speech.emplace_back(stft, 2, padded_len);
      ola_noise.emplace_back(stft, 2, padded_len);
    }
  }

  MultichannelSpectrum y_frame(1, bins, m), x_frame(1, bins, m), n_frame(1, bins, m);
  auto analyze_into = [&](const MultichannelSamples& sig, std::size_t t, MultichannelSpectrum& dst) {
    std::vector<Complex> tmp(bins);
    for (std::size_t c = 0; c < m; ++c) {
      stft.analyze_frame(std::span<const double>(sig[c].data() + t * hop, frame_len), tmp);
      for (std::size_t k = 0; k < bins; ++k) dst.at(0, k, c) = tmp[k];
    }
  };
  // Padded frame t starts one hop before original frame t.
  auto original_frame = [](std::size_t t) { return t == 0 ? std::size_t{0} : t - 1; };

  std::vector<std::vector<Complex>> z_mix(num_methods * 2, std::vector<Complex>(bins));
  std::vector<std::vector<Complex>> z_x(num_methods * 2, std::vector<Complex>(bins));
  std::vector<std::vector<Complex>> z_n(num_methods * 2, std::vector<Complex>(bins));

  for (std::size_t t = 0; t < frames; ++t) {
    analyze_into(y_pad, t, y_frame);
    if (shadow) {
      analyze_into(*x_pad, t, x_frame);
      analyze_into(*n_pad, t, n_frame);
    }
    std::optional<bool> oracle_bit;
    if (input.vad_mask && !input.vad_mask->empty()) {
      const std::size_t o = std::min(original_frame(t), input.vad_mask->size() - 1);
      oracle_bit = (*input.vad_mask)[o];
    }
    const std::vector<std::uint8_t> decisions = detector.detect(y_frame, 0, oracle_bit);
    const bool refresh = t % cfg.update_every_n_frames == 0;

    for (std::size_t k = 0; k < bins; ++k) {
      const CVector y = y_frame.bin_vector(0, k);
      tracker.observe(k, y, decisions[k] != 0);
      const CovariancePair& pair = tracker.pair(k);
      if (cfg.record_covariance_trace) {
        result.covariance_trace.push_back({t, k, pair.r_y.trace(), pair.r_n.trace(), decisions[k] != 0});
      }
      const bool ready = tracker.ready(k);
      const bool became_ready = ready && !was_ready[k];
      was_ready[k] = ready;

      if (ready && (refresh || became_ready)) {
        std::optional<LoadedFactor> noise;
        try {
          noise = cholesky_with_loading(pair.r_n);
        } catch (const Error& e) {
          log::debug() << "frame " << t << " bin " << k << ": " << e.what();
        }
        std::optional<CVector> true_rtf;
        if (input.true_rtf_left) {
          const auto& rtf = *input.true_rtf_left;
          const std::size_t o = std::min(original_frame(t), rtf.frames() - 1);
          true_rtf = CVector(rtf.bin_vector(o, k));
        }
        std::optional<BinContext> ctx;
        if (noise) ctx.emplace(BinContext{map, pair, noise->factor, std::nullopt, std::nullopt});
        for (std::size_t i = 0; i < num_methods; ++i) {
          const Method& method = cfg.methods[i];
          BinState& s = state[i][k];
          MethodDiagnostics& diag = result.outputs[i].diagnostics;
          if (method.kind == Method::Kind::kPassthrough) continue;
          ++diag.filter_updates;
          if (!noise) {
            ++diag.passthrough_bins;
            s.w_left = through.w_left;
            s.w_right = through.w_right;
            continue;
          }
          if (noise->loading_applied) ++diag.loading_events;
          try {
            SteeringPair a = estimate(method, *ctx, true_rtf ? &*true_rtf : nullptr);
            s.last_left = a.left;
            s.last_right = a.right;
          } catch (const Error& e) {
            log::debug() << method.name() << " frame " << t << " bin " << k << ": " << e.what();
            if (!s.last_left) {
              ++diag.passthrough_bins;
              s.w_left = through.w_left;
              s.w_right = through.w_right;
              continue;
            }
            ++diag.unusable_bins;
          }
          try {
            const BeamformerFilters f = bmvdr(*noise, *s.last_left, *s.last_right);
            s.w_left = f.w_left;
            s.w_right = f.w_right;
          } catch (const Error& e) {
            ++diag.passthrough_bins;
            s.w_left = through.w_left;
            s.w_right = through.w_right;
          }
        }
      } else if (!ready) {
        for (std::size_t i = 0; i < num_methods; ++i) {
          BinState& s = state[i][k];
          s.w_left = through.w_left;
          s.w_right = through.w_right;
          if (cfg.methods[i].kind != Method::Kind::kPassthrough) ++result.outputs[i].diagnostics.warmup_bins;
        }
      }

      const auto xk = x_frame.bin_vector(0, k);
      const auto nk = n_frame.bin_vector(0, k);
      for (std::size_t i = 0; i < num_methods; ++i) {
        const BinState& s = state[i][k];
        z_mix[2 * i][k] = s.w_left.dot(y);
        z_mix[2 * i + 1][k] = s.w_right.dot(y);
        if (shadow) {
          z_x[2 * i][k] = s.w_left.dot(xk);
          z_x[2 * i + 1][k] = s.w_right.dot(xk);
          z_n[2 * i][k] = s.w_left.dot(nk);
          z_n[2 * i + 1][k] = s.w_right.dot(nk);
        }
      }
    }

    for (std::size_t i = 0; i < num_methods; ++i) {
      for (std::size_t side = 0; side < 2; ++side) {
        ola_mix[i].add_frame(t, side, z_mix[2 * i + side]);
        if (shadow) {
          ola_speech[i].add_frame(t, side, z_x[2 * i + side]);
          ola_noise[i].add_frame(t, side, z_n[2 * i + side]);
        }
      }
    }
  }

  for (std::size_t k = 0; k < bins; ++k) {
    if (tracker.ready(k)) ++result.ready_bins_at_end;
  }
  result.incomplete_warmup = result.ready_bins_at_end < bins;
  if (result.incomplete_warmup) {
    log::warn() << "noise covariance not ready in " << (bins - result.ready_bins_at_end) << " of " << bins
                << " bins at end of input; those bins were passed through";
  }

  for (std::size_t i = 0; i < num_methods; ++i) {
    result.outputs[i].output = trim(ola_mix[i].output(), front, len);
    if (shadow) {
      result.outputs[i].speech_output = trim(ola_speech[i].output(), front, len);
      result.outputs[i].noise_output = trim(ola_noise[i].output(), front, len);
    }
  }
  return result;
}

}  // namespace bmvdr
