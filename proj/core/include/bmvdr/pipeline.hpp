#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "bmvdr/channel_map.hpp"
#include "bmvdr/covariance.hpp"
#include "bmvdr/stft.hpp"

namespace bmvdr {

// RTF estimator feeding the BMVDR.
struct Method {
  enum class Kind { kPassthrough, kCw, kSc, kIsnr, kAv, kMsnr, kTrueRtf };
  Kind kind = Kind::kPassthrough;
  std::size_t external = 0;  // 1-based, kSc only

  // "passthrough", "cw", "sc-<i>", "isnr", "av", "msnr", "oracle-rtf".
  static Method parse(const std::string& name);
  std::string name() const;
  bool operator==(const Method&) const = default;
};

// The seven estimators compared in the evaluation (cw, sc-1..sc-M_E, isnr,
// av, msnr), in that order.
std::vector<Method> standard_methods(std::size_t num_external);

struct PipelineConfig {
  ChannelMap channel_map{2, 3};
  StftConfig stft;
  TrackerConfig tracker;
  std::vector<Method> methods;
  std::size_t update_every_n_frames = 1;
  // Record trace(r_y), trace(r_n) and the decision per (frame, bin).
  bool record_covariance_trace = false;
};

struct PipelineInput {
  MultichannelSamples mixture;
  // Separate stems enable shadow filtering. When present the mixture may be
  // left empty and is formed as speech + noise.
  std::optional<MultichannelSamples> speech;
  std::optional<MultichannelSamples> noise;
  // Per-frame ground-truth speech activity for the oracle detector.
  std::optional<std::vector<bool>> vad_mask;
  // True left-referenced RTFs for the oracle-rtf method (frames x bins x M).
  std::optional<MultichannelSpectrum> true_rtf_left;
};

struct MethodDiagnostics {
  std::size_t filter_updates = 0;
  std::size_t warmup_bins = 0;       // bin-frames in pass-through because the tracker was not ready
  std::size_t unusable_bins = 0;     // estimator failed; previous RTF reused
  std::size_t passthrough_bins = 0;  // estimator failed with no previous RTF
  std::size_t loading_events = 0;    // r_n needed diagonal loading
};

struct MethodOutput {
  Method method;
  MultichannelSamples output;  // binaural, 2 channels
  std::optional<MultichannelSamples> speech_output;
  std::optional<MultichannelSamples> noise_output;
  MethodDiagnostics diagnostics;
};

struct CovarianceTraceRow {
  std::size_t frame;
  std::size_t bin;
  double trace_r_y;
  double trace_r_n;
  bool speech;
};

struct PipelineResult {
  std::vector<MethodOutput> outputs;
  std::size_t frames = 0;
  // True when some bin never became ready before the end of the input.
  bool incomplete_warmup = false;
  std::size_t ready_bins_at_end = 0;
  std::vector<CovarianceTraceRow> covariance_trace;
};

// STFT -> speech detection -> covariance tracking -> RTF estimation -> BMVDR
// -> resynthesis. All methods share the same covariance track. The input is
// padded by one hop at the front and up to a full frame at the back so that
// every output sample is fully reconstructed; outputs have the input length.
PipelineResult run_pipeline(const PipelineConfig& cfg, const PipelineInput& input);

}  // namespace bmvdr
