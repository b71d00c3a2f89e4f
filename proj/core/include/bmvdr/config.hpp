#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bmvdr/error.hpp"
#include "bmvdr/metrics.hpp"
#include "bmvdr/pipeline.hpp"
#include "bmvdr/scene.hpp"

namespace bmvdr {

class ConfigError : public Error {
 public:
  using Error::Error;
};

struct SceneConfig {
  std::string preset = "fig2-moving";
  double duration = 20.0;
  double target_input_snr_db = 0.0;
  NoiseModel noise_model = NoiseModel::kDiffuseHead;
  double vad_threshold_db = -40.0;
  // Noise-only lead-in of the built-in talker; 3 s lets the noise tracker
  // warm up before speech starts.
  double leading_silence_s = 3.0;
  // Mono WAV; the built-in synthetic talker is used when empty.
  std::string dry_speech;
};

// Everything a CLI run needs. Parsed from JSON; unknown keys are rejected.
struct RunConfig {
  std::size_t left_mics = 2;
  std::size_t right_mics = 2;
  std::size_t num_external = 3;
  // file_channel_order[c] is the file channel holding canonical channel c.
  std::vector<std::size_t> file_channel_order;

  double sample_rate = 16000.0;
  double frame_ms = 32.0;
  double overlap = 0.5;

  double tau_y = 0.25;
  double tau_n = 1.5;
  double spp_threshold = 0.5;
  Detector detector = Detector::kAposterioriSnr;
  double bootstrap_s = 0.25;

  std::vector<std::string> methods{"cw", "sc-1", "sc-2", "sc-3", "isnr", "av", "msnr"};
  std::size_t update_every_n_frames = 1;
  bool covariance_trace = false;

  SceneConfig scene;
  SegmentConfig metrics;
  bool rtf_csv = false;

  std::string input_dir;
  std::string out_dir = "out";
  std::uint64_t seed = 1;

  static RunConfig parse(const std::string& json_text);
  static RunConfig load(const std::filesystem::path& path);
  // Pretty-printed JSON with every key resolved.
  std::string to_json() const;

  // Throws ConfigError.
  void validate() const;

  ChannelMap channel_map() const;
  ChannelPermutation permutation() const;
  StftConfig stft() const;
  TrackerConfig tracker() const;
  std::vector<Method> method_list() const;
  SceneSpec scene_spec() const;
  PipelineConfig pipeline() const;
};

std::string detector_name(Detector d);
std::string noise_model_name(NoiseModel m);

}  // namespace bmvdr
