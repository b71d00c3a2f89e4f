#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "bmvdr/channel_map.hpp"
#include "bmvdr/linalg.hpp"
#include "bmvdr/stft.hpp"

namespace bmvdr {

// Noisy (r_y) and noise-only (r_n) covariance estimates of one frequency bin.
struct CovariancePair {
  HermitianMatrix r_y;
  HermitianMatrix r_n;
  std::size_t frames_seen_y = 0;
  std::size_t frames_seen_n = 0;

  static CovariancePair zeros(std::size_t dim);
  static CovariancePair scaled_identity(std::size_t dim, double epsilon);
  std::size_t dim() const { return r_n.dim(); }
};

enum class Detector { kOracleVad, kAposterioriSnr };

struct TrackerConfig {
  double tau_y = 0.25;
  double tau_n = 1.5;
  double hop_seconds = 0.016;
  double spp_threshold = 0.5;
  Detector detector = Detector::kOracleVad;
  // Initial span of input assumed noise-only by the a-posteriori SNR detector.
  double bootstrap_seconds = 0.25;
  // r_y = r_n = init_scale * (mean channel power of the first frame) * I.
  double init_scale = 1e-6;
  // Noise frames required before the beamformer may engage; defaults to
  // 2 * tau_n / hop_seconds.
  std::optional<std::size_t> warmup_frames;

  double alpha_y() const;
  double alpha_n() const;
  std::size_t warmup() const;
  std::size_t bootstrap_frames() const;
  void validate() const;
};

// Exponential smoothing of r_y (speech) or r_n (noise-only) with y y^H.
CovariancePair update(const CovariancePair& pair, const CVector& y, bool is_speech, const TrackerConfig& cfg);
void update_in_place(CovariancePair& pair, const CVector& y, bool is_speech, const TrackerConfig& cfg);

// Warm-up complete and r_n passes the positive-definiteness check.
bool is_ready(const CovariancePair& pair, const TrackerConfig& cfg);

// Per-bin speech-presence decisions. In a-posteriori SNR mode each external
// channel contributes gamma / (1 + gamma) with gamma = |y_E|^2 / sigma^2, the
// scores are averaged over externals and compared against spp_threshold.
class SpeechDetector {
 public:
  SpeechDetector(const ChannelMap& map, std::size_t bins, const TrackerConfig& cfg);

  // `oracle_frame_bit` is required in OracleVad mode and ignored otherwise.
  std::vector<std::uint8_t> detect(const MultichannelSpectrum& spec, std::size_t frame,
                                   std::optional<bool> oracle_frame_bit = std::nullopt);

  static double presence_score(double gamma) { return gamma / (1.0 + gamma); }

  // Mean presence score for one bin given external powers and noise floors.
  static double mean_score(std::span<const double> external_power, std::span<const double> noise_floor);

  double noise_floor(std::size_t bin, std::size_t external) const {
    return floor_[bin * map_.num_external() + external];
  }
  void set_noise_floor(std::size_t bin, std::size_t external, double value) {
    floor_[bin * map_.num_external() + external] = value;
  }
  std::size_t frames_processed() const { return frames_; }

 private:
  ChannelMap map_;
  std::size_t bins_;
  TrackerConfig cfg_;
  std::vector<double> floor_;
  std::size_t frames_ = 0;
};

// Owns per-bin covariance state; initializes each bin lazily from its first
// non-silent frame.
class CovarianceTracker {
 public:
  CovarianceTracker(std::size_t channels, std::size_t bins, const TrackerConfig& cfg);

  void observe(std::size_t bin, const CVector& y, bool is_speech);
  const CovariancePair& pair(std::size_t bin) const { return pairs_.at(bin); }
  bool ready(std::size_t bin) const { return is_ready(pairs_.at(bin), cfg_); }
  std::size_t bins() const { return pairs_.size(); }
  const TrackerConfig& config() const { return cfg_; }

 private:
  std::size_t channels_;
  TrackerConfig cfg_;
  std::vector<CovariancePair> pairs_;
  std::vector<bool> initialized_;
};

}  // namespace bmvdr
