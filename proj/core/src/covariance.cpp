#include "bmvdr/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "bmvdr/error.hpp"

namespace bmvdr {

CovariancePair CovariancePair::zeros(std::size_t dim) {
  return {HermitianMatrix::zeros(dim), HermitianMatrix::zeros(dim), 0, 0};
}

CovariancePair CovariancePair::scaled_identity(std::size_t dim, double epsilon) {
  return {HermitianMatrix::identity(dim, epsilon), HermitianMatrix::identity(dim, epsilon), 0, 0};
}

double TrackerConfig::alpha_y() const { return std::exp(-hop_seconds / tau_y); }
double TrackerConfig::alpha_n() const { return std::exp(-hop_seconds / tau_n); }

std::size_t TrackerConfig::warmup() const {
  if (warmup_frames) return *warmup_frames;
  return static_cast<std::size_t>(std::ceil(2.0 * tau_n / hop_seconds));
}

std::size_t TrackerConfig::bootstrap_frames() const {
  return static_cast<std::size_t>(std::ceil(bootstrap_seconds / hop_seconds));
}

void TrackerConfig::validate() const {
  if (!(tau_y > 0.0) || !(tau_n > 0.0)) throw DomainError("time constants must be positive");
  if (!(hop_seconds > 0.0)) throw DomainError("hop must be positive");
  if (!(spp_threshold > 0.0 && spp_threshold < 1.0)) throw DomainError("spp_threshold must lie in (0, 1)");
  if (!(bootstrap_seconds >= 0.0)) throw DomainError("bootstrap_seconds must be nonnegative");
}

void update_in_place(CovariancePair& pair, const CVector& y, bool is_speech, const TrackerConfig& cfg) {
  if (static_cast<std::size_t>(y.size()) != pair.dim() || pair.r_y.dim() != pair.r_n.dim()) {
    throw DomainError("covariance update: vector has " + std::to_string(y.size()) + " entries, matrices are " +
                      std::to_string(pair.dim()) + "-dimensional");
  }
  if (is_speech) {
    const double a = cfg.alpha_y();
    pair.r_y.blend_outer(a, 1.0 - a, y);
    ++pair.frames_seen_y;
  } else {
    const double a = cfg.alpha_n();
    pair.r_n.blend_outer(a, 1.0 - a, y);
    ++pair.frames_seen_n;
  }
}

CovariancePair update(const CovariancePair& pair, const CVector& y, bool is_speech, const TrackerConfig& cfg) {
  CovariancePair out = pair;
  update_in_place(out, y, is_speech, cfg);
  return out;
}

bool is_ready(const CovariancePair& pair, const TrackerConfig& cfg) {
  if (pair.frames_seen_n < cfg.warmup()) return false;
  return passes_pd_check(pair.r_n);
}

SpeechDetector::SpeechDetector(const ChannelMap& map, std::size_t bins, const TrackerConfig& cfg)
    : map_(map), bins_(bins), cfg_(cfg), floor_(bins * map.num_external(), 0.0) {
  if (cfg_.detector == Detector::kAposterioriSnr && map_.num_external() == 0) {
    throw DomainError("a-posteriori SNR detection needs at least one external microphone");
  }
}

double SpeechDetector::mean_score(std::span<const double> external_power, std::span<const double> noise_floor) {
  if (external_power.empty() || external_power.size() != noise_floor.size()) {
    throw DomainError("mean_score: mismatched external channel counts");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < external_power.size(); ++i) {
    const double p = external_power[i];
    const double f = noise_floor[i];
    double gamma;
    if (f > 0.0) {
      gamma = p / f;
    } else {
      gamma = p > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    }
    sum += std::isinf(gamma) ? 1.0 : presence_score(gamma);
  }
  return sum / static_cast<double>(external_power.size());
}

std::vector<std::uint8_t> SpeechDetector::detect(const MultichannelSpectrum& spec, std::size_t frame,
                                                 std::optional<bool> oracle_frame_bit) {
  if (spec.bins() != bins_ || spec.channels() != map_.total()) {
    throw DomainError("speech detector: spectrum grid does not match the channel map");
  }
  std::vector<std::uint8_t> decisions(bins_, 0);
  if (cfg_.detector == Detector::kOracleVad) {
    if (!oracle_frame_bit) throw DomainError("oracle VAD mode requires a ground-truth speech mask");
    std::fill(decisions.begin(), decisions.end(), *oracle_frame_bit ? 1 : 0);
    ++frames_;
    return decisions;
  }

  const std::size_t me = map_.num_external();
  const double alpha = cfg_.alpha_n();
  const std::size_t boot = cfg_.bootstrap_frames();
  std::vector<double> power(me);
  for (std::size_t k = 0; k < bins_; ++k) {
    for (std::size_t i = 0; i < me; ++i) power[i] = std::norm(spec.at(frame, k, map_.external_indices()[i]));
    double* floor = &floor_[k * me];
    if (frames_ < boot) {
      // Running mean over the bootstrap span; decisions stay noise-only.
      const double n = static_cast<double>(frames_ + 1);
      for (std::size_t i = 0; i < me; ++i) floor[i] += (power[i] - floor[i]) / n;
      continue;
    }
    const bool speech = mean_score(power, std::span<const double>(floor, me)) > cfg_.spp_threshold;
    decisions[k] = speech ? 1 : 0;
    if (!speech) {
      for (std::size_t i = 0; i < me; ++i) floor[i] = alpha * floor[i] + (1.0 - alpha) * power[i];
    }
  }
  ++frames_;
  return decisions;
}

CovarianceTracker::CovarianceTracker(std::size_t channels, std::size_t bins, const TrackerConfig& cfg)
    : channels_(channels), cfg_(cfg), pairs_(bins, CovariancePair::zeros(channels)), initialized_(bins, false) {
  cfg_.validate();
}

void CovarianceTracker::observe(std::size_t bin, const CVector& y, bool is_speech) {
  CovariancePair& pair = pairs_.at(bin);
  if (!initialized_[bin]) {
    const double power = y.squaredNorm() / static_cast<double>(channels_);
    if (power > 0.0) {
      const double eps = cfg_.init_scale * power;
      pair.r_y = HermitianMatrix::identity(channels_, eps);
      pair.r_n = HermitianMatrix::identity(channels_, eps);
      initialized_[bin] = true;
    }
  }
  update_in_place(pair, y, is_speech, cfg_);
}

}  // namespace bmvdr
