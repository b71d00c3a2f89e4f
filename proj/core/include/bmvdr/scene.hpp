#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "bmvdr/channel_map.hpp"
#include "bmvdr/covariance.hpp"
#include "bmvdr/linalg.hpp"
#include "bmvdr/rtf.hpp"
#include "bmvdr/stft.hpp"

namespace bmvdr {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

double distance(const Vec3& a, const Vec3& b);

enum class NoiseModel {
  // Head channels with sinc spatial coherence, externals mutually uncorrelated.
  kDiffuseHead,
  // Every channel independent.
  kFullyUncorrelated,
};

struct Waypoint {
  double time = 0.0;
  Vec3 position;
};

struct SceneSpec {
  ChannelMap channel_map{2, 3};
  std::vector<Vec3> mic_positions;
  std::vector<Waypoint> trajectory;
  double speed_of_sound = 343.0;
  NoiseModel noise_model = NoiseModel::kDiffuseHead;
  double target_input_snr_db = 0.0;
  double sample_rate = 16000.0;
  double duration = 20.0;
  std::uint64_t seed = 1;
  // Frames whose dry-speech energy is below peak * 10^(vad_threshold_db / 10)
  // are marked speech-absent.
  double vad_threshold_db = -40.0;

  void validate() const;
  // Piecewise-linear interpolation, clamped to the first/last waypoint.
  Vec3 source_position(double time) const;
  StftConfig stft() const { return StftConfig::from_duration(sample_rate); }
  std::size_t num_samples() const;
};

// Head-mounted devices with 7 mm mic spacing, E1/E2/E3 on a line 1.5 m in
// front of the head with 1.8 m spacing. `moving` walks the talker from E1 to
// E3 over the scene duration; otherwise it stands in front of E2.
SceneSpec preset_fig2(bool moving, double duration = 20.0, std::uint64_t seed = 1);
SceneSpec preset_by_name(const std::string& name, double duration, std::uint64_t seed);

// Free-field acoustic transfer function, (1/d_m) exp(-j 2 pi f d_m / c).
CVector steering_vector(const std::vector<Vec3>& mics, const Vec3& source, double frequency_hz,
                        double speed_of_sound = 343.0);
CVector steering_vector(const SceneSpec& spec, const Vec3& source, std::size_t bin);

RtfVector rtf_from_atf(const CVector& atf, std::size_t ref, Side side = Side::kLeft);

struct GroundTruth {
  MultichannelSamples speech;
  MultichannelSamples noise;
  // True left-referenced RTF per processing frame and bin.
  MultichannelSpectrum rtf_left;
  std::vector<bool> vad_mask;
  // Broadband input SNR at the left reference after scaling, dB.
  double input_snr_db = 0.0;

  MultichannelSamples mixture() const;
};

GroundTruth render_scene(const SceneSpec& spec, const Samples& dry_speech);

// Rank-1 speech model: r_y = psd a a^H + r_n.
CovariancePair exact_model_covariances(const RtfVector& rtf, double speech_psd, const HermitianMatrix& noise_cov);

// sin(x) / x with sinc(0) = 1.
double sinc(double x);

}  // namespace bmvdr
