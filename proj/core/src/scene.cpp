#include "bmvdr/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "bmvdr/error.hpp"
#include "real_fft.hpp"

namespace bmvdr {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Long-term noise spectrum shape (babble-like low-pass tilt).
double noise_psd_shape(double f) { return 1.0 / (1.0 + std::pow(f / 500.0, 2.0)); }

std::mt19937_64 channel_stream(std::uint64_t seed, std::size_t channel, std::uint32_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(channel), tag};
  return std::mt19937_64(seq);
}

double sum_squares(const Samples& s) {
  double acc = 0.0;
  for (double v : s) acc += v * v;
  return acc;
}

// Speech stems by frame-wise steering: Hann-windowed dry segments (50%
// overlap, so the windows sum to one) are delayed/attenuated in a zero-padded
// FFT block using the steering vector at the frame's centre position.
MultichannelSamples render_speech(const SceneSpec& spec, const Samples& dry) {
  const StftConfig cfg = spec.stft();
  const std::size_t total = spec.num_samples();
  const std::size_t len = cfg.frame_len;
  const std::size_t hop = cfg.hop;
  const std::size_t pad = 2 * len;
  const detail::RealFft fft(pad);
  const std::size_t m = spec.channel_map.total();

  std::vector<double> hann(len);
  for (std::size_t n = 0; n < len; ++n) {
    const double s = std::sin(std::numbers::pi * static_cast<double>(n) / static_cast<double>(len));
    hann[n] = s * s;
  }

  MultichannelSamples out(m, Samples(total, 0.0));
  std::vector<double> block(pad);
  std::vector<double> rendered(pad);
  std::vector<Complex> spectrum(fft.bins());
  std::vector<Complex> steered(fft.bins());
  for (long start = -static_cast<long>(hop); start < static_cast<long>(total); start += static_cast<long>(hop)) {
    std::fill(block.begin(), block.end(), 0.0);
    bool silent = true;
    for (std::size_t n = 0; n < len; ++n) {
      const long idx = start + static_cast<long>(n);
      if (idx >= 0 && idx < static_cast<long>(total)) {
        block[n] = hann[n] * dry[static_cast<std::size_t>(idx)];
        silent = silent && block[n] == 0.0;
      }
    }
    if (silent) continue;
    fft.forward(block, spectrum);
    const double centre = (static_cast<double>(start) + static_cast<double>(len) / 2.0) / spec.sample_rate;
    const Vec3 pos = spec.source_position(centre);
    std::vector<double> dist(m);
    for (std::size_t c = 0; c < m; ++c) dist[c] = distance(pos, spec.mic_positions[c]);
    for (std::size_t c = 0; c < m; ++c) {
      for (std::size_t k = 0; k < fft.bins(); ++k) {
        const double f = static_cast<double>(k) * spec.sample_rate / static_cast<double>(pad);
        steered[k] = spectrum[k] * std::polar(1.0 / dist[c], -kTwoPi * f * dist[c] / spec.speed_of_sound);
      }
      fft.inverse(steered, rendered);
      for (std::size_t n = 0; n < pad; ++n) {
        const long idx = start + static_cast<long>(n);
        if (idx >= 0 && idx < static_cast<long>(total)) out[c][static_cast<std::size_t>(idx)] += rendered[n];
      }
    }
  }
  return out;
}

// Noise drawn as complex Gaussian STFT coefficients on the processing grid
// and resynthesized with sqrt-Hann overlap-add. Head channels are optionally
// mixed per bin through the Cholesky factor of the diffuse coherence matrix.
MultichannelSamples render_noise(const SceneSpec& spec) {
  const StftConfig cfg = spec.stft();
  const Stft stft(cfg);
  const std::size_t total = spec.num_samples();
  const std::size_t m = spec.channel_map.total();
  const std::size_t head = 2 * spec.channel_map.device_mics_per_side();
  const std::size_t bins = cfg.bins();
  // One extra frame before and after so every sample has full overlap.
  const std::size_t frames = total / cfg.hop + 3;

  std::vector<CMatrix> mixing;
  if (spec.noise_model == NoiseModel::kDiffuseHead) {
    mixing.resize(bins);
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = cfg.bin_frequency(k);
      CMatrix gamma(static_cast<Eigen::Index>(head), static_cast<Eigen::Index>(head));
      for (std::size_t i = 0; i < head; ++i) {
        for (std::size_t j = 0; j < head; ++j) {
          const double d = distance(spec.mic_positions[i], spec.mic_positions[j]);
          gamma(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
              sinc(kTwoPi * f * d / spec.speed_of_sound);
        }
      }
      HermitianMatrix g = HermitianMatrix::symmetrized(gamma);
      g.add_diagonal(1e-9);
      mixing[k] = cholesky(g).lower();
    }
  }

  std::vector<std::mt19937_64> streams;
  streams.reserve(m);
  for (std::size_t c = 0; c < m; ++c) streams.push_back(channel_stream(spec.seed, c, 0x6e6f6973u));
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));

  std::vector<double> shape(bins);
  for (std::size_t k = 0; k < bins; ++k) shape[k] = std::sqrt(noise_psd_shape(cfg.bin_frequency(k)));

  MultichannelSamples padded(m, Samples((frames + 1) * cfg.hop, 0.0));
  OverlapAdd ola(stft, m, padded.front().size());
  std::vector<std::vector<Complex>> coeffs(m, std::vector<Complex>(bins));
  CVector u(static_cast<Eigen::Index>(head));
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t c = 0; c < m; ++c) {
      for (std::size_t k = 0; k < bins; ++k) {
        const double re = gauss(streams[c]);
        const double im = gauss(streams[c]);
        coeffs[c][k] = Complex(re, (k == 0 || k + 1 == bins) ? 0.0 : im);
      }
    }
    if (!mixing.empty()) {
      for (std::size_t k = 0; k < bins; ++k) {
        for (std::size_t c = 0; c < head; ++c) u(static_cast<Eigen::Index>(c)) = coeffs[c][k];
        const CVector mixed = mixing[k] * u;
        for (std::size_t c = 0; c < head; ++c) coeffs[c][k] = mixed(static_cast<Eigen::Index>(c));
      }
    }
    for (std::size_t c = 0; c < m; ++c) {
      for (std::size_t k = 0; k < bins; ++k) coeffs[c][k] *= shape[k];
      ola.add_frame(t, c, coeffs[c]);
    }
  }
  MultichannelSamples full = ola.take();
  MultichannelSamples out(m);
  for (std::size_t c = 0; c < m; ++c) {
    out[c].assign(full[c].begin() + static_cast<long>(cfg.frame_len),
                  full[c].begin() + static_cast<long>(cfg.frame_len + total));
  }
  return out;
}

}  // namespace

double distance(const Vec3& a, const Vec3& b) {
  const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

std::size_t SceneSpec::num_samples() const {
  return static_cast<std::size_t>(std::llround(duration * sample_rate));
}

void SceneSpec::validate() const {
  if (!(sample_rate > 0.0) || !(duration > 0.0)) throw DomainError("scene: sample rate and duration must be positive");
  if (!(speed_of_sound > 0.0)) throw DomainError("scene: speed of sound must be positive");
  if (mic_positions.size() != channel_map.total()) {
    throw DomainError("scene: " + std::to_string(mic_positions.size()) + " mic positions for " +
                      std::to_string(channel_map.total()) + " channels");
  }
  for (std::size_t i = 0; i < mic_positions.size(); ++i) {
    for (std::size_t j = i + 1; j < mic_positions.size(); ++j) {
      if (distance(mic_positions[i], mic_positions[j]) == 0.0) {
        throw DomainError("scene: microphones " + std::to_string(i) + " and " + std::to_string(j) + " coincide");
      }
    }
  }
  if (trajectory.empty()) throw DomainError("scene: empty source trajectory");
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    const double t = trajectory[i].time;
    if (t < 0.0 || t > duration) throw DomainError("scene: waypoint time outside [0, duration]");
    if (i > 0 && !(t > trajectory[i - 1].time)) throw DomainError("scene: waypoint times must increase strictly");
  }
  StftConfig::from_duration(sample_rate);
}

Vec3 SceneSpec::source_position(double time) const {
  if (trajectory.empty()) throw DomainError("scene: empty source trajectory");
  if (time <= trajectory.front().time) return trajectory.front().position;
  if (time >= trajectory.back().time) return trajectory.back().position;
  auto it = std::upper_bound(trajectory.begin(), trajectory.end(), time,
                             [](double t, const Waypoint& w) { return t < w.time; });
  const Waypoint& b = *it;
  const Waypoint& a = *(it - 1);
  const double u = (time - a.time) / (b.time - a.time);
  return {a.position.x + u * (b.position.x - a.position.x), a.position.y + u * (b.position.y - a.position.y),
          a.position.z + u * (b.position.z - a.position.z)};
}

SceneSpec preset_fig2(bool moving, double duration, std::uint64_t seed) {
  SceneSpec spec;
  spec.channel_map = ChannelMap(2, 3);
  spec.duration = duration;
  spec.seed = seed;
  constexpr double half_head = 0.08;
  constexpr double half_spacing = 0.0035;
  spec.mic_positions = {
      {-half_head, half_spacing, 0.0}, {-half_head, -half_spacing, 0.0},  // left device
      {half_head, half_spacing, 0.0},  {half_head, -half_spacing, 0.0},   // right device
      {-1.8, 1.5, 0.0},                {0.0, 1.5, 0.0},                   // E1, E2
      {1.8, 1.5, 0.0},                                                    // E3
  };
  // Talker half a metre beyond the external line, mouth slightly above mic height.
  constexpr double talker_y = 2.0;
  constexpr double talker_z = 0.2;
  if (moving) {
    spec.trajectory = {{0.0, {-1.8, talker_y, talker_z}}, {duration, {1.8, talker_y, talker_z}}};
  } else {
    spec.trajectory = {{0.0, {0.0, talker_y, talker_z}}};
  }
  return spec;
}

SceneSpec preset_by_name(const std::string& name, double duration, std::uint64_t seed) {
  if (name == "fig2-moving") return preset_fig2(true, duration, seed);
  if (name == "fig2-static") return preset_fig2(false, duration, seed);
  throw DomainError("unknown scene preset '" + name + "'");
}

CVector steering_vector(const std::vector<Vec3>& mics, const Vec3& source, double frequency_hz,
                        double speed_of_sound) {
  CVector atf(static_cast<Eigen::Index>(mics.size()));
  for (std::size_t m = 0; m < mics.size(); ++m) {
    const double d = distance(mics[m], source);
    if (d == 0.0) throw DomainError("steering vector: source coincides with microphone " + std::to_string(m));
    atf(static_cast<Eigen::Index>(m)) = std::polar(1.0 / d, -kTwoPi * frequency_hz * d / speed_of_sound);
  }
  return atf;
}

CVector steering_vector(const SceneSpec& spec, const Vec3& source, std::size_t bin) {
  return steering_vector(spec.mic_positions, source, spec.stft().bin_frequency(bin), spec.speed_of_sound);
}

RtfVector rtf_from_atf(const CVector& atf, std::size_t ref, Side side) { return RtfVector(atf, ref, side); }

MultichannelSamples GroundTruth::mixture() const {
  MultichannelSamples mix = speech;
  for (std::size_t c = 0; c < mix.size(); ++c) {
    for (std::size_t n = 0; n < mix[c].size(); ++n) mix[c][n] += noise[c][n];
  }
  return mix;
}

GroundTruth render_scene(const SceneSpec& spec, const Samples& dry_speech) {
  spec.validate();
  const std::size_t total = spec.num_samples();
  if (dry_speech.size() < total) {
    throw DomainError("dry speech has " + std::to_string(dry_speech.size()) + " samples, scene needs " +
                      std::to_string(total));
  }
  const StftConfig cfg = spec.stft();
  const std::size_t m = spec.channel_map.total();
  const std::size_t ref = spec.channel_map.ref_left();

  GroundTruth gt;
  gt.speech = render_speech(spec, dry_speech);
  gt.noise = render_noise(spec);

  const double ps = sum_squares(gt.speech[ref]);
  const double pn = sum_squares(gt.noise[ref]);
  if (!(ps > 0.0) || !(pn > 0.0)) throw DomainError("scene: speech or noise is silent at the reference microphone");
  const double noise_gain = std::sqrt(ps / (pn * std::pow(10.0, spec.target_input_snr_db / 10.0)));
  for (auto& ch : gt.noise) {
    for (double& v : ch) v *= noise_gain;
  }
  // Common scaling so that the mixture peaks at 0.5, then round both stems to
  // single precision so that float WAV files reproduce them exactly.
  double peak = 0.0;
  for (std::size_t c = 0; c < m; ++c) {
    for (std::size_t n = 0; n < total; ++n) peak = std::max(peak, std::abs(gt.speech[c][n] + gt.noise[c][n]));
  }
  const double scale = peak > 0.0 ? 0.5 / peak : 1.0;
  for (std::size_t c = 0; c < m; ++c) {
    for (std::size_t n = 0; n < total; ++n) {
      gt.speech[c][n] = static_cast<double>(static_cast<float>(gt.speech[c][n] * scale));
      gt.noise[c][n] = static_cast<double>(static_cast<float>(gt.noise[c][n] * scale));
    }
  }
  gt.input_snr_db = 10.0 * std::log10(sum_squares(gt.speech[ref]) / sum_squares(gt.noise[ref]));

  const std::size_t frames = cfg.frame_count(total);
  gt.rtf_left = MultichannelSpectrum(frames, cfg.bins(), m);
  std::vector<double> frame_energy(frames, 0.0);
  const std::vector<double> window = sqrt_hann(cfg.frame_len);
  for (std::size_t t = 0; t < frames; ++t) {
    const double centre = (static_cast<double>(t * cfg.hop) + static_cast<double>(cfg.frame_len) / 2.0) / spec.sample_rate;
    const Vec3 pos = spec.source_position(centre);
    for (std::size_t k = 0; k < cfg.bins(); ++k) {
      const RtfVector a = rtf_from_atf(steering_vector(spec, pos, k), ref);
      gt.rtf_left.bin_vector(t, k) = a.values();
    }
    // Dry speech aligned with its arrival at the left reference.
    const auto delay = static_cast<long>(std::lround(distance(pos, spec.mic_positions[ref]) / spec.speed_of_sound *
                                                     spec.sample_rate));
    double e = 0.0;
    for (std::size_t n = 0; n < cfg.frame_len; ++n) {
      const long idx = static_cast<long>(t * cfg.hop + n) - delay;
      if (idx >= 0 && idx < static_cast<long>(dry_speech.size())) {
        const double v = window[n] * dry_speech[static_cast<std::size_t>(idx)];
        e += v * v;
      }
    }
    frame_energy[t] = e;
  }
  const double peak_energy = frames > 0 ? *std::max_element(frame_energy.begin(), frame_energy.end()) : 0.0;
  const double threshold = peak_energy * std::pow(10.0, spec.vad_threshold_db / 10.0);
  gt.vad_mask.resize(frames);
  for (std::size_t t = 0; t < frames; ++t) gt.vad_mask[t] = frame_energy[t] > threshold;
  return gt;
}

CovariancePair exact_model_covariances(const RtfVector& rtf, double speech_psd, const HermitianMatrix& noise_cov) {
  if (speech_psd < 0.0) throw DomainError("speech PSD must be nonnegative");
  if (noise_cov.dim() != rtf.size()) throw DomainError("noise covariance does not match RTF dimension");
  CovariancePair pair;
  pair.r_n = noise_cov;
  pair.r_y = HermitianMatrix::symmetrized(speech_psd * rtf.values() * rtf.values().adjoint() + noise_cov.matrix());
  return pair;
}

}  // namespace bmvdr
