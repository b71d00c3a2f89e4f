#include "bmvdr/speech_source.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "bmvdr/error.hpp"

namespace bmvdr {

namespace {

// Two-pole resonator with unit peak gain.
class Resonator {
 public:
  Resonator(double freq, double bandwidth, double fs) {
    const double r = std::exp(-std::numbers::pi * bandwidth / fs);
    a1_ = 2.0 * r * std::cos(2.0 * std::numbers::pi * freq / fs);
    a2_ = -r * r;
    gain_ = (1.0 - r) * std::sqrt(1.0 - 2.0 * r * std::cos(4.0 * std::numbers::pi * freq / fs) + r * r);
  }
  double operator()(double x) {
    const double y = gain_ * x + a1_ * y1_ + a2_ * y2_;
    y2_ = y1_;
    y1_ = y;
    return y;
  }

 private:
  double a1_ = 0.0, a2_ = 0.0, gain_ = 1.0, y1_ = 0.0, y2_ = 0.0;
};

struct Vowel {
  double f1, f2, f3;
};

constexpr std::array<Vowel, 6> kVowels{{
    {730.0, 1090.0, 2440.0},  // a
    {530.0, 1840.0, 2480.0},  // e
    {270.0, 2290.0, 3010.0},  // i
    {570.0, 840.0, 2410.0},   // o
    {300.0, 870.0, 2240.0},   // u
    {490.0, 1350.0, 1690.0},  // schwa-like
}};

void render_syllable(Samples& out, std::size_t begin, std::size_t end, bool voiced, double f0,
                     double level, std::mt19937_64& rng, double fs) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, kVowels.size() - 1);
  const Vowel v = kVowels[pick(rng)];
  Resonator r1(v.f1, 90.0, fs), r2(v.f2, 130.0, fs), r3(v.f3, 200.0, fs);
  Resonator fricative(std::uniform_real_distribution<double>(3500.0, 5500.0)(rng), 1500.0, fs);
  const std::size_t len = end - begin;
  Samples syl(len, 0.0);
  double phase = 0.0;
  double glottal = 0.0;
  double prev_noise = 0.0;
  for (std::size_t n = 0; n < len; ++n) {
    const double pos = static_cast<double>(n) / static_cast<double>(len);
    const double env = std::pow(std::sin(std::numbers::pi * pos), 0.6);
    double sample;
    if (voiced) {
      // Declining pitch within the syllable plus a little jitter.
      const double f = f0 * (1.0 - 0.08 * pos) * (1.0 + 0.01 * gauss(rng));
      phase += f / fs;
      double pulse = 0.0;
      if (phase >= 1.0) {
        phase -= 1.0;
        pulse = 1.0;
      }
      glottal = 0.92 * glottal + pulse;
      const double src = glottal + 0.02 * gauss(rng);
      sample = 1.0 * r1(src) + 1.4 * r2(src) + 0.9 * r3(src);
    } else {
      const double w = gauss(rng);
      const double hp = w - prev_noise;
      prev_noise = w;
      sample = 0.5 * fricative(hp);
    }
    syl[n] = env * sample;
  }
  // Normalize per syllable; resonator gains differ by orders of magnitude.
  double energy = 0.0;
  for (double v : syl) energy += v * v;
  if (energy <= 0.0) return;
  const double scale = level / std::sqrt(energy / static_cast<double>(len));
  for (std::size_t n = 0; n < len; ++n) out[begin + n] += scale * syl[n];
}

}  // namespace

Samples synthetic_speech(double sample_rate, double duration, std::uint64_t seed, double leading_silence) {
  if (!(sample_rate > 0.0) || !(duration > 0.0)) throw DomainError("synthetic speech: invalid rate or duration");
  const auto total = static_cast<std::size_t>(std::llround(duration * sample_rate));
  Samples out(total, 0.0);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);

  double t = leading_silence;
  while (t < duration) {
    const double sentence_end = std::min(duration, t + 1.4 + 1.0 * uni(rng));
    const double f0_base = 105.0 + 30.0 * uni(rng);
    double s = t;
    while (s < sentence_end) {
      const double syl = 0.12 + 0.16 * uni(rng);
      const double e = std::min(sentence_end, s + syl);
      const auto b = static_cast<std::size_t>(s * sample_rate);
      const auto en = std::min(total, static_cast<std::size_t>(e * sample_rate));
      if (en > b + 8) {
        const bool voiced = uni(rng) < 0.78;
        const double progress = (s - t) / (sentence_end - t);
        const double f0 = f0_base * (1.0 - 0.15 * progress);
        // Fricatives sit roughly 15 dB below vowels.
        const double level = voiced ? 0.6 + 0.4 * uni(rng) : 0.14 * (0.7 + 0.6 * uni(rng));
        render_syllable(out, b, en, voiced, f0, level, rng, sample_rate);
      }
      s = e + 0.015 + 0.03 * uni(rng);
    }
    t = sentence_end + 0.4 + 0.2 * uni(rng);
  }

  double peak = 0.0;
  for (double v : out) peak = std::max(peak, std::abs(v));
  if (peak > 0.0) {
    for (double& v : out) v *= 0.5 / peak;
  }
  return out;
}

}  // namespace bmvdr
