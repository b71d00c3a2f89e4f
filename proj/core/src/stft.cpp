#include "bmvdr/stft.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "bmvdr/error.hpp"
#include "real_fft.hpp"

namespace bmvdr {

StftConfig StftConfig::from_duration(double sample_rate, double frame_seconds) {
  StftConfig cfg;
  cfg.sample_rate = sample_rate;
  auto len = static_cast<std::size_t>(std::lround(sample_rate * frame_seconds));
  if (len % 2 != 0) ++len;
  cfg.frame_len = len;
  cfg.hop = len / 2;
  cfg.validate();
  return cfg;
}

void StftConfig::validate() const {
  if (!(sample_rate > 0.0)) throw DomainError("sample rate must be positive");
  if (frame_len < 2 || frame_len % 2 != 0) {
    throw DomainError("frame length must be even and >= 2, got " + std::to_string(frame_len));
  }
  if (hop * 2 != frame_len) {
    throw DomainError("hop must be half the frame length (50% overlap), got hop " + std::to_string(hop));
  }
}

std::size_t StftConfig::frame_count(std::size_t signal_length) const {
  if (signal_length < frame_len) return 0;
  return 1 + (signal_length - frame_len) / hop;
}

std::vector<double> sqrt_hann(std::size_t frame_len) {
  std::vector<double> w(frame_len);
  for (std::size_t n = 0; n < frame_len; ++n) {
    w[n] = std::sin(std::numbers::pi * static_cast<double>(n) / static_cast<double>(frame_len));
  }
  return w;
}

MultichannelSpectrum::MultichannelSpectrum(std::size_t frames, std::size_t bins, std::size_t channels)
    : frames_(frames), bins_(bins), channels_(channels), data_(frames * bins * channels) {}

Stft::Stft(const StftConfig& cfg) : cfg_(cfg), window_(sqrt_hann(cfg.frame_len)) {
  cfg_.validate();
  fft_ = std::make_unique<detail::RealFft>(cfg_.frame_len);
}

Stft::~Stft() = default;
Stft::Stft(Stft&&) noexcept = default;
Stft& Stft::operator=(Stft&&) noexcept = default;

void Stft::analyze_frame(std::span<const double> segment, std::span<std::complex<double>> out) const {
  if (segment.size() != cfg_.frame_len || out.size() != cfg_.bins()) {
    throw DomainError("analyze_frame: buffer sizes do not match the configuration");
  }
  std::vector<double> buf(cfg_.frame_len);
  for (std::size_t n = 0; n < cfg_.frame_len; ++n) buf[n] = window_[n] * segment[n];
  fft_->forward(buf, out);
}

void Stft::synthesize_frame(std::span<const std::complex<double>> spectrum, std::span<double> out) const {
  if (spectrum.size() != cfg_.bins() || out.size() != cfg_.frame_len) {
    throw DomainError("synthesize_frame: buffer sizes do not match the configuration");
  }
  fft_->inverse(spectrum, out);
  for (std::size_t n = 0; n < cfg_.frame_len; ++n) out[n] *= window_[n];
}

MultichannelSpectrum Stft::analyze(const MultichannelSamples& signal) const {
  if (signal.empty()) throw DomainError("analyze: no channels");
  const std::size_t len = signal.front().size();
  for (const auto& ch : signal) {
    if (ch.size() != len) throw DomainError("analyze: channel length mismatch");
  }
  if (len < cfg_.frame_len) {
    throw DomainError("analyze: signal shorter than one frame (" + std::to_string(len) + " < " +
                      std::to_string(cfg_.frame_len) + ")");
  }
  const std::size_t frames = cfg_.frame_count(len);
  const std::size_t bins = cfg_.bins();
  const std::size_t channels = signal.size();
  MultichannelSpectrum spec(frames, bins, channels);
  std::vector<std::complex<double>> tmp(bins);
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t c = 0; c < channels; ++c) {
      analyze_frame(std::span<const double>(signal[c].data() + t * cfg_.hop, cfg_.frame_len), tmp);
      for (std::size_t k = 0; k < bins; ++k) spec.at(t, k, c) = tmp[k];
    }
  }
  return spec;
}

MultichannelSamples Stft::synthesize(const MultichannelSpectrum& spec, std::size_t length) const {
  if (spec.bins() != cfg_.bins()) {
    throw DomainError("synthesize: spectrum has " + std::to_string(spec.bins()) + " bins, configuration expects " +
                      std::to_string(cfg_.bins()));
  }
  if (length == 0 && spec.frames() > 0) length = (spec.frames() - 1) * cfg_.hop + cfg_.frame_len;
  OverlapAdd ola(*this, spec.channels(), length);
  std::vector<std::complex<double>> tmp(spec.bins());
  for (std::size_t t = 0; t < spec.frames(); ++t) {
    for (std::size_t c = 0; c < spec.channels(); ++c) {
      for (std::size_t k = 0; k < spec.bins(); ++k) tmp[k] = spec.at(t, k, c);
      ola.add_frame(t, c, tmp);
    }
  }
  return ola.take();
}

MultichannelSpectrum analyze(const MultichannelSamples& signal, const StftConfig& cfg) {
  return Stft(cfg).analyze(signal);
}

MultichannelSamples synthesize(const MultichannelSpectrum& spec, const StftConfig& cfg, std::size_t length) {
  return Stft(cfg).synthesize(spec, length);
}

OverlapAdd::OverlapAdd(const Stft& stft, std::size_t channels, std::size_t length)
    : stft_(&stft), out_(channels, Samples(length, 0.0)), scratch_(stft.config().frame_len) {}

void OverlapAdd::add_frame(std::size_t frame, std::size_t channel, std::span<const std::complex<double>> spectrum) {
  if (channel >= out_.size()) throw DomainError("overlap-add: channel out of range");
  stft_->synthesize_frame(spectrum, scratch_);
  Samples& dst = out_[channel];
  const std::size_t start = frame * stft_->config().hop;
  for (std::size_t n = 0; n < scratch_.size() && start + n < dst.size(); ++n) dst[start + n] += scratch_[n];
}

}  // namespace bmvdr
