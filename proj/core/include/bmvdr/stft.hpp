#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace bmvdr {

namespace detail {
class RealFft;
}

using Samples = std::vector<double>;
// Outer index is the channel.
using MultichannelSamples = std::vector<Samples>;

struct StftConfig {
  double sample_rate = 16000.0;
  std::size_t frame_len = 512;
  std::size_t hop = 256;

  // Square-root Hann window of `frame_seconds`, 50% overlap.
  static StftConfig from_duration(double sample_rate, double frame_seconds = 0.032);

  std::size_t bins() const { return frame_len / 2 + 1; }
  double hop_seconds() const { return static_cast<double>(hop) / sample_rate; }
  double bin_frequency(std::size_t bin) const {
    return static_cast<double>(bin) * sample_rate / static_cast<double>(frame_len);
  }
  std::size_t frame_count(std::size_t signal_length) const;
  // Throws DomainError unless frame_len is even, positive and hop == frame_len / 2.
  void validate() const;
};

// Periodic square-root Hann window, sin(pi n / N).
std::vector<double> sqrt_hann(std::size_t frame_len);

// Complex STFT coefficients laid out as [frame][bin][channel], so that the
// channel vector of one time-frequency bin is contiguous.
class MultichannelSpectrum {
 public:
  MultichannelSpectrum() = default;
  MultichannelSpectrum(std::size_t frames, std::size_t bins, std::size_t channels);

  std::size_t frames() const { return frames_; }
  std::size_t bins() const { return bins_; }
  std::size_t channels() const { return channels_; }

  std::complex<double>& at(std::size_t frame, std::size_t bin, std::size_t ch) {
    return data_[offset(frame, bin) + ch];
  }
  const std::complex<double>& at(std::size_t frame, std::size_t bin, std::size_t ch) const {
    return data_[offset(frame, bin) + ch];
  }

  Eigen::Map<Eigen::VectorXcd> bin_vector(std::size_t frame, std::size_t bin) {
    return {data_.data() + offset(frame, bin), static_cast<Eigen::Index>(channels_)};
  }
  Eigen::Map<const Eigen::VectorXcd> bin_vector(std::size_t frame, std::size_t bin) const {
    return {data_.data() + offset(frame, bin), static_cast<Eigen::Index>(channels_)};
  }

  const std::vector<std::complex<double>>& data() const { return data_; }
  std::vector<std::complex<double>>& data() { return data_; }

  bool same_grid(const MultichannelSpectrum& o) const {
    return frames_ == o.frames_ && bins_ == o.bins_ && channels_ == o.channels_;
  }

 private:
  std::size_t offset(std::size_t frame, std::size_t bin) const { return (frame * bins_ + bin) * channels_; }

  std::size_t frames_ = 0;
  std::size_t bins_ = 0;
  std::size_t channels_ = 0;
  std::vector<std::complex<double>> data_;
};

// Single-frame real FFT engine with the analysis/synthesis window applied.
class Stft {
 public:
  explicit Stft(const StftConfig& cfg);
  ~Stft();
  Stft(Stft&&) noexcept;
  Stft& operator=(Stft&&) noexcept;
  Stft(const Stft&) = delete;
  Stft& operator=(const Stft&) = delete;

  const StftConfig& config() const { return cfg_; }
  const std::vector<double>& window() const { return window_; }

  // One-sided DFT of window * segment; segment.size() == frame_len.
  void analyze_frame(std::span<const double> segment, std::span<std::complex<double>> out) const;
  // window * inverse DFT of a one-sided spectrum; out.size() == frame_len.
  void synthesize_frame(std::span<const std::complex<double>> spectrum, std::span<double> out) const;

  MultichannelSpectrum analyze(const MultichannelSamples& signal) const;
  // Weighted overlap-add. `length` 0 means (frames - 1) * hop + frame_len.
  MultichannelSamples synthesize(const MultichannelSpectrum& spec, std::size_t length = 0) const;

 private:
  StftConfig cfg_;
  std::vector<double> window_;
  std::unique_ptr<detail::RealFft> fft_;
};

MultichannelSpectrum analyze(const MultichannelSamples& signal, const StftConfig& cfg);
MultichannelSamples synthesize(const MultichannelSpectrum& spec, const StftConfig& cfg,
                               std::size_t length = 0);

// Streaming weighted overlap-add into a fixed-length multichannel buffer.
class OverlapAdd {
 public:
  OverlapAdd(const Stft& stft, std::size_t channels, std::size_t length);

  void add_frame(std::size_t frame, std::size_t channel, std::span<const std::complex<double>> spectrum);
  const MultichannelSamples& output() const { return out_; }
  MultichannelSamples take() { return std::move(out_); }

 private:
  const Stft* stft_;
  MultichannelSamples out_;
  std::vector<double> scratch_;
};

}  // namespace bmvdr
