#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>

#include "bmvdr/channel_map.hpp"
#include "bmvdr/stft.hpp"

namespace bmvdr {

struct AudioBuffer {
  double sample_rate = 16000.0;
  MultichannelSamples samples;  // [channel][index]

  std::size_t channels() const { return samples.size(); }
  std::size_t frames() const { return samples.empty() ? 0 : samples.front().size(); }
  // Throws DomainError on ragged channels or non-finite samples.
  void validate() const;
};

enum class SampleFormat { kPcm16, kPcm24, kPcm32, kFloat32 };

// Reads PCM 16/24/32-bit or 32-bit float WAV, normalizing to [-1, 1]. When a
// permutation is given, canonical channel c is taken from file channel
// permutation.source_of(c).
AudioBuffer read_wav(const std::filesystem::path& path, std::optional<std::size_t> expected_channels = std::nullopt,
                     const ChannelPermutation& permutation = {});

// Writes a canonical RIFF/WAVE file. Integer formats saturate samples outside
// [-1, 1]; the number of clipped samples is returned (and logged).
std::size_t write_wav(const std::filesystem::path& path, const AudioBuffer& buffer,
                      SampleFormat format = SampleFormat::kFloat32);

AudioBuffer permute_channels(const AudioBuffer& buffer, const ChannelPermutation& permutation);

}  // namespace bmvdr
