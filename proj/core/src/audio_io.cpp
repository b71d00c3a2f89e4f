#include "bmvdr/audio_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "bmvdr/error.hpp"
#include "bmvdr/log.hpp"

namespace bmvdr {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

static_assert(std::endian::native == std::endian::little, "WAV I/O assumes a little-endian host");

std::uint32_t read_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
std::uint16_t read_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}
void put_tag(std::vector<std::uint8_t>& out, const char* tag) { out.insert(out.end(), tag, tag + 4); }

std::uint16_t bits_of(SampleFormat f) {
  switch (f) {
    case SampleFormat::kPcm16: return 16;
    case SampleFormat::kPcm24: return 24;
    case SampleFormat::kPcm32:
    case SampleFormat::kFloat32: return 32;
  }
  return 0;
}

}  // namespace

void AudioBuffer::validate() const {
  if (!(sample_rate > 0.0)) throw DomainError("audio buffer: sample rate must be positive");
  const std::size_t n = frames();
  for (const auto& ch : samples) {
    if (ch.size() != n) throw DomainError("audio buffer: channels differ in length");
    for (double v : ch) {
      if (!std::isfinite(v)) throw DomainError("audio buffer: non-finite sample");
    }
  }
}

AudioBuffer permute_channels(const AudioBuffer& buffer, const ChannelPermutation& permutation) {
  if (permutation.empty()) return buffer;
  if (permutation.size() != buffer.channels()) {
    throw DomainError("channel permutation has " + std::to_string(permutation.size()) + " entries for " +
                      std::to_string(buffer.channels()) + " channels");
  }
  AudioBuffer out;
  out.sample_rate = buffer.sample_rate;
  out.samples.resize(buffer.channels());
  for (std::size_t c = 0; c < buffer.channels(); ++c) out.samples[c] = buffer.samples[permutation.source_of(c)];
  return out;
}

AudioBuffer read_wav(const std::filesystem::path& path, std::optional<std::size_t> expected_channels,
                     const ChannelPermutation& permutation) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw DomainError("'" + path.string() + "' is not a RIFF/WAVE file");
  }

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const std::uint8_t* data = nullptr;
  std::size_t data_size = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    const std::uint32_t size = read_u32(chunk + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) {
      // Tolerate a truncated data chunk by reading what is present.
      if (std::memcmp(chunk, "data", 4) != 0) throw DomainError("'" + path.string() + "': truncated chunk");
    }
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) throw DomainError("'" + path.string() + "': short fmt chunk");
      format = read_u16(chunk + 8);
      channels = read_u16(chunk + 10);
      rate = read_u32(chunk + 12);
      bits = read_u16(chunk + 22);
      if (format == kFormatExtensible && size >= 40) format = read_u16(chunk + 32);
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = chunk + 8;
      data_size = std::min<std::size_t>(size, bytes.size() - body);
    }
    pos = body + size + (size & 1u);
  }
  if (channels == 0 || rate == 0) throw DomainError("'" + path.string() + "': missing fmt chunk");
  if (data == nullptr) throw DomainError("'" + path.string() + "': missing data chunk");

  const bool is_float = format == kFormatFloat && bits == 32;
  const bool is_pcm = format == kFormatPcm && (bits == 16 || bits == 24 || bits == 32);
  if (!is_float && !is_pcm) {
    throw DomainError("'" + path.string() + "': unsupported encoding (format " + std::to_string(format) + ", " +
                      std::to_string(bits) + " bits)");
  }
  if (expected_channels && *expected_channels != channels) {
    throw DomainError("'" + path.string() + "' has " + std::to_string(channels) + " channels, expected " +
                      std::to_string(*expected_channels));
  }

  const std::size_t width = bits / 8;
  const std::size_t frames = data_size / (width * channels);
  AudioBuffer buf;
  buf.sample_rate = rate;
  buf.samples.assign(channels, Samples(frames));
  for (std::size_t n = 0; n < frames; ++n) {
    for (std::size_t c = 0; c < channels; ++c) {
      const std::uint8_t* p = data + (n * channels + c) * width;
      double v = 0.0;
      if (is_float) {
        float f;
        std::memcpy(&f, p, 4);
        v = f;
      } else if (bits == 16) {
        v = static_cast<std::int16_t>(read_u16(p)) / 32768.0;
      } else if (bits == 24) {
        std::int32_t s = static_cast<std::int32_t>(p[0] | (p[1] << 8) | (p[2] << 16));
        if (s & 0x800000) s -= 0x1000000;
        v = s / 8388608.0;
      } else {
        v = static_cast<std::int32_t>(read_u32(p)) / 2147483648.0;
      }
      buf.samples[c][n] = v;
    }
  }
  buf.validate();
  return permute_channels(buf, permutation);
}

std::size_t write_wav(const std::filesystem::path& path, const AudioBuffer& buffer, SampleFormat format) {
  buffer.validate();
  const std::uint16_t bits = bits_of(format);
  const std::uint16_t channels = static_cast<std::uint16_t>(buffer.channels());
  const std::size_t frames = buffer.frames();
  const std::uint32_t rate = static_cast<std::uint32_t>(std::lround(buffer.sample_rate));
  const std::uint32_t block = channels * (bits / 8u);
  const std::uint64_t data_size = static_cast<std::uint64_t>(frames) * block;
  if (data_size > 0xFFFFFFFFull - 64) throw DomainError("audio too long for a RIFF file");

  std::vector<std::uint8_t> out;
  out.reserve(44 + data_size);
  put_tag(out, "RIFF");
  put_u32(out, static_cast<std::uint32_t>(36 + data_size));
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, format == SampleFormat::kFloat32 ? kFormatFloat : kFormatPcm);
  put_u16(out, channels);
  put_u32(out, rate);
  put_u32(out, rate * block);
  put_u16(out, static_cast<std::uint16_t>(block));
  put_u16(out, bits);
  put_tag(out, "data");
  put_u32(out, static_cast<std::uint32_t>(data_size));

  std::size_t clipped = 0;
  auto quantize = [&](double v, double full_scale, double max_code) {
    double s = v * full_scale;
    if (v > 1.0 || v < -1.0) ++clipped;
    s = std::clamp(std::round(s), -full_scale, max_code);
    return static_cast<std::int64_t>(s);
  };
  for (std::size_t n = 0; n < frames; ++n) {
    for (std::size_t c = 0; c < channels; ++c) {
      const double v = buffer.samples[c][n];
      switch (format) {
        case SampleFormat::kFloat32: {
          const float f = static_cast<float>(v);
          std::uint32_t u;
          std::memcpy(&u, &f, 4);
          put_u32(out, u);
          break;
        }
        case SampleFormat::kPcm16:
          put_u16(out, static_cast<std::uint16_t>(quantize(v, 32768.0, 32767.0)));
          break;
        case SampleFormat::kPcm24: {
          const auto s = static_cast<std::uint32_t>(quantize(v, 8388608.0, 8388607.0));
          out.push_back(static_cast<std::uint8_t>(s & 0xFF));
          out.push_back(static_cast<std::uint8_t>((s >> 8) & 0xFF));
          out.push_back(static_cast<std::uint8_t>((s >> 16) & 0xFF));
          break;
        }
        case SampleFormat::kPcm32:
          put_u32(out, static_cast<std::uint32_t>(quantize(v, 2147483648.0, 2147483647.0)));
          break;
      }
    }
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot write '" + path.string() + "'");
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) throw Error("I/O error while writing '" + path.string() + "'");
  if (clipped > 0) log::warn() << "write_wav: " << clipped << " samples saturated in '" << path.string() << "'";
  return clipped;
}

}  // namespace bmvdr
