#include "bmvdr/channel_map.hpp"

#include <string>

#include "bmvdr/error.hpp"

namespace bmvdr {

ChannelMap::ChannelMap(std::size_t device_mics_per_side, std::size_t num_external)
    : device_mics_(device_mics_per_side), num_external_(num_external) {
  if (device_mics_ == 0) throw DomainError("each device needs at least one microphone");
  external_indices_.reserve(num_external_);
  for (std::size_t i = 0; i < num_external_; ++i) external_indices_.push_back(2 * device_mics_ + i);
}

ChannelMap ChannelMap::from_sides(std::size_t left_mics, std::size_t right_mics,
                                  std::size_t num_external) {
  if (left_mics != right_mics) {
    throw DomainError("asymmetric devices are not supported (left " + std::to_string(left_mics) +
                      " mics, right " + std::to_string(right_mics) + " mics)");
  }
  return ChannelMap(left_mics, num_external);
}

std::size_t ChannelMap::external(std::size_t i) const {
  if (i == 0 || i > num_external_) {
    throw DomainError("external microphone index " + std::to_string(i) + " out of range [1, " +
                      std::to_string(num_external_) + "]");
  }
  return 2 * device_mics_ + (i - 1);
}

std::size_t ChannelMap::index(const Channel& channel) const {
  auto device_mic = [&](std::size_t m, std::size_t offset, const char* side) {
    if (m == 0 || m > device_mics_) {
      throw DomainError(std::string(side) + " device microphone index " + std::to_string(m) +
                        " out of range [1, " + std::to_string(device_mics_) + "]");
    }
    return offset + (m - 1);
  };
  switch (channel.kind) {
    case Channel::Kind::kLeftRef: return ref_left();
    case Channel::Kind::kRightRef: return ref_right();
    case Channel::Kind::kLeftMic: return device_mic(channel.number, 0, "left");
    case Channel::Kind::kRightMic: return device_mic(channel.number, device_mics_, "right");
    case Channel::Kind::kExternal: return external(channel.number);
  }
  throw DomainError("unknown channel kind");
}

std::size_t selection_index(const ChannelMap& map, const Channel& channel) { return map.index(channel); }

ChannelPermutation::ChannelPermutation(std::vector<std::size_t> source) : source_(std::move(source)) {
  std::vector<bool> seen(source_.size(), false);
  for (std::size_t s : source_) {
    if (s >= source_.size() || seen[s]) {
      throw DomainError("channel permutation is not a bijection (entry " + std::to_string(s) + ")");
    }
    seen[s] = true;
  }
}

ChannelPermutation ChannelPermutation::identity(std::size_t n) {
  std::vector<std::size_t> source(n);
  for (std::size_t i = 0; i < n; ++i) source[i] = i;
  return ChannelPermutation(std::move(source));
}

ChannelPermutation ChannelPermutation::inverse() const {
  std::vector<std::size_t> inv(source_.size());
  for (std::size_t c = 0; c < source_.size(); ++c) inv[source_[c]] = c;
  return ChannelPermutation(std::move(inv));
}

}  // namespace bmvdr
