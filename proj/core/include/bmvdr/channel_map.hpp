#pragma once

#include <cstddef>
#include <vector>

namespace bmvdr {

enum class Side { kLeft, kRight };

// Identifies one microphone in the binaural + external topology. Device and
// external microphone numbers are 1-based, as in "E1", "E2", ...
struct Channel {
  enum class Kind { kLeftRef, kRightRef, kLeftMic, kRightMic, kExternal };

  Kind kind;
  std::size_t number = 1;

  static Channel left() { return {Kind::kLeftRef, 1}; }
  static Channel right() { return {Kind::kRightRef, 1}; }
  static Channel left_mic(std::size_t m) { return {Kind::kLeftMic, m}; }
  static Channel right_mic(std::size_t m) { return {Kind::kRightMic, m}; }
  static Channel external(std::size_t i) { return {Kind::kExternal, i}; }
};

// Canonical channel stacking: left device mics, right device mics, external
// mics. The first microphone of each device is its reference.
class ChannelMap {
 public:
  ChannelMap(std::size_t device_mics_per_side, std::size_t num_external);

  // Rejects asymmetric devices.
  static ChannelMap from_sides(std::size_t left_mics, std::size_t right_mics,
                               std::size_t num_external);

  std::size_t device_mics_per_side() const { return device_mics_; }
  std::size_t num_external() const { return num_external_; }
  std::size_t total() const { return 2 * device_mics_ + num_external_; }

  std::size_t ref_left() const { return 0; }
  std::size_t ref_right() const { return device_mics_; }
  std::size_t ref(Side side) const { return side == Side::kLeft ? ref_left() : ref_right(); }

  // 0-based index of external mic i (1-based).
  std::size_t external(std::size_t i) const;
  const std::vector<std::size_t>& external_indices() const { return external_indices_; }

  std::size_t index(const Channel& channel) const;

  bool is_external(std::size_t channel) const { return channel >= 2 * device_mics_ && channel < total(); }

  bool operator==(const ChannelMap& other) const {
    return device_mics_ == other.device_mics_ && num_external_ == other.num_external_;
  }

 private:
  std::size_t device_mics_;
  std::size_t num_external_;
  std::vector<std::size_t> external_indices_;
};

// Free-function form of ChannelMap::index.
std::size_t selection_index(const ChannelMap& map, const Channel& channel);

// Maps file channel order to canonical order: canonical channel c is read from
// file channel source[c]. Must be a permutation of 0..n-1.
class ChannelPermutation {
 public:
  ChannelPermutation() = default;
  explicit ChannelPermutation(std::vector<std::size_t> source);

  static ChannelPermutation identity(std::size_t n);

  std::size_t size() const { return source_.size(); }
  bool empty() const { return source_.empty(); }
  std::size_t source_of(std::size_t canonical) const { return source_.at(canonical); }
  const std::vector<std::size_t>& source() const { return source_; }
  ChannelPermutation inverse() const;

 private:
  std::vector<std::size_t> source_;
};

}  // namespace bmvdr
