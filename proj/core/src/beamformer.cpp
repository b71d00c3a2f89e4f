#include "bmvdr/beamformer.hpp"

#include <string>

#include "bmvdr/error.hpp"

namespace bmvdr {

BeamformerFilters BeamformerFilters::passthrough(const ChannelMap& map, std::size_t bin) {
  BeamformerFilters f;
  const auto m = static_cast<Eigen::Index>(map.total());
  f.w_left = CVector::Zero(m);
  f.w_right = CVector::Zero(m);
  f.w_left(static_cast<Eigen::Index>(map.ref_left())) = 1.0;
  f.w_right(static_cast<Eigen::Index>(map.ref_right())) = 1.0;
  f.bin = bin;
  return f;
}

CVector mvdr_weights(const CholeskyFactor& noise, const CVector& a) {
  if (static_cast<std::size_t>(a.size()) != noise.dim()) throw DomainError("MVDR: steering vector dimension mismatch");
  const CVector rinv_a = noise.solve(a);
  const Complex denom = a.dot(rinv_a);  // a^H R_n^{-1} a
  return rinv_a / denom.real();
}

BeamformerFilters bmvdr(const LoadedFactor& noise, const RtfVector& a_left, const RtfVector& a_right) {
  BeamformerFilters f;
  f.w_left = mvdr_weights(noise.factor, a_left.values());
  f.w_right = mvdr_weights(noise.factor, a_right.values());
  f.loading_applied = noise.loading_applied;
  if (!f.w_left.allFinite() || !f.w_right.allFinite()) throw DomainError("BMVDR produced non-finite filters");
  return f;
}

BeamformerFilters bmvdr(const HermitianMatrix& r_n, const RtfVector& a_left, const RtfVector& a_right) {
  return bmvdr(cholesky_with_loading(r_n), a_left, a_right);
}

BeamformerFilters bmvdr(const CovariancePair& pair, const RtfVector& a_left, const RtfVector& a_right) {
  return bmvdr(pair.r_n, a_left, a_right);
}

FilterTrack::FilterTrack(std::size_t frames, std::size_t bins, std::size_t channels)
    : frames_(frames), bins_(bins), channels_(channels), w_(frames * bins * 2 * channels) {}

FilterTrack FilterTrack::constant(std::size_t frames, std::size_t bins, const BeamformerFilters& filters) {
  FilterTrack track(frames, bins, static_cast<std::size_t>(filters.w_left.size()));
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t k = 0; k < bins; ++k) track.set(t, k, filters);
  }
  return track;
}

void FilterTrack::set(std::size_t frame, std::size_t bin, const BeamformerFilters& filters) {
  if (frame >= frames_ || bin >= bins_) throw DomainError("filter track index out of range");
  if (static_cast<std::size_t>(filters.w_left.size()) != channels_ ||
      static_cast<std::size_t>(filters.w_right.size()) != channels_) {
    throw DomainError("filter dimension does not match the track");
  }
  Complex* dst = w_.data() + offset(frame, bin);
  for (std::size_t m = 0; m < channels_; ++m) {
    dst[m] = filters.w_left(static_cast<Eigen::Index>(m));
    dst[channels_ + m] = filters.w_right(static_cast<Eigen::Index>(m));
  }
}

Eigen::Map<const CVector> FilterTrack::left(std::size_t frame, std::size_t bin) const {
  return {w_.data() + offset(frame, bin), static_cast<Eigen::Index>(channels_)};
}

Eigen::Map<const CVector> FilterTrack::right(std::size_t frame, std::size_t bin) const {
  return {w_.data() + offset(frame, bin) + channels_, static_cast<Eigen::Index>(channels_)};
}

MultichannelSpectrum apply(const FilterTrack& filters, const MultichannelSpectrum& spectrum) {
  if (filters.frames() != spectrum.frames() || filters.bins() != spectrum.bins() ||
      filters.channels() != spectrum.channels()) {
    throw DomainError("apply: filter grid (" + std::to_string(filters.frames()) + "x" + std::to_string(filters.bins()) +
                      "x" + std::to_string(filters.channels()) + ") does not match spectrum (" +
                      std::to_string(spectrum.frames()) + "x" + std::to_string(spectrum.bins()) + "x" +
                      std::to_string(spectrum.channels()) + ")");
  }
  MultichannelSpectrum out(spectrum.frames(), spectrum.bins(), 2);
  for (std::size_t t = 0; t < spectrum.frames(); ++t) {
    for (std::size_t k = 0; k < spectrum.bins(); ++k) {
      const auto y = spectrum.bin_vector(t, k);
      out.at(t, k, 0) = filters.left(t, k).dot(y);
      out.at(t, k, 1) = filters.right(t, k).dot(y);
    }
  }
  return out;
}

ShadowOutput shadow_apply(const FilterTrack& filters, const MultichannelSpectrum& speech,
                          const MultichannelSpectrum& noise, const StftConfig& cfg, std::size_t length) {
  if (!speech.same_grid(noise)) throw DomainError("shadow filtering: speech and noise grids differ");
  const Stft stft(cfg);
  return {stft.synthesize(apply(filters, speech), length), stft.synthesize(apply(filters, noise), length)};
}

}  // namespace bmvdr
