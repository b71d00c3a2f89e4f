#pragma once

#include <cstddef>
#include <vector>

#include "bmvdr/channel_map.hpp"
#include "bmvdr/covariance.hpp"
#include "bmvdr/linalg.hpp"
#include "bmvdr/rtf.hpp"
#include "bmvdr/stft.hpp"

namespace bmvdr {

// Left/right filter vectors of one frequency bin; outputs are w^H y.
struct BeamformerFilters {
  CVector w_left;
  CVector w_right;
  std::size_t bin = 0;
  bool loading_applied = false;

  // w_L = e_refL, w_R = e_refR.
  static BeamformerFilters passthrough(const ChannelMap& map, std::size_t bin = 0);
};

// R_n^{-1} a / (a^H R_n^{-1} a)
CVector mvdr_weights(const CholeskyFactor& noise, const CVector& a);

// Binaural MVDR. r_n is diagonally loaded when it fails the PD check.
BeamformerFilters bmvdr(const CovariancePair& pair, const RtfVector& a_left, const RtfVector& a_right);
BeamformerFilters bmvdr(const HermitianMatrix& r_n, const RtfVector& a_left, const RtfVector& a_right);
BeamformerFilters bmvdr(const LoadedFactor& noise, const RtfVector& a_left, const RtfVector& a_right);

// Per-(frame, bin) binaural filters.
class FilterTrack {
 public:
  FilterTrack(std::size_t frames, std::size_t bins, std::size_t channels);
  static FilterTrack constant(std::size_t frames, std::size_t bins, const BeamformerFilters& filters);

  std::size_t frames() const { return frames_; }
  std::size_t bins() const { return bins_; }
  std::size_t channels() const { return channels_; }

  void set(std::size_t frame, std::size_t bin, const BeamformerFilters& filters);
  Eigen::Map<const CVector> left(std::size_t frame, std::size_t bin) const;
  Eigen::Map<const CVector> right(std::size_t frame, std::size_t bin) const;

 private:
  std::size_t offset(std::size_t frame, std::size_t bin) const { return (frame * bins_ + bin) * 2 * channels_; }
  std::size_t frames_;
  std::size_t bins_;
  std::size_t channels_;
  std::vector<Complex> w_;
};

// z_s(t, k) = w_s(t, k)^H y(t, k); channel 0 is left, 1 is right.
MultichannelSpectrum apply(const FilterTrack& filters, const MultichannelSpectrum& spectrum);

struct ShadowOutput {
  MultichannelSamples speech;  // 2 channels
  MultichannelSamples noise;   // 2 channels
};

// Applies mixture-derived filters separately to speech and noise spectra and
// resynthesizes both to `length` samples.
ShadowOutput shadow_apply(const FilterTrack& filters, const MultichannelSpectrum& speech,
                          const MultichannelSpectrum& noise, const StftConfig& cfg, std::size_t length = 0);

}  // namespace bmvdr
