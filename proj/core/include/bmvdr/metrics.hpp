#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "bmvdr/covariance.hpp"
#include "bmvdr/linalg.hpp"
#include "bmvdr/stft.hpp"

namespace bmvdr {

// Narrowband input SNR of one channel, r_y[m][m] / r_n[m][m] - 1 (may be
// negative with estimated matrices).
double input_snr(const CovariancePair& pair, std::size_t channel);
// Reporting form, clamped below at 0.
double input_snr_reported(const CovariancePair& pair, std::size_t channel);

// w^H R_x w / w^H R_n w
double output_snr(const CVector& w, const HermitianMatrix& r_x, const HermitianMatrix& r_n);

double to_db(double ratio);

struct BinauralPair {
  Samples left;
  Samples right;
};

struct SegmentConfig {
  double segment_seconds = 0.25;
  double overlap = 0.5;
  // Segments whose reference speech power is below the peak segment by more
  // than this many dB are excluded.
  double silence_db = -60.0;
};

struct DeltaBsnrSeries {
  std::vector<double> segment_db;     // one entry per segment (NaN when invalid)
  std::vector<double> segment_time;   // segment centre, seconds
  std::vector<bool> valid;
  std::size_t invalid_noise = 0;      // segments with zero noise power
  std::size_t inactive_speech = 0;    // segments below the speech activity floor
  double overall_db = 0.0;            // mean of valid segments
};

// Time-domain binaural SNR improvement per segment:
//   10 log10((Px_L^out + Px_R^out) / (Pn_L^out + Pn_R^out))
// - 10 log10((Px_L^ref + Px_R^ref) / (Pn_L^ref + Pn_R^ref)).
DeltaBsnrSeries delta_bsnr(const BinauralPair& speech_out, const BinauralPair& noise_out,
                           const BinauralPair& speech_ref, const BinauralPair& noise_ref, double sample_rate,
                           const SegmentConfig& cfg = {});

// Same ratio per STFT bin, powers summed over all frames.
std::vector<double> delta_bsnr_per_bin(const BinauralPair& speech_out, const BinauralPair& noise_out,
                                       const BinauralPair& speech_ref, const BinauralPair& noise_ref,
                                       const StftConfig& stft);

struct MetricSeries {
  std::string method;
  std::vector<double> per_frame_delta_bsnr;  // per time segment, NaN when invalid
  std::vector<double> frame_time;
  std::vector<double> per_bin_delta_bsnr;
  std::vector<double> bin_frequency;
  double overall_delta_bsnr = 0.0;
  std::vector<double> input_snr_per_channel;  // broadband, dB
};

struct SummaryRow {
  enum class Kind { kOverall, kFrame, kBin };
  Kind kind = Kind::kOverall;
  std::string method;
  std::size_t index = 0;
  double coordinate = 0.0;  // seconds or Hz
  double delta_bsnr_db = 0.0;
};

// Overall row, then one row per valid segment, then one row per bin.
std::vector<SummaryRow> summarize(const MetricSeries& series);

// Mean of the valid (finite) segment values.
double aggregate_overall(const std::vector<double>& per_frame);

// Average improvement reported for the recorded KEMAR scene, by method name
// (cw, isnr, av, msnr, sc-1..sc-3). Comparison metadata only.
std::optional<double> reference_delta_bsnr_db(const std::string& method);

}  // namespace bmvdr
