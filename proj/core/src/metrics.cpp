#include "bmvdr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "bmvdr/error.hpp"
#include "bmvdr/log.hpp"

namespace bmvdr {

namespace {

double power(const Samples& s, std::size_t begin, std::size_t end) {
  double acc = 0.0;
  for (std::size_t n = begin; n < end; ++n) acc += s[n] * s[n];
  return acc;
}

void require_length(const BinauralPair& p, std::size_t len, const char* what) {
  if (p.left.size() != len || p.right.size() != len) {
    throw DomainError(std::string("delta BSNR: ") + what + " has mismatched length");
  }
}

}  // namespace

double input_snr(const CovariancePair& pair, std::size_t channel) {
  if (channel >= pair.dim()) throw DomainError("input SNR: channel out of range");
  const double noise = pair.r_n.diag(channel);
  if (!(noise > 0.0)) throw DomainError("input SNR: zero noise power on channel " + std::to_string(channel));
  return pair.r_y.diag(channel) / noise - 1.0;
}

double input_snr_reported(const CovariancePair& pair, std::size_t channel) {
  return std::max(0.0, input_snr(pair, channel));
}

double output_snr(const CVector& w, const HermitianMatrix& r_x, const HermitianMatrix& r_n) {
  const double num = (w.adjoint() * r_x.matrix() * w)(0).real();
  const double den = (w.adjoint() * r_n.matrix() * w)(0).real();
  return num / den;
}

double to_db(double ratio) { return 10.0 * std::log10(ratio); }

DeltaBsnrSeries delta_bsnr(const BinauralPair& speech_out, const BinauralPair& noise_out,
                           const BinauralPair& speech_ref, const BinauralPair& noise_ref, double sample_rate,
                           const SegmentConfig& cfg) {
  const std::size_t len = speech_ref.left.size();
  require_length(speech_out, len, "speech output");
  require_length(noise_out, len, "noise output");
  require_length(speech_ref, len, "speech reference");
  require_length(noise_ref, len, "noise reference");
  if (!(cfg.segment_seconds > 0.0) || !(cfg.overlap >= 0.0 && cfg.overlap < 1.0)) {
    throw DomainError("delta BSNR: invalid segmentation");
  }
  const auto seg = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(cfg.segment_seconds * sample_rate)));
  const auto hop = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(static_cast<double>(seg) * (1.0 - cfg.overlap))));

  DeltaBsnrSeries out;
  if (len < seg) {
    out.overall_db = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  std::vector<double> ref_speech;
  std::vector<double> values;
  std::vector<bool> no_noise;
  for (std::size_t b = 0; b + seg <= len; b += hop) {
    const std::size_t e = b + seg;
    const double xs_out = power(speech_out.left, b, e) + power(speech_out.right, b, e);
    const double ns_out = power(noise_out.left, b, e) + power(noise_out.right, b, e);
    const double xs_ref = power(speech_ref.left, b, e) + power(speech_ref.right, b, e);
    const double ns_ref = power(noise_ref.left, b, e) + power(noise_ref.right, b, e);
    ref_speech.push_back(xs_ref);
    out.segment_time.push_back((static_cast<double>(b) + static_cast<double>(seg) / 2.0) / sample_rate);
    no_noise.push_back(!(ns_out > 0.0) || !(ns_ref > 0.0));
    if (no_noise.back()) {
      values.push_back(std::numeric_limits<double>::quiet_NaN());
      ++out.invalid_noise;
      continue;
    }
    values.push_back(to_db(xs_out / ns_out) - to_db(xs_ref / ns_ref));
  }
  const double peak = *std::max_element(ref_speech.begin(), ref_speech.end());
  const double floor = peak * std::pow(10.0, cfg.silence_db / 10.0);
  out.valid.resize(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    bool ok = !no_noise[i];
    if (ok && !(ref_speech[i] > floor)) {
      ok = false;
      ++out.inactive_speech;
    }
    ok = ok && std::isfinite(values[i]);
    out.valid[i] = ok;
    out.segment_db.push_back(ok ? values[i] : std::numeric_limits<double>::quiet_NaN());
  }
  if (out.invalid_noise > 0) log::info() << "delta BSNR: " << out.invalid_noise << " segments without noise excluded";
  out.overall_db = aggregate_overall(out.segment_db);
  return out;
}

std::vector<double> delta_bsnr_per_bin(const BinauralPair& speech_out, const BinauralPair& noise_out,
                                       const BinauralPair& speech_ref, const BinauralPair& noise_ref,
                                       const StftConfig& stft_cfg) {
  const std::size_t len = speech_ref.left.size();
  require_length(speech_out, len, "speech output");
  require_length(noise_out, len, "noise output");
  require_length(noise_ref, len, "noise reference");
  const Stft stft(stft_cfg);
  auto bin_power = [&](const BinauralPair& p) {
    const MultichannelSpectrum s = stft.analyze({p.left, p.right});
    std::vector<double> acc(s.bins(), 0.0);
    for (std::size_t t = 0; t < s.frames(); ++t) {
      for (std::size_t k = 0; k < s.bins(); ++k) acc[k] += std::norm(s.at(t, k, 0)) + std::norm(s.at(t, k, 1));
    }
    return acc;
  };
  const auto xo = bin_power(speech_out), no = bin_power(noise_out);
  const auto xr = bin_power(speech_ref), nr = bin_power(noise_ref);
  std::vector<double> out(xo.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (!(no[k] > 0.0) || !(nr[k] > 0.0) || !(xr[k] > 0.0) || !(xo[k] > 0.0)) {
      out[k] = std::numeric_limits<double>::quiet_NaN();
    } else {
      out[k] = to_db(xo[k] / no[k]) - to_db(xr[k] / nr[k]);
    }
  }
  return out;
}

double aggregate_overall(const std::vector<double>& per_frame) {
  double sum = 0.0;
  std::size_t n = 0;
  for (double v : per_frame) {
    if (std::isfinite(v)) {
      sum += v;
      ++n;
    }
  }
  return n > 0 ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
}

std::vector<SummaryRow> summarize(const MetricSeries& series) {
  if (series.per_frame_delta_bsnr.empty() && series.per_bin_delta_bsnr.empty()) {
    throw DomainError("summarize: empty metric series");
  }
  std::vector<SummaryRow> rows;
  rows.push_back({SummaryRow::Kind::kOverall, series.method, 0, 0.0, series.overall_delta_bsnr});
  for (std::size_t i = 0; i < series.per_frame_delta_bsnr.size(); ++i) {
    const double v = series.per_frame_delta_bsnr[i];
    if (!std::isfinite(v)) continue;
    const double t = i < series.frame_time.size() ? series.frame_time[i] : 0.0;
    rows.push_back({SummaryRow::Kind::kFrame, series.method, i, t, v});
  }
  for (std::size_t k = 0; k < series.per_bin_delta_bsnr.size(); ++k) {
    const double f = k < series.bin_frequency.size() ? series.bin_frequency[k] : 0.0;
    rows.push_back({SummaryRow::Kind::kBin, series.method, k, f, series.per_bin_delta_bsnr[k]});
  }
  return rows;
}

std::optional<double> reference_delta_bsnr_db(const std::string& method) {
  if (method == "cw") return 10.4;
  if (method == "isnr") return 10.3;
  if (method == "av") return 8.9;
  if (method == "msnr") return 10.7;
  if (method.rfind("sc-", 0) == 0) return 9.0;
  return std::nullopt;
}

}  // namespace bmvdr
