#include "app.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "bmvdr/audio_io.hpp"
#include "bmvdr/error.hpp"
#include "bmvdr/log.hpp"
#include "bmvdr/speech_source.hpp"

namespace bmvdr::app {

namespace {

static_assert(std::endian::native == std::endian::little, "sidecar I/O assumes a little-endian host");

constexpr char kRtfMagic[8] = {'B', 'M', 'V', 'D', 'R', 'R', 'T', 'F'};

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream s;
  s << std::setprecision(12) << v;
  return s.str();
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

void write_stem(const fs::path& path, const MultichannelSamples& x, double fs, const ChannelPermutation& perm) {
  AudioBuffer buf{fs, x};
  if (!perm.empty()) buf = permute_channels(buf, perm.inverse());
  write_wav(path, buf, SampleFormat::kFloat32);
}

void write_binaural(const fs::path& path, const MultichannelSamples& x, double fs) {
  write_wav(path, AudioBuffer{fs, x}, SampleFormat::kFloat32);
}

std::optional<MultichannelSamples> read_stem(const fs::path& path, const RunConfig& cfg) {
  if (!fs::exists(path)) return std::nullopt;
  AudioBuffer buf = read_wav(path, cfg.channel_map().total(), cfg.permutation());
  if (buf.sample_rate != cfg.sample_rate) {
    throw DomainError(path.string() + ": sample rate " + num(buf.sample_rate) + " does not match configured " +
                      num(cfg.sample_rate));
  }
  return std::move(buf.samples);
}

MultichannelSamples read_binaural(const fs::path& path) {
  if (!fs::exists(path)) throw DomainError("missing processed output " + path.string());
  return read_wav(path, 2).samples;
}

double energy(const Samples& x) {
  double e = 0.0;
  for (double v : x) e += v * v;
  return e;
}

bool needs_truth(const RunConfig& cfg) {
  for (const Method& m : cfg.method_list()) {
    if (m.kind == Method::Kind::kTrueRtf) return true;
  }
  return false;
}

}  // namespace

void write_rtf_sidecar(const fs::path& path, const MultichannelSpectrum& rtf) {
  auto out = open_out(path);
  out.write(kRtfMagic, sizeof kRtfMagic);
  const std::uint64_t dims[3] = {rtf.frames(), rtf.bins(), rtf.channels()};
  out.write(reinterpret_cast<const char*>(dims), sizeof dims);
  out.write(reinterpret_cast<const char*>(rtf.data().data()),
            static_cast<std::streamsize>(rtf.data().size() * sizeof(std::complex<double>)));
  if (!out) throw Error("failed writing " + path.string());
}

MultichannelSpectrum read_rtf_sidecar(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot open RTF sidecar " + path.string());
  char magic[8];
  std::uint64_t dims[3];
  in.read(magic, sizeof magic);
  in.read(reinterpret_cast<char*>(dims), sizeof dims);
  if (!in || !std::equal(magic, magic + 8, kRtfMagic)) throw DomainError(path.string() + ": not an RTF sidecar");
  if (dims[0] * dims[1] * dims[2] > (std::uint64_t{1} << 32)) throw DomainError(path.string() + ": implausible size");
  MultichannelSpectrum rtf(dims[0], dims[1], dims[2]);
  in.read(reinterpret_cast<char*>(rtf.data().data()),
          static_cast<std::streamsize>(rtf.data().size() * sizeof(std::complex<double>)));
  if (!in) throw DomainError(path.string() + ": truncated");
  return rtf;
}

void write_rtf_csv(const fs::path& path, const MultichannelSpectrum& rtf) {
  auto out = open_out(path);
  out << "frame,bin,channel,re,im\n";
  for (std::size_t t = 0; t < rtf.frames(); ++t) {
    for (std::size_t k = 0; k < rtf.bins(); ++k) {
      for (std::size_t c = 0; c < rtf.channels(); ++c) {
        const auto v = rtf.at(t, k, c);
        out << t << ',' << k << ',' << c << ',' << num(v.real()) << ',' << num(v.imag()) << '\n';
      }
    }
  }
}

void write_vad_csv(const fs::path& path, const std::vector<bool>& mask, double hop_seconds) {
  auto out = open_out(path);
  out << "frame,time_s,speech\n";
  for (std::size_t t = 0; t < mask.size(); ++t) {
    out << t << ',' << num(static_cast<double>(t) * hop_seconds) << ',' << (mask[t] ? 1 : 0) << '\n';
  }
}

std::vector<bool> read_vad_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open VAD mask " + path.string());
  std::string line;
  std::getline(in, line);
  std::vector<bool> mask;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto pos = line.rfind(',');
    if (pos == std::string::npos) throw DomainError(path.string() + ": malformed row '" + line + "'");
    const std::string bit = line.substr(pos + 1);
    if (bit != "0" && bit != "1") throw DomainError(path.string() + ": malformed row '" + line + "'");
    mask.push_back(bit == "1");
  }
  return mask;
}

void write_config_echo(const fs::path& dir, const RunConfig& cfg) {
  auto out = open_out(dir / "resolved_config.json");
  out << cfg.to_json();
}

GroundTruth simulate(const RunConfig& cfg) {
  const SceneSpec spec = cfg.scene_spec();
  Samples dry;
  if (!cfg.scene.dry_speech.empty()) {
    AudioBuffer buf = read_wav(cfg.scene.dry_speech, 1);
    if (buf.sample_rate != spec.sample_rate) throw DomainError("scene.dry_speech: sample rate mismatch");
    dry = std::move(buf.samples.front());
  } else {
    dry = synthetic_speech(spec.sample_rate, spec.duration, cfg.seed, cfg.scene.leading_silence_s);
  }
  GroundTruth gt = render_scene(spec, dry);

  const fs::path dir = cfg.out_dir;
  fs::create_directories(dir);
  const auto perm = cfg.permutation();
  write_stem(dir / "mix.wav", gt.mixture(), spec.sample_rate, perm);
  write_stem(dir / "speech.wav", gt.speech, spec.sample_rate, perm);
  write_stem(dir / "noise.wav", gt.noise, spec.sample_rate, perm);
  write_rtf_sidecar(dir / "rtf_truth.bin", gt.rtf_left);
  if (cfg.rtf_csv) write_rtf_csv(dir / "rtf_truth.csv", gt.rtf_left);
  write_vad_csv(dir / "vad.csv", gt.vad_mask, spec.stft().hop_seconds());
  {
    nlohmann::json info = {{"input_snr_db", gt.input_snr_db},
                           {"samples", spec.num_samples()},
                           {"frames", gt.vad_mask.size()},
                           {"speech_frames", std::count(gt.vad_mask.begin(), gt.vad_mask.end(), true)}};
    auto out = open_out(dir / "scene_info.json");
    out << info.dump(2) << "\n";
  }
  write_config_echo(dir, cfg);
  log::info() << "simulated " << spec.duration << " s scene, input SNR " << gt.input_snr_db << " dB";
  return gt;
}

PipelineResult process(const RunConfig& cfg) {
  const PipelineConfig pcfg = cfg.pipeline();
  PipelineInput input;
  const fs::path out_dir = cfg.out_dir;
  if (cfg.input_dir.empty()) {
    GroundTruth gt = simulate(cfg);
    input.speech = std::move(gt.speech);
    input.noise = std::move(gt.noise);
    input.vad_mask = std::move(gt.vad_mask);
    if (needs_truth(cfg)) input.true_rtf_left = std::move(gt.rtf_left);
  } else {
    const fs::path in = cfg.input_dir;
    input.speech = read_stem(in / "speech.wav", cfg);
    input.noise = read_stem(in / "noise.wav", cfg);
    if (input.speech.has_value() != input.noise.has_value()) {
      log::warn() << "only one of speech.wav/noise.wav present; shadow outputs disabled";
      input.speech.reset();
      input.noise.reset();
    }
    if (auto mix = read_stem(in / "mix.wav", cfg)) {
      input.mixture = std::move(*mix);
    } else if (!input.speech) {
      throw DomainError("input_dir " + in.string() + " has neither mix.wav nor speech.wav + noise.wav");
    }
    if (fs::exists(in / "vad.csv")) input.vad_mask = read_vad_csv(in / "vad.csv");
    if (needs_truth(cfg)) input.true_rtf_left = read_rtf_sidecar(in / "rtf_truth.bin");
  }
  // With stems the mixture is rebuilt from them so shadow outputs add up exactly.
  if (input.speech) input.mixture.clear();

  PipelineResult result = run_pipeline(pcfg, input);

  fs::create_directories(out_dir);
  const double fs_hz = cfg.sample_rate;
  for (const MethodOutput& m : result.outputs) {
    const std::string name = m.method.name();
    write_binaural(out_dir / ("out_" + name + ".wav"), m.output, fs_hz);
    if (m.speech_output) {
      write_binaural(out_dir / ("out_" + name + "_speech.wav"), *m.speech_output, fs_hz);
      write_binaural(out_dir / ("out_" + name + "_noise.wav"), *m.noise_output, fs_hz);
    }
  }
  {
    auto out = open_out(out_dir / "diagnostics.csv");
    out << "method,filter_updates,warmup_bins,unusable_bins,passthrough_bins,loading_events,ready_bins_at_end\n";
    for (const MethodOutput& m : result.outputs) {
      const auto& d = m.diagnostics;
      out << m.method.name() << ',' << d.filter_updates << ',' << d.warmup_bins << ',' << d.unusable_bins << ','
          << d.passthrough_bins << ',' << d.loading_events << ',' << result.ready_bins_at_end << '\n';
    }
  }
  if (cfg.covariance_trace) {
    auto out = open_out(out_dir / "covariance_trace.csv");
    out << "frame,bin,trace_r_y,trace_r_n,speech\n";
    for (const auto& r : result.covariance_trace) {
      out << r.frame << ',' << r.bin << ',' << num(r.trace_r_y) << ',' << num(r.trace_r_n) << ',' << (r.speech ? 1 : 0)
          << '\n';
    }
  }
  write_config_echo(out_dir, cfg);
  return result;
}

MetricSeries evaluate_method(const std::string& method, const MultichannelSamples& speech,
                             const MultichannelSamples& noise, const MultichannelSamples& speech_out,
                             const MultichannelSamples& noise_out, const ChannelMap& map, const StftConfig& stft,
                             const SegmentConfig& seg) {
  if (speech_out.size() != 2 || noise_out.size() != 2) throw DomainError(method + ": outputs must be binaural");
  const BinauralPair x_ref{speech[map.ref_left()], speech[map.ref_right()]};
  const BinauralPair n_ref{noise[map.ref_left()], noise[map.ref_right()]};
  const BinauralPair x_out{speech_out[0], speech_out[1]};
  const BinauralPair n_out{noise_out[0], noise_out[1]};

  MetricSeries s;
  s.method = method;
  const DeltaBsnrSeries d = delta_bsnr(x_out, n_out, x_ref, n_ref, stft.sample_rate, seg);
  s.per_frame_delta_bsnr = d.segment_db;
  s.frame_time = d.segment_time;
  s.overall_delta_bsnr = d.overall_db;
  s.per_bin_delta_bsnr = delta_bsnr_per_bin(x_out, n_out, x_ref, n_ref, stft);
  for (std::size_t k = 0; k < s.per_bin_delta_bsnr.size(); ++k) s.bin_frequency.push_back(stft.bin_frequency(k));
  for (std::size_t c = 0; c < speech.size(); ++c) s.input_snr_per_channel.push_back(to_db(energy(speech[c]) / energy(noise[c])));
  return s;
}

std::vector<MetricSeries> evaluate(const RunConfig& cfg) {
  const fs::path out_dir = cfg.out_dir;
  const fs::path stem_dir = cfg.input_dir.empty() ? out_dir : fs::path(cfg.input_dir);
  auto speech = read_stem(stem_dir / "speech.wav", cfg);
  auto noise = read_stem(stem_dir / "noise.wav", cfg);
  if (!speech || !noise) {
    throw DomainError("evaluation requires separate speech.wav and noise.wav stems in " + stem_dir.string());
  }
  const ChannelMap map = cfg.channel_map();
  const StftConfig stft = cfg.stft();

  std::vector<MetricSeries> all;
  for (const Method& m : cfg.method_list()) {
    const std::string name = m.name();
    const auto xo = read_binaural(out_dir / ("out_" + name + "_speech.wav"));
    const auto no = read_binaural(out_dir / ("out_" + name + "_noise.wav"));
    all.push_back(evaluate_method(name, *speech, *noise, xo, no, map, stft, cfg.metrics));
  }

  {
    auto out = open_out(out_dir / "summary.csv");
    out << "method,overall_delta_bsnr_db,valid_segments,total_segments,reference_delta_bsnr_db\n";
    for (const MetricSeries& s : all) {
      const auto valid = std::count_if(s.per_frame_delta_bsnr.begin(), s.per_frame_delta_bsnr.end(),
                                       [](double v) { return std::isfinite(v); });
      const auto ref = reference_delta_bsnr_db(s.method);
      out << s.method << ',' << num(s.overall_delta_bsnr) << ',' << valid << ',' << s.per_frame_delta_bsnr.size() << ','
          << (ref ? num(*ref) : "") << '\n';
    }
  }
  {
    auto ts = open_out(out_dir / "timeseries.csv");
    auto pb = open_out(out_dir / "perbin.csv");
    ts << "method,segment,time_s,delta_bsnr_db\n";
    pb << "method,bin,frequency_hz,delta_bsnr_db\n";
    for (const MetricSeries& s : all) {
      for (const SummaryRow& r : summarize(s)) {
        if (r.kind == SummaryRow::Kind::kFrame) {
          ts << r.method << ',' << r.index << ',' << num(r.coordinate) << ',' << num(r.delta_bsnr_db) << '\n';
        } else if (r.kind == SummaryRow::Kind::kBin) {
          pb << r.method << ',' << r.index << ',' << num(r.coordinate) << ',' << num(r.delta_bsnr_db) << '\n';
        }
      }
    }
  }
  write_config_echo(out_dir, cfg);
  return all;
}

std::vector<OrderingCheck> ordering_checks(const std::vector<MetricSeries>& series) {
  auto find = [&](const std::string& name) -> const MetricSeries* {
    for (const auto& s : series) {
      if (s.method == name) return &s;
    }
    return nullptr;
  };
  std::vector<OrderingCheck> checks;
  const MetricSeries* msnr = find("msnr");
  if (!msnr) return checks;
  for (const char* other : {"isnr", "av"}) {
    if (const MetricSeries* o = find(other)) {
      checks.push_back({std::string("msnr >= ") + other, msnr->overall_delta_bsnr >= o->overall_delta_bsnr});
    }
  }
  return checks;
}

}  // namespace bmvdr::app
