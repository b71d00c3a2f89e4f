#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "bmvdr/config.hpp"
#include "bmvdr/metrics.hpp"
#include "bmvdr/pipeline.hpp"
#include "bmvdr/scene.hpp"

namespace bmvdr::app {

namespace fs = std::filesystem;

// Ground-truth RTF sidecar: "BMVDRRTF" magic, u64 frames, bins, channels,
// then (re, im) doubles in [frame][bin][channel] order, little-endian.
void write_rtf_sidecar(const fs::path& path, const MultichannelSpectrum& rtf);
MultichannelSpectrum read_rtf_sidecar(const fs::path& path);
void write_rtf_csv(const fs::path& path, const MultichannelSpectrum& rtf);

// frame,time_s,speech
void write_vad_csv(const fs::path& path, const std::vector<bool>& mask, double hop_seconds);
std::vector<bool> read_vad_csv(const fs::path& path);

void write_config_echo(const fs::path& dir, const RunConfig& cfg);

// Renders the configured scene and writes mix/speech/noise stems, the RTF
// sidecar and the VAD mask into cfg.out_dir.
GroundTruth simulate(const RunConfig& cfg);

// Reads stems from cfg.input_dir (or simulates into cfg.out_dir when no
// input_dir is set), runs every configured method in one pass and writes
// out_<method>.wav plus shadow outputs and diagnostics.csv.
PipelineResult process(const RunConfig& cfg);

// Metrics for one method's shadow outputs against the reference stems.
MetricSeries evaluate_method(const std::string& method, const MultichannelSamples& speech,
                             const MultichannelSamples& noise, const MultichannelSamples& speech_out,
                             const MultichannelSamples& noise_out, const ChannelMap& map, const StftConfig& stft,
                             const SegmentConfig& seg);

struct OrderingCheck {
  std::string label;
  bool pass = false;
};

// Reads stems and shadow outputs, writes summary.csv, timeseries.csv and
// perbin.csv into cfg.out_dir.
std::vector<MetricSeries> evaluate(const RunConfig& cfg);

std::vector<OrderingCheck> ordering_checks(const std::vector<MetricSeries>& series);

}  // namespace bmvdr::app
