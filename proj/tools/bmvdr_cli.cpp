#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "app.hpp"
#include "bmvdr/config.hpp"
#include "bmvdr/error.hpp"
#include "bmvdr/log.hpp"

namespace {

struct Overrides {
  std::string config;
  std::vector<std::string> methods;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string input_dir;
  bool oracle_vad = false;
  std::string preset;
  std::optional<double> duration;
  std::optional<double> snr_db;
  bool verbose = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON run configuration");
  cmd->add_option("--method", o.methods, "method(s): cw, sc-<i>, isnr, av, msnr, passthrough, oracle-rtf")
      ->delimiter(',');
  cmd->add_option("--seed", o.seed, "random seed");
  cmd->add_option("--out-dir", o.out_dir, "output directory");
  cmd->add_option("--input-dir", o.input_dir, "directory with mix/speech/noise stems");
  cmd->add_flag("--oracle-vad", o.oracle_vad, "use the ground-truth speech mask");
  cmd->add_option("--preset", o.preset, "scene preset")->check(CLI::IsMember({"fig2-moving", "fig2-static"}));
  cmd->add_option("--duration", o.duration, "scene duration in seconds");
  cmd->add_option("--snr", o.snr_db, "target input SNR at the left reference, dB");
  cmd->add_flag("-v,--verbose", o.verbose, "log progress to stderr");
}

bmvdr::RunConfig resolve(const Overrides& o) {
  bmvdr::RunConfig cfg = o.config.empty() ? bmvdr::RunConfig{} : bmvdr::RunConfig::load(o.config);
  if (!o.methods.empty()) cfg.methods = o.methods;
  if (o.seed) cfg.seed = *o.seed;
  if (!o.out_dir.empty()) cfg.out_dir = o.out_dir;
  if (!o.input_dir.empty()) cfg.input_dir = o.input_dir;
  if (o.oracle_vad) cfg.detector = bmvdr::Detector::kOracleVad;
  if (!o.preset.empty()) cfg.scene.preset = o.preset;
  if (o.duration) cfg.scene.duration = *o.duration;
  if (o.snr_db) cfg.scene.target_input_snr_db = *o.snr_db;
  cfg.validate();
  return cfg;
}

int fail(const char* kind, const std::string& message) {
  std::cerr << nlohmann::json{{"error", kind}, {"message", message}}.dump() << std::endl;
  return kind == std::string("config") || kind == std::string("usage") ? 2 : 1;
}

void print_summary(const std::vector<bmvdr::MetricSeries>& series) {
  for (const auto& s : series) std::printf("%-12s %8.3f dB\n", s.method.c_str(), s.overall_delta_bsnr);
  for (const auto& c : bmvdr::app::ordering_checks(series)) {
    std::printf("%s %s\n", c.pass ? "PASS" : "FAIL", c.label.c_str());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Binaural MVDR beamforming with external microphones"};
  cli.require_subcommand(1);
  Overrides o;
  auto* simulate = cli.add_subcommand("simulate", "render a scene to WAV stems and ground truth");
  auto* process = cli.add_subcommand("process", "beamform stems with the selected methods");
  auto* evaluate = cli.add_subcommand("evaluate", "compute binaural SNR improvement of processed outputs");
  auto* compare = cli.add_subcommand("compare", "process then evaluate");
  for (auto* c : {simulate, process, evaluate, compare}) add_common(c, o);

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return cli.exit(e);
    return fail("usage", e.what());
  }
  bmvdr::log::set_level(o.verbose ? bmvdr::log::Level::kInfo : bmvdr::log::Level::kWarning);

  bmvdr::RunConfig cfg;
  try {
    cfg = resolve(o);
  } catch (const bmvdr::Error& e) {
    return fail("config", e.what());
  }

  try {
    if (simulate->parsed()) {
      const auto gt = bmvdr::app::simulate(cfg);
      std::printf("input SNR %.3f dB\n", gt.input_snr_db);
    } else if (process->parsed()) {
      bmvdr::app::process(cfg);
    } else if (evaluate->parsed()) {
      print_summary(bmvdr::app::evaluate(cfg));
    } else if (compare->parsed()) {
      bmvdr::app::process(cfg);
      print_summary(bmvdr::app::evaluate(cfg));
    }
  } catch (const bmvdr::Error& e) {
    return fail("runtime", e.what());
  } catch (const std::exception& e) {
    return fail("io", e.what());
  }
  return 0;
}
