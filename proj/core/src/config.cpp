#include "bmvdr/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace bmvdr {

using nlohmann::json;

std::string detector_name(Detector d) { return d == Detector::kOracleVad ? "oracle-vad" : "aposteriori-snr"; }

std::string noise_model_name(NoiseModel m) {
  return m == NoiseModel::kDiffuseHead ? "diffuse-head" : "fully-uncorrelated";
}

namespace {

Detector parse_detector(const std::string& s) {
  if (s == "oracle-vad") return Detector::kOracleVad;
  if (s == "aposteriori-snr") return Detector::kAposterioriSnr;
  throw ConfigError("tracker.detector: expected oracle-vad or aposteriori-snr, got '" + s + "'");
}

NoiseModel parse_noise_model(const std::string& s) {
  if (s == "diffuse-head") return NoiseModel::kDiffuseHead;
  if (s == "fully-uncorrelated") return NoiseModel::kFullyUncorrelated;
  throw ConfigError("scene.noise_model: expected diffuse-head or fully-uncorrelated, got '" + s + "'");
}

// Walks one JSON object, consuming known keys and rejecting the rest.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where("") + ": expected an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where(key) + ": wrong type");
    }
  }

  std::optional<Section> child(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return std::nullopt;
    return Section(*it, where(key));
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError(where(key) + ": unknown key");
    }
  }

 private:
  std::string where(const std::string& key) const {
    if (key.empty()) return path_.empty() ? "config" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace

RunConfig RunConfig::parse(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    std::string msg = e.what();
    for (char& c : msg) {
      if (c == '\n') c = ' ';
    }
    throw ConfigError("invalid JSON: " + msg);
  }
  RunConfig cfg;
  Section top(root, "");
  if (auto s = top.child("channel_map")) {
    s->get("left_mics", cfg.left_mics);
    s->get("right_mics", cfg.right_mics);
    s->get("num_external", cfg.num_external);
    s->get("file_channel_order", cfg.file_channel_order);
    s->finish();
  }
  if (auto s = top.child("stft")) {
    s->get("sample_rate", cfg.sample_rate);
    s->get("frame_ms", cfg.frame_ms);
    s->get("overlap", cfg.overlap);
    s->finish();
  }
  if (auto s = top.child("tracker")) {
    s->get("tau_y", cfg.tau_y);
    s->get("tau_n", cfg.tau_n);
    s->get("spp_threshold", cfg.spp_threshold);
    std::string det = detector_name(cfg.detector);
    s->get("detector", det);
    cfg.detector = parse_detector(det);
    s->get("bootstrap_s", cfg.bootstrap_s);
    s->get("covariance_trace", cfg.covariance_trace);
    s->finish();
  }
  top.get("methods", cfg.methods);
  if (auto s = top.child("beamformer")) {
    s->get("update_every_n_frames", cfg.update_every_n_frames);
    s->finish();
  }
  if (auto s = top.child("scene")) {
    s->get("preset", cfg.scene.preset);
    s->get("duration", cfg.scene.duration);
    s->get("target_input_snr_db", cfg.scene.target_input_snr_db);
    std::string nm = noise_model_name(cfg.scene.noise_model);
    s->get("noise_model", nm);
    cfg.scene.noise_model = parse_noise_model(nm);
    s->get("vad_threshold_db", cfg.scene.vad_threshold_db);
    s->get("leading_silence_s", cfg.scene.leading_silence_s);
    s->get("dry_speech", cfg.scene.dry_speech);
    s->get("rtf_csv", cfg.rtf_csv);
    s->finish();
  }
  if (auto s = top.child("metrics")) {
    s->get("segment_s", cfg.metrics.segment_seconds);
    s->get("overlap", cfg.metrics.overlap);
    s->get("silence_db", cfg.metrics.silence_db);
    s->finish();
  }
  top.get("input_dir", cfg.input_dir);
  top.get("out_dir", cfg.out_dir);
  top.get("seed", cfg.seed);
  top.finish();
  cfg.validate();
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str());
}

std::string RunConfig::to_json() const {
  json j;
  j["channel_map"] = {{"left_mics", left_mics},
                      {"right_mics", right_mics},
                      {"num_external", num_external},
                      {"file_channel_order", file_channel_order}};
  j["stft"] = {{"sample_rate", sample_rate}, {"frame_ms", frame_ms}, {"overlap", overlap}};
  j["tracker"] = {{"tau_y", tau_y},
                  {"tau_n", tau_n},
                  {"spp_threshold", spp_threshold},
                  {"detector", detector_name(detector)},
                  {"bootstrap_s", bootstrap_s},
                  {"covariance_trace", covariance_trace}};
  j["methods"] = methods;
  j["beamformer"] = {{"update_every_n_frames", update_every_n_frames}};
  j["scene"] = {{"preset", scene.preset},
                {"duration", scene.duration},
                {"target_input_snr_db", scene.target_input_snr_db},
                {"noise_model", noise_model_name(scene.noise_model)},
                {"vad_threshold_db", scene.vad_threshold_db},
                {"leading_silence_s", scene.leading_silence_s},
                {"dry_speech", scene.dry_speech},
                {"rtf_csv", rtf_csv}};
  j["metrics"] = {{"segment_s", metrics.segment_seconds},
                  {"overlap", metrics.overlap},
                  {"silence_db", metrics.silence_db}};
  j["input_dir"] = input_dir;
  j["out_dir"] = out_dir;
  j["seed"] = seed;
  return j.dump(2) + "\n";
}

void RunConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (left_mics == 0 || left_mics != right_mics) fail("channel_map: devices must have the same, nonzero number of mics");
  const std::size_t total = left_mics + right_mics + num_external;
  if (!file_channel_order.empty()) {
    if (file_channel_order.size() != total) fail("channel_map.file_channel_order: expected " + std::to_string(total) + " entries");
    try {
      ChannelPermutation p(file_channel_order);
    } catch (const Error& e) {
      fail(std::string("channel_map.file_channel_order: ") + e.what());
    }
  }
  if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) fail("stft.sample_rate must be positive");
  if (!(frame_ms > 0.0)) fail("stft.frame_ms must be positive");
  if (overlap != 0.5) fail("stft.overlap: only 0.5 is supported");
  try {
    stft().validate();
    tracker().validate();
  } catch (const Error& e) {
    fail(e.what());
  }
  if (methods.empty()) fail("methods: at least one method is required");
  for (const auto& name : methods) {
    Method m;
    try {
      m = Method::parse(name);
    } catch (const Error&) {
      fail("methods: unknown method '" + name + "'");
    }
    if (m.kind == Method::Kind::kSc && m.external > num_external) fail("methods: " + name + " exceeds num_external");
    if ((m.kind == Method::Kind::kIsnr || m.kind == Method::Kind::kAv || m.kind == Method::Kind::kMsnr) &&
        num_external == 0) {
      fail("methods: " + name + " needs external microphones");
    }
  }
  if (update_every_n_frames == 0) fail("beamformer.update_every_n_frames must be >= 1");
  if (scene.preset != "fig2-moving" && scene.preset != "fig2-static") {
    fail("scene.preset: expected fig2-moving or fig2-static, got '" + scene.preset + "'");
  }
  if (!(scene.duration > 0.0)) fail("scene.duration must be positive");
  if (!(scene.leading_silence_s >= 0.0 && scene.leading_silence_s < scene.duration)) {
    fail("scene.leading_silence_s must be in [0, duration)");
  }
  if (!std::isfinite(scene.target_input_snr_db)) fail("scene.target_input_snr_db must be finite");
  if (!scene.dry_speech.empty() && !std::filesystem::exists(scene.dry_speech)) {
    fail("scene.dry_speech: file not found: " + scene.dry_speech);
  }
  if (!(metrics.segment_seconds > 0.0)) fail("metrics.segment_s must be positive");
  if (!(metrics.overlap >= 0.0 && metrics.overlap < 1.0)) fail("metrics.overlap must be in [0, 1)");
  if (!input_dir.empty() && !std::filesystem::is_directory(input_dir)) fail("input_dir: not a directory: " + input_dir);
  if (out_dir.empty()) fail("out_dir must not be empty");
}

ChannelMap RunConfig::channel_map() const { return ChannelMap::from_sides(left_mics, right_mics, num_external); }

ChannelPermutation RunConfig::permutation() const {
  if (file_channel_order.empty()) return {};
  return ChannelPermutation(file_channel_order);
}

StftConfig RunConfig::stft() const { return StftConfig::from_duration(sample_rate, frame_ms / 1000.0); }

TrackerConfig RunConfig::tracker() const {
  TrackerConfig t;
  t.tau_y = tau_y;
  t.tau_n = tau_n;
  t.hop_seconds = stft().hop_seconds();
  t.spp_threshold = spp_threshold;
  t.detector = detector;
  t.bootstrap_seconds = bootstrap_s;
  return t;
}

std::vector<Method> RunConfig::method_list() const {
  std::vector<Method> out;
  for (const auto& name : methods) out.push_back(Method::parse(name));
  return out;
}

SceneSpec RunConfig::scene_spec() const {
  SceneSpec spec = preset_by_name(scene.preset, scene.duration, seed);
  if (!(spec.channel_map == channel_map())) {
    throw ConfigError("scene.preset " + scene.preset + " needs 2 mics per device and 3 externals");
  }
  spec.noise_model = scene.noise_model;
  spec.target_input_snr_db = scene.target_input_snr_db;
  spec.sample_rate = sample_rate;
  spec.vad_threshold_db = scene.vad_threshold_db;
  return spec;
}

PipelineConfig RunConfig::pipeline() const {
  PipelineConfig p;
  p.channel_map = channel_map();
  p.stft = stft();
  p.tracker = tracker();
  p.methods = method_list();
  p.update_every_n_frames = update_every_n_frames;
  p.record_covariance_trace = covariance_trace;
  return p;
}

}  // namespace bmvdr
