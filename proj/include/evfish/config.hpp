#pragma once

// Flat key-value configuration ("module.key = value", '#' comments). Every
// key has a default equal to the owning module's default; unknown keys are
// rejected.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "evfish/count.hpp"
#include "evfish/detect.hpp"
#include "evfish/error.hpp"
#include "evfish/framing.hpp"
#include "evfish/preprocess.hpp"
#include "evfish/simgen.hpp"
#include "evfish/text.hpp"
#include "evfish/track.hpp"

namespace evfish {

enum class DetectorKind { blob, file };

struct PipelineConfig {
  StreamHeader sensor;
  double fps = kDefaultFps;

  double fpn_threshold = kDefaultFpnThreshold;
  std::string dark_events;       // optional path
  double dark_duration_s = 3.0;  // duration of the dark capture

  bool calib_enabled = false;
  CalibrationParams calib{1000.0, 1000.0, 640.0, 400.0};

  DetectorKind detector = DetectorKind::blob;
  std::string detections_file;
  int min_area = kDefaultMinArea;
  int max_area = kDefaultMaxArea;

  TrackerParams tracker;
  double count_window_s = kDefaultCountWindowSeconds;
  int true_count = 0;  // 0 = unknown
  double iou_threshold = 0.5;

  SceneSpec scene;  // sim.* keys; geometry and fps come from sensor.* / frames.fps

  /// The scene with the shared keys applied.
  SceneSpec scene_spec() const {
    SceneSpec s = scene;
    s.width = sensor.width;
    s.height = sensor.height;
    s.fps = fps;
    return s;
  }

  void validate() const {
    if (sensor.width < 1 || sensor.height < 1) throw ConfigError("sensor geometry must be at least 1x1");
    if (!(fps > 0)) throw ConfigError("frames.fps must be positive");
    if (!(fpn_threshold >= 0)) throw ConfigError("preprocess.fpn_threshold must be non-negative");
    if (!(dark_duration_s > 0)) throw ConfigError("preprocess.dark_duration_s must be positive");
    if (calib_enabled && (!(calib.fx > 0) || !(calib.fy > 0))) throw ConfigError("calib.fx and calib.fy must be positive");
    if (detector == DetectorKind::file && detections_file.empty()) {
      throw ConfigError("detect.mode=file needs detect.file");
    }
    if (min_area < 1 || max_area < min_area) throw ConfigError("detect areas must satisfy 1 <= min <= max");
    try {
      tracker.validate();
    } catch (const Error& e) {
      throw ConfigError(std::string("track: ") + e.what());
    }
    if (frames_per_window(fps, count_window_s) < 1) throw ConfigError("count.window_s * fps must be >= 1");
    if (true_count < 0) throw ConfigError("count.true_count must be non-negative");
    if (!(iou_threshold > 0) || !(iou_threshold < 1)) throw ConfigError("eval.iou must lie in (0, 1)");
  }
};

namespace config_detail {

inline double to_double(std::string_view key, std::string_view v) {
  double d = 0;
  if (!text::parse_number(v, d)) throw ConfigError(std::string(key) + ": expected a number, got \"" + std::string(v) + "\"");
  return d;
}

inline long long to_int(std::string_view key, std::string_view v) {
  long long i = 0;
  if (!text::parse_number(v, i)) throw ConfigError(std::string(key) + ": expected an integer, got \"" + std::string(v) + "\"");
  return i;
}

inline std::uint16_t to_dim(std::string_view key, std::string_view v) {
  const auto i = to_int(key, v);
  if (i < 1 || i > 65535) throw ConfigError(std::string(key) + ": out of range 1..65535");
  return static_cast<std::uint16_t>(i);
}

inline bool to_bool(std::string_view key, std::string_view v) {
  v = text::trim(v);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(std::string(key) + ": expected true or false");
}

/// "x:y:rate;x:y:rate"
inline std::vector<HotPixel> to_hot_pixels(std::string_view key, std::string_view v) {
  std::vector<HotPixel> out;
  if (text::trim(v).empty()) return out;
  for (auto item : text::split(v, ';')) {
    item = text::trim(item);
    if (item.empty()) continue;
    const auto f = text::split(item, ':');
    if (f.size() != 3) throw ConfigError(std::string(key) + ": entries are x:y:rate");
    const auto x = to_int(key, f[0]), y = to_int(key, f[1]);
    if (x < 0 || y < 0 || x > 65535 || y > 65535) throw ConfigError(std::string(key) + ": coordinate out of range");
    out.push_back({static_cast<std::uint16_t>(x), static_cast<std::uint16_t>(y), to_double(key, f[2])});
  }
  return out;
}

/// "a:b:start:end;..."
inline std::vector<OcclusionScript> to_occlusions(std::string_view key, std::string_view v) {
  std::vector<OcclusionScript> out;
  if (text::trim(v).empty()) return out;
  for (auto item : text::split(v, ';')) {
    item = text::trim(item);
    if (item.empty()) continue;
    const auto f = text::split(item, ':');
    if (f.size() != 4) throw ConfigError(std::string(key) + ": entries are occluded:occluder:start:end");
    out.push_back({static_cast<int>(to_int(key, f[0])), static_cast<int>(to_int(key, f[1])),
                   static_cast<int>(to_int(key, f[2])), static_cast<int>(to_int(key, f[3]))});
  }
  return out;
}

using Setter = std::function<void(PipelineConfig&, std::string_view key, std::string_view value)>;

inline const std::map<std::string, Setter, std::less<>>& setters() {
  using C = PipelineConfig;
  using SV = std::string_view;
  static const std::map<std::string, Setter, std::less<>> table = {
      {"sensor.width", [](C& c, SV k, SV v) { c.sensor.width = to_dim(k, v); }},
      {"sensor.height", [](C& c, SV k, SV v) { c.sensor.height = to_dim(k, v); }},
      {"frames.fps", [](C& c, SV k, SV v) { c.fps = to_double(k, v); }},
      {"preprocess.fpn_threshold", [](C& c, SV k, SV v) { c.fpn_threshold = to_double(k, v); }},
      {"preprocess.dark_events", [](C& c, SV, SV v) { c.dark_events = std::string(text::trim(v)); }},
      {"preprocess.dark_duration_s", [](C& c, SV k, SV v) { c.dark_duration_s = to_double(k, v); }},
      {"calib.enabled", [](C& c, SV k, SV v) { c.calib_enabled = to_bool(k, v); }},
      {"calib.fx", [](C& c, SV k, SV v) { c.calib.fx = to_double(k, v); }},
      {"calib.fy", [](C& c, SV k, SV v) { c.calib.fy = to_double(k, v); }},
      {"calib.cx", [](C& c, SV k, SV v) { c.calib.cx = to_double(k, v); }},
      {"calib.cy", [](C& c, SV k, SV v) { c.calib.cy = to_double(k, v); }},
      {"calib.k1", [](C& c, SV k, SV v) { c.calib.k1 = to_double(k, v); }},
      {"calib.k2", [](C& c, SV k, SV v) { c.calib.k2 = to_double(k, v); }},
      {"calib.k3", [](C& c, SV k, SV v) { c.calib.k3 = to_double(k, v); }},
      {"calib.p1", [](C& c, SV k, SV v) { c.calib.p1 = to_double(k, v); }},
      {"calib.p2", [](C& c, SV k, SV v) { c.calib.p2 = to_double(k, v); }},
      {"detect.mode",
       [](C& c, SV k, SV v) {
         v = text::trim(v);
         if (v == "blob") {
           c.detector = DetectorKind::blob;
         } else if (v == "file") {
           c.detector = DetectorKind::file;
         } else {
           throw ConfigError(std::string(k) + ": expected blob or file");
         }
       }},
      {"detect.file", [](C& c, SV, SV v) { c.detections_file = std::string(text::trim(v)); }},
      {"detect.min_area", [](C& c, SV k, SV v) { c.min_area = static_cast<int>(to_int(k, v)); }},
      {"detect.max_area", [](C& c, SV k, SV v) { c.max_area = static_cast<int>(to_int(k, v)); }},
      {"track.q_pos", [](C& c, SV k, SV v) { c.tracker.q_pos = to_double(k, v); }},
      {"track.q_vel", [](C& c, SV k, SV v) { c.tracker.q_vel = to_double(k, v); }},
      {"track.r", [](C& c, SV k, SV v) { c.tracker.r = to_double(k, v); }},
      {"track.p0_pos", [](C& c, SV k, SV v) { c.tracker.p0_pos = to_double(k, v); }},
      {"track.p0_vel", [](C& c, SV k, SV v) { c.tracker.p0_vel = to_double(k, v); }},
      {"track.gate_px", [](C& c, SV k, SV v) { c.tracker.gate = to_double(k, v); }},
      {"track.min_hits", [](C& c, SV k, SV v) { c.tracker.min_hits = static_cast<int>(to_int(k, v)); }},
      {"track.max_coast", [](C& c, SV k, SV v) { c.tracker.max_coast = static_cast<int>(to_int(k, v)); }},
      {"count.window_s", [](C& c, SV k, SV v) { c.count_window_s = to_double(k, v); }},
      {"count.true_count", [](C& c, SV k, SV v) { c.true_count = static_cast<int>(to_int(k, v)); }},
      {"eval.iou", [](C& c, SV k, SV v) { c.iou_threshold = to_double(k, v); }},
      {"sim.n_fish", [](C& c, SV k, SV v) { c.scene.n_fish = static_cast<int>(to_int(k, v)); }},
      {"sim.fish_length", [](C& c, SV k, SV v) { c.scene.fish_length = to_double(k, v); }},
      {"sim.fish_width", [](C& c, SV k, SV v) { c.scene.fish_width = to_double(k, v); }},
      {"sim.speed_min", [](C& c, SV k, SV v) { c.scene.speed_min = to_double(k, v); }},
      {"sim.speed_max", [](C& c, SV k, SV v) { c.scene.speed_max = to_double(k, v); }},
      {"sim.speed_jitter", [](C& c, SV k, SV v) { c.scene.speed_jitter = to_double(k, v); }},
      {"sim.turn_std", [](C& c, SV k, SV v) { c.scene.turn_std = to_double(k, v); }},
      {"sim.duration_s", [](C& c, SV k, SV v) { c.scene.duration_s = to_double(k, v); }},
      {"sim.gray_min", [](C& c, SV k, SV v) { c.scene.gray_min = static_cast<int>(to_int(k, v)); }},
      {"sim.gray_max", [](C& c, SV k, SV v) { c.scene.gray_max = static_cast<int>(to_int(k, v)); }},
      {"sim.hot_pixels", [](C& c, SV k, SV v) { c.scene.hot_pixels = to_hot_pixels(k, v); }},
      {"sim.occlusions", [](C& c, SV k, SV v) { c.scene.occlusions = to_occlusions(k, v); }},
      {"sim.seed",
       [](C& c, SV k, SV v) {
         std::uint64_t s = 0;
         if (!text::parse_number(v, s)) throw ConfigError(std::string(k) + ": expected an unsigned integer");
         c.scene.seed = s;
       }},
  };
  return table;
}

}  // namespace config_detail

inline std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, _] : config_detail::setters()) keys.push_back(k);
  return keys;
}

inline void apply_config_value(PipelineConfig& cfg, std::string_view key, std::string_view value) {
  const auto& table = config_detail::setters();
  const auto it = table.find(text::trim(key));
  if (it == table.end()) throw ConfigError("unknown config key \"" + std::string(text::trim(key)) + "\"");
  it->second(cfg, it->first, text::trim(value));
}

/// "key=value" override, as given on the command line.
inline void apply_config_assignment(PipelineConfig& cfg, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) throw ConfigError("expected key=value, got \"" + std::string(assignment) + "\"");
  apply_config_value(cfg, assignment.substr(0, eq), assignment.substr(eq + 1));
}

inline void apply_config_text(PipelineConfig& cfg, std::string_view contents, std::string_view source = "<config>") {
  const auto rows = text::lines(contents);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto line = rows[i];
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = text::trim(line);
    if (line.empty()) continue;
    try {
      apply_config_assignment(cfg, line);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string(source) + ":" + std::to_string(i + 1) + ": " + e.what());
    }
  }
}

inline PipelineConfig parse_config(std::string_view contents, std::string_view source = "<config>") {
  PipelineConfig cfg;
  apply_config_text(cfg, contents, source);
  return cfg;
}

}  // namespace evfish
