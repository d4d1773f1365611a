#pragma once

// End-to-end composition: ingest or simulate, suppress fixed-pattern noise,
// undistort, window into frames, detect, track, count, evaluate.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "evfish/config.hpp"
#include "evfish/count.hpp"
#include "evfish/detect.hpp"
#include "evfish/eval.hpp"
#include "evfish/event_io.hpp"
#include "evfish/framing.hpp"
#include "evfish/preprocess.hpp"
#include "evfish/simgen.hpp"
#include "evfish/text.hpp"
#include "evfish/track.hpp"

namespace evfish {

/// Hot-pixel suppression (when a dark capture is available) followed by
/// undistortion (when enabled).
inline std::vector<Event> preprocess_events(const PipelineConfig& cfg, const EventStream& stream,
                                            const std::optional<EventStream>& dark) {
  std::vector<Event> events = stream.events;
  if (dark) {
    if (dark->header != stream.header) throw GeometryMismatch("dark capture geometry differs from the stream");
    const auto model = build_hot_pixel_model(dark->events, cfg.dark_duration_s, dark->header, cfg.fpn_threshold);
    events = suppress_fpn(events, model);
  }
  if (cfg.calib_enabled) events = undistort_stream(events, stream.header, cfg.calib);
  return events;
}

struct WindowedDetections {
  DetectionsByFrame detections;
  std::size_t frames = 0;
};

/// Blob detection on the binary frame of every window.
inline WindowedDetections detect_windows(const PipelineConfig& cfg, const std::vector<Event>& events,
                                         const StreamHeader& geometry) {
  WindowedDetections out;
  WindowSequence seq(events, geometry, cfg.fps);
  out.frames = seq.size();
  while (auto item = seq.next_binary()) {
    const auto idx = static_cast<std::int64_t>(item->first.index);
    auto dets = detect_blobs(item->second, cfg.min_area, cfg.max_area, idx);
    if (!dets.empty()) out.detections[idx] = std::move(dets);
  }
  return out;
}

struct PipelineInputs {
  std::optional<EventStream> events;       // simulated from cfg when absent
  std::optional<EventStream> dark;         // dark capture for FPN suppression
  std::optional<FrameObjects> ground_truth;
};

struct PipelineResult {
  std::size_t frames = 0;
  std::size_t events_in = 0;
  std::size_t events_after_preprocess = 0;
  DetectionsByFrame detections;
  std::vector<TrackSnapshot> snapshots;
  std::vector<int> per_frame_counts;
  std::vector<CountReport> windows;
  double mean_count = 0.0;
  int final_count = 0;
  std::optional<MotaReport> mota;
  std::optional<CountAccuracyReport> accuracy;
  int true_count = 0;
  bool simulated = false;
};

inline PipelineResult run_pipeline(const PipelineConfig& cfg, PipelineInputs in) {
  cfg.validate();
  PipelineResult r;
  int true_count = cfg.true_count;

  if (!in.events) {
    const auto scene = cfg.scene_spec();
    auto sim = simulate(scene);
    in.events = std::move(sim.events);
    if (!in.ground_truth) in.ground_truth = objects_from_detections(sim.ground_truth);
    if (!in.dark && !scene.hot_pixels.empty()) {
      in.dark = simulate(dark_capture_spec(scene, cfg.dark_duration_s)).events;
    }
    if (true_count == 0) true_count = scene.n_fish;
    r.simulated = true;
  }
  const EventStream& stream = *in.events;
  r.events_in = stream.events.size();

  const auto events = preprocess_events(cfg, stream, in.dark);
  r.events_after_preprocess = events.size();

  std::int64_t last_frame = -1;
  if (cfg.detector == DetectorKind::blob) {
    auto wd = detect_windows(cfg, events, stream.header);
    r.detections = std::move(wd.detections);
    last_frame = static_cast<std::int64_t>(wd.frames) - 1;
  } else {
    r.detections = read_detections(read_file_text(cfg.detections_file), cfg.detections_file);
    last_frame = static_cast<std::int64_t>(WindowSequence(events, stream.header, cfg.fps).size()) - 1;
    if (!r.detections.empty()) last_frame = std::max(last_frame, r.detections.rbegin()->first);
  }
  r.frames = static_cast<std::size_t>(last_frame + 1);

  r.snapshots = track_all(r.detections, 0, last_frame, cfg.tracker);
  for (const auto& s : r.snapshots) r.per_frame_counts.push_back(per_frame_count(s));

  if (frames_per_window(cfg.fps, cfg.count_window_s) <= r.per_frame_counts.size()) {
    r.windows = count_windows(r.per_frame_counts, cfg.fps, cfg.count_window_s);
    long long sum = 0;
    std::size_t n = 0;
    for (const auto& w : r.windows) {
      for (int c : w.per_frame_counts) sum += c;
      n += w.per_frame_counts.size();
    }
    r.mean_count = static_cast<double>(sum) / static_cast<double>(n);
    r.final_count = static_cast<int>((sum + static_cast<long long>(n) - 1) / static_cast<long long>(n));
  }

  if (in.ground_truth && !in.ground_truth->empty()) {
    const auto rows = confirmed_rows(r.snapshots);
    r.mota = evaluate_mota(*in.ground_truth, objects_from_tracks(rows), cfg.iou_threshold);
  }
  r.true_count = true_count;
  if (true_count > 0 && !r.windows.empty()) {
    std::vector<CountTrial> trials;
    for (const auto& w : r.windows) trials.push_back({w.final_count, true_count});
    r.accuracy = counting_accuracy(trials);
  }
  return r;
}

/// Reference accuracy reported for a trained detector on real footage; the
/// blob baseline on synthetic scenes is not expected to match it.
inline constexpr double kReferenceCountAccuracy = 97.95;

inline std::string format_summary(const PipelineResult& r) {
  std::string out;
  out += "source: " + std::string(r.simulated ? "simulated" : "file") + '\n';
  out += "events_in: " + std::to_string(r.events_in) + '\n';
  out += "events_after_preprocess: " + std::to_string(r.events_after_preprocess) + '\n';
  out += "frames: " + std::to_string(r.frames) + '\n';
  std::size_t n_dets = 0;
  for (const auto& [_, d] : r.detections) n_dets += d.size();
  out += "detections: " + std::to_string(n_dets) + '\n';
  out += "count_windows: " + std::to_string(r.windows.size()) + '\n';
  for (std::size_t i = 0; i < r.windows.size(); ++i) {
    const auto& w = r.windows[i];
    out += "window " + std::to_string(i) + ": frames " + std::to_string(w.window_start) + "-" +
           std::to_string(w.window_end) + " mean " + text::format_fixed(w.mean, 4) + " final " +
           std::to_string(w.final_count) + '\n';
  }
  out += "mean_count: " + text::format_fixed(r.mean_count, 4) + '\n';
  out += "final_count: " + std::to_string(r.final_count) + '\n';
  if (r.accuracy) {
    out += "true_count: " + std::to_string(r.true_count) + '\n';
    out += "count_accuracy: " + text::format_fixed(r.accuracy->average, 2) + "%\n";
    out += "reference_accuracy: " + text::format_fixed(kReferenceCountAccuracy, 2) +
           "% (trained detector on real footage; this run uses the blob baseline)\n";
  }
  if (r.mota) out += format_mota_report(*r.mota);
  return out;
}

}  // namespace evfish
