#pragma once

// CLEAR-MOT accuracy and counting-accuracy aggregation.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "evfish/assignment.hpp"
#include "evfish/detect.hpp"
#include "evfish/error.hpp"
#include "evfish/text.hpp"
#include "evfish/track.hpp"

namespace evfish {

struct MotaReport {
  std::int64_t frames = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t ids = 0;
  std::int64_t gt = 0;
  double mota = 1.0;
};

/// MOTA = 1 - (FP + FN + IDS) / GT.
inline MotaReport mota_from_components(std::int64_t frames, std::int64_t fp, std::int64_t fn, std::int64_t ids,
                                       std::int64_t gt) {
  if (gt <= 0) throw EmptyGroundTruth("MOTA needs at least one ground-truth object");
  if (fp < 0 || fn < 0 || ids < 0) throw InvariantViolation("MOTA components must be non-negative");
  MotaReport r{frames, fp, fn, ids, gt, 0.0};
  r.mota = 1.0 - static_cast<double>(fp + fn + ids) / static_cast<double>(gt);
  return r;
}

/// Objects present in one frame, keyed by frame index.
struct LabeledBox {
  std::int64_t id = 0;
  Box box;
};
using FrameObjects = std::map<std::int64_t, std::vector<LabeledBox>>;

inline FrameObjects objects_from_tracks(std::span<const TrackRow> rows) {
  FrameObjects out;
  for (const auto& r : rows) out[r.frame].push_back({r.id, r.box});
  return out;
}

inline FrameObjects objects_from_detections(const DetectionsByFrame& dets) {
  FrameObjects out;
  for (const auto& [frame, list] : dets) {
    for (const auto& d : list) {
      if (d.cls != DetectionClass::target) continue;
      if (d.id < 0) throw InvariantViolation("ground-truth rows need id >= 0");
      out[frame].push_back({d.id, d.box});
    }
  }
  return out;
}

/// Accepts either the track CSV or the detection CSV shape (by header).
inline FrameObjects read_objects(std::string_view csv, std::string_view source) {
  const auto rows = text::lines(csv);
  const auto header = rows.empty() ? std::string_view{} : text::trim(rows[0]);
  if (header == kTrackCsvHeader) return objects_from_tracks(read_tracks(csv, source));
  if (header == kDetectionCsvHeader) return objects_from_detections(read_detections(csv, source));
  text::parse_fail(source, 1, 1, "expected a track or detection CSV header");
}

/// Per frame: previous GT-to-hypothesis pairings that still overlap at or
/// above the threshold are kept; the rest are matched by minimum total
/// (1 - IoU). Unmatched hypotheses are FP, unmatched GT are FN, and a GT
/// whose hypothesis id differs from its last match is an ID switch.
inline MotaReport evaluate_mota(const FrameObjects& gt, const FrameObjects& hyp, double iou_threshold = 0.5) {
  if (!(iou_threshold > 0.0) || !(iou_threshold < 1.0)) {
    throw InvariantViolation("IoU threshold must lie in (0, 1)");
  }
  std::set<std::int64_t> frames;
  for (const auto& [f, _] : gt) frames.insert(f);
  for (const auto& [f, _] : hyp) frames.insert(f);

  MotaReport r;
  std::map<std::int64_t, std::int64_t> last_match;  // gt id -> hyp id
  static const std::vector<LabeledBox> kNone;
  for (const auto f : frames) {
    const auto git = gt.find(f);
    const auto hit = hyp.find(f);
    const auto& g = git == gt.end() ? kNone : git->second;
    const auto& h = hit == hyp.end() ? kNone : hit->second;
    r.gt += static_cast<std::int64_t>(g.size());

    std::vector<char> g_used(g.size(), 0), h_used(h.size(), 0);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto lm = last_match.find(g[i].id);
      if (lm == last_match.end()) continue;
      for (std::size_t j = 0; j < h.size(); ++j) {
        if (h_used[j] || h[j].id != lm->second) continue;
        if (iou(g[i].box, h[j].box) >= iou_threshold) {
          g_used[i] = h_used[j] = 1;
          pairs.emplace_back(i, j);
        }
        break;
      }
    }

    std::vector<std::size_t> gi, hj;
    for (std::size_t i = 0; i < g.size(); ++i) if (!g_used[i]) gi.push_back(i);
    for (std::size_t j = 0; j < h.size(); ++j) if (!h_used[j]) hj.push_back(j);
    if (!gi.empty() && !hj.empty()) {
      // Pairs below the threshold are forbidden; a large finite cost keeps
      // the solver complete while never preferring them.
      constexpr double kForbidden = 1e6;
      CostMatrix cost(gi.size(), hj.size());
      for (std::size_t a = 0; a < gi.size(); ++a) {
        for (std::size_t b = 0; b < hj.size(); ++b) {
          const double o = iou(g[gi[a]].box, h[hj[b]].box);
          cost(a, b) = o >= iou_threshold ? 1.0 - o : kForbidden;
        }
      }
      for (const auto& [a, b] : solve_assignment(cost)) {
        if (cost(a, b) >= kForbidden) continue;
        g_used[gi[a]] = h_used[hj[b]] = 1;
        pairs.emplace_back(gi[a], hj[b]);
      }
    }

    for (const auto& [i, j] : pairs) {
      const auto lm = last_match.find(g[i].id);
      if (lm != last_match.end() && lm->second != h[j].id) ++r.ids;
      last_match[g[i].id] = h[j].id;
    }
    for (auto u : g_used) r.fn += u ? 0 : 1;
    for (auto u : h_used) r.fp += u ? 0 : 1;
  }
  r.frames = static_cast<std::int64_t>(frames.size());
  if (r.gt <= 0) throw EmptyGroundTruth("ground truth contains no objects");
  r.mota = 1.0 - static_cast<double>(r.fp + r.fn + r.ids) / static_cast<double>(r.gt);
  return r;
}

/// Two ways to combine several sequences: summation of the
/// components, and the plain mean of the per-sequence MOTA values.
struct MotaAggregate {
  MotaReport summed;
  double mean_of_rows = 0.0;
};

inline MotaAggregate aggregate_mota(std::span<const MotaReport> rows) {
  if (rows.empty()) throw EmptyGroundTruth("no sequences to aggregate");
  std::int64_t frames = 0, fp = 0, fn = 0, ids = 0, gt = 0;
  double mean = 0.0;
  for (const auto& r : rows) {
    frames += r.frames;
    fp += r.fp;
    fn += r.fn;
    ids += r.ids;
    gt += r.gt;
    mean += r.mota;
  }
  return {mota_from_components(frames, fp, fn, ids, gt), mean / static_cast<double>(rows.size())};
}

inline std::string format_mota_report(const MotaReport& r, std::string_view label = "") {
  const std::string p = label.empty() ? std::string{} : std::string(label) + ".";
  std::string out;
  out += p + "frames: " + std::to_string(r.frames) + '\n';
  out += p + "FP: " + std::to_string(r.fp) + '\n';
  out += p + "FN: " + std::to_string(r.fn) + '\n';
  out += p + "IDS: " + std::to_string(r.ids) + '\n';
  out += p + "GT: " + std::to_string(r.gt) + '\n';
  out += p + "MOTA: " + text::format_fixed(100.0 * r.mota, 1) + "%\n";
  return out;
}

// ---------------------------------------------------------------------------
// Counting accuracy.

struct CountTrial {
  int final_count = 0;
  int true_count = 0;
};

struct CountAccuracyReport {
  std::vector<CountTrial> trials;
  std::vector<double> per_trial_accuracy;  // percent
  double average = 0.0;                    // percent
};

/// accuracy = (1 - |final - true| / true) * 100, averaged over trials.
inline CountAccuracyReport counting_accuracy(std::span<const CountTrial> trials) {
  CountAccuracyReport r;
  r.trials.assign(trials.begin(), trials.end());
  double sum = 0.0;
  for (const auto& t : trials) {
    if (t.true_count <= 0) throw NonPositiveTruth("true count must be positive");
    const double acc = (1.0 - std::abs(t.final_count - t.true_count) / static_cast<double>(t.true_count)) * 100.0;
    r.per_trial_accuracy.push_back(acc);
    sum += acc;
  }
  r.average = trials.empty() ? 0.0 : sum / static_cast<double>(trials.size());
  return r;
}

}  // namespace evfish
