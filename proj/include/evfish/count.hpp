#pragma once

// Statistical counting: per-frame counts are averaged over a fixed window
// (3 s at 30 fps by default) and the mean is rounded up.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "evfish/error.hpp"
#include "evfish/framing.hpp"
#include "evfish/text.hpp"
#include "evfish/track.hpp"

namespace evfish {

inline constexpr double kDefaultCountWindowSeconds = 3.0;

struct CountReport {
  std::size_t window_start = 0;  // frame index, inclusive
  std::size_t window_end = 0;    // frame index, exclusive
  std::vector<int> per_frame_counts;
  double mean = 0.0;
  int final_count = 0;
};

/// Confirmed tracks matched to a detection in this frame; coasting tracks
/// are not counted.
inline int per_frame_count(const TrackSnapshot& snapshot) {
  int n = 0;
  for (const auto& t : snapshot.tracks) {
    if (t.status == TrackStatus::confirmed && t.matched()) ++n;
  }
  return n;
}

inline std::size_t frames_per_window(double fps, double window_s) {
  // Small epsilon so products like 0.1 * 30 land on 3, not 2.
  const double n = std::floor(window_s * fps + 1e-9);
  return n < 0 ? 0 : static_cast<std::size_t>(n);
}

inline CountReport windowed_count(std::span<const int> per_frame, double fps = kDefaultFps,
                                  double window_s = kDefaultCountWindowSeconds, std::size_t offset = 0) {
  const std::size_t n = frames_per_window(fps, window_s);
  if (n < 1) throw InvariantViolation("count window must span at least one frame");
  if (per_frame.size() < n) {
    throw InsufficientFrames("need " + std::to_string(n) + " frames, have " + std::to_string(per_frame.size()));
  }
  CountReport r;
  r.window_start = offset;
  r.window_end = offset + n;
  r.per_frame_counts.assign(per_frame.begin(), per_frame.begin() + static_cast<std::ptrdiff_t>(n));
  long long sum = 0;
  for (int c : r.per_frame_counts) {
    if (c < 0) throw InvariantViolation("per-frame counts must be non-negative");
    sum += c;
  }
  r.mean = static_cast<double>(sum) / static_cast<double>(n);
  // ceil(sum / n) in integers avoids 19.000000001-style surprises.
  r.final_count = static_cast<int>((sum + static_cast<long long>(n) - 1) / static_cast<long long>(n));
  return r;
}

/// Consecutive non-overlapping windows; a trailing partial window is dropped.
inline std::vector<CountReport> count_windows(std::span<const int> per_frame, double fps = kDefaultFps,
                                              double window_s = kDefaultCountWindowSeconds) {
  const std::size_t n = frames_per_window(fps, window_s);
  if (n < 1) throw InvariantViolation("count window must span at least one frame");
  std::vector<CountReport> out;
  for (std::size_t start = 0; start + n <= per_frame.size(); start += n) {
    out.push_back(windowed_count(per_frame.subspan(start), fps, window_s, start));
  }
  return out;
}

/// Per-frame counts from a track CSV over frames [0, n_frames): rows whose
/// status is "confirmed" (matched this frame).
inline std::vector<int> per_frame_counts(std::span<const TrackRow> rows, std::size_t n_frames) {
  std::vector<int> counts(n_frames, 0);
  for (const auto& r : rows) {
    if (!r.coasting && r.frame >= 0 && static_cast<std::size_t>(r.frame) < n_frames) ++counts[r.frame];
  }
  return counts;
}

inline constexpr std::string_view kCountCsvHeader = "window_start,window_end,mean,final";

inline std::string write_count_report(std::span<const CountReport> reports) {
  std::string out(kCountCsvHeader);
  out += '\n';
  for (const auto& r : reports) {
    out += std::to_string(r.window_start) + ',' + std::to_string(r.window_end) + ',' +
           text::format_double(r.mean) + ',' + std::to_string(r.final_count) + '\n';
  }
  return out;
}

/// Reads a count report. Per-frame counts are not part of the file.
inline std::vector<CountReport> read_count_report(std::string_view csv, std::string_view source = "<counts>") {
  const auto rows = text::lines(csv);
  if (rows.empty() || text::trim(rows[0]) != kCountCsvHeader) {
    text::parse_fail(source, 1, 1, "expected header \"" + std::string(kCountCsvHeader) + "\"");
  }
  std::vector<CountReport> out;
  for (std::size_t li = 1; li < rows.size(); ++li) {
    const auto line_no = li + 1;
    if (text::trim(rows[li]).empty()) continue;
    const auto f = text::split(rows[li], ',');
    if (f.size() != 4) text::parse_fail(source, line_no, 1, "expected 4 fields, got " + std::to_string(f.size()));
    CountReport r;
    if (!text::parse_number(f[0], r.window_start)) text::parse_fail(source, line_no, 1, "bad window_start");
    if (!text::parse_number(f[1], r.window_end) || r.window_end <= r.window_start) {
      text::parse_fail(source, line_no, 2, "window_end must exceed window_start");
    }
    if (!text::parse_number(f[2], r.mean) || r.mean < 0) text::parse_fail(source, line_no, 3, "bad mean");
    if (!text::parse_number(f[3], r.final_count) || r.final_count < 0) {
      text::parse_fail(source, line_no, 4, "bad final");
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace evfish
