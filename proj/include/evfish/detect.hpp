#pragma once

// Per-frame detections: a connected-components blob baseline over binary
// frames and the CSV boundary through which an external detector's output
// enters the pipeline.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "evfish/error.hpp"
#include "evfish/framing.hpp"
#include "evfish/text.hpp"

namespace evfish {

enum class DetectionClass : std::uint8_t { target, negative };

inline std::string_view class_name(DetectionClass c) {
  return c == DetectionClass::target ? "target" : "negative";
}

/// Axis-aligned box given by its center (x, y) and extent (w, h).
struct Box {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double left() const { return x - w / 2.0; }
  double right() const { return x + w / 2.0; }
  double top() const { return y - h / 2.0; }
  double bottom() const { return y + h / 2.0; }
  double area() const { return w * h; }

  friend bool operator==(const Box&, const Box&) = default;
};

inline double iou(const Box& a, const Box& b) {
  const double iw = std::min(a.right(), b.right()) - std::max(a.left(), b.left());
  const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.top(), b.top());
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  return inter / (a.area() + b.area() - inter);
}

struct Detection {
  std::int64_t frame = 0;
  std::int64_t id = -1;  // -1 for detector output, >= 0 in ground-truth files
  Box box;
  double confidence = 1.0;
  DetectionClass cls = DetectionClass::target;

  friend bool operator==(const Detection&, const Detection&) = default;
};

inline constexpr int kDefaultMinArea = 30;
inline constexpr int kDefaultMaxArea = 5000;

/// 8-connected components of nonzero pixels whose pixel count lies in
/// [min_area, max_area], one tight-box detection each, sorted by center (y, x).
inline std::vector<Detection> detect_blobs(const ModeFrame& frame, int min_area = kDefaultMinArea,
                                           int max_area = kDefaultMaxArea, std::int64_t frame_index = 0) {
  if (min_area < 1 || max_area < min_area) {
    throw InvariantViolation("detect_blobs requires 1 <= min_area <= max_area");
  }
  const int w = frame.width, h = frame.height;
  std::vector<std::uint8_t> seen(frame.pixels.size(), 0);
  std::vector<std::size_t> stack;
  std::vector<Detection> out;
  for (int y0 = 0; y0 < h; ++y0) {
    for (int x0 = 0; x0 < w; ++x0) {
      const std::size_t start = static_cast<std::size_t>(y0) * w + x0;
      if (frame.pixels[start] == 0 || seen[start]) continue;
      int min_x = x0, max_x = x0, min_y = y0, max_y = y0;
      long long area = 0;
      seen[start] = 1;
      stack.push_back(start);
      while (!stack.empty()) {
        const std::size_t p = stack.back();
        stack.pop_back();
        ++area;
        const int px = static_cast<int>(p % w), py = static_cast<int>(p / w);
        min_x = std::min(min_x, px);
        max_x = std::max(max_x, px);
        min_y = std::min(min_y, py);
        max_y = std::max(max_y, py);
        for (int dy = -1; dy <= 1; ++dy) {
          const int ny = py + dy;
          if (ny < 0 || ny >= h) continue;
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = px + dx;
            if ((dx == 0 && dy == 0) || nx < 0 || nx >= w) continue;
            const std::size_t q = static_cast<std::size_t>(ny) * w + nx;
            if (frame.pixels[q] != 0 && !seen[q]) {
              seen[q] = 1;
              stack.push_back(q);
            }
          }
        }
      }
      if (area < min_area || area > max_area) continue;
      Detection d;
      d.frame = frame_index;
      d.box.w = max_x - min_x + 1;
      d.box.h = max_y - min_y + 1;
      d.box.x = min_x + d.box.w / 2.0;
      d.box.y = min_y + d.box.h / 2.0;
      out.push_back(d);
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Detection& a, const Detection& b) {
    return a.box.y != b.box.y ? a.box.y < b.box.y : a.box.x < b.box.x;
  });
  return out;
}

/// Drops negative-class detections (mirror reflections) before tracking.
inline std::vector<Detection> targets_only(const std::vector<Detection>& dets) {
  std::vector<Detection> out;
  for (const auto& d : dets) {
    if (d.cls == DetectionClass::target) out.push_back(d);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Detection CSV: "frame,id,x,y,w,h,conf,class".

inline constexpr std::string_view kDetectionCsvHeader = "frame,id,x,y,w,h,conf,class";

/// Detections grouped by frame index, file order preserved within a frame.
using DetectionsByFrame = std::map<std::int64_t, std::vector<Detection>>;

inline std::string write_detections(const DetectionsByFrame& frames) {
  std::string out(kDetectionCsvHeader);
  out += '\n';
  for (const auto& [frame, dets] : frames) {
    for (const auto& d : dets) {
      out += std::to_string(d.frame) + ',' + std::to_string(d.id) + ',' + text::format_double(d.box.x) + ',' +
             text::format_double(d.box.y) + ',' + text::format_double(d.box.w) + ',' +
             text::format_double(d.box.h) + ',' + text::format_double(d.confidence) + ',' +
             std::string(class_name(d.cls)) + '\n';
    }
  }
  return out;
}

inline DetectionsByFrame read_detections(std::string_view csv, std::string_view source = "<detections>") {
  const auto rows = text::lines(csv);
  if (rows.empty() || text::trim(rows[0]) != kDetectionCsvHeader) {
    text::parse_fail(source, 1, 1, "expected header \"" + std::string(kDetectionCsvHeader) + "\"");
  }
  DetectionsByFrame out;
  for (std::size_t li = 1; li < rows.size(); ++li) {
    const auto line_no = li + 1;
    if (text::trim(rows[li]).empty()) continue;
    const auto f = text::split(rows[li], ',');
    if (f.size() != 8) text::parse_fail(source, line_no, 1, "expected 8 fields, got " + std::to_string(f.size()));
    Detection d;
    if (!text::parse_number(f[0], d.frame) || d.frame < 0) text::parse_fail(source, line_no, 1, "bad frame");
    if (!text::parse_number(f[1], d.id) || d.id < -1) text::parse_fail(source, line_no, 2, "bad id");
    if (!text::parse_number(f[2], d.box.x)) text::parse_fail(source, line_no, 3, "bad x");
    if (!text::parse_number(f[3], d.box.y)) text::parse_fail(source, line_no, 4, "bad y");
    if (!text::parse_number(f[4], d.box.w)) text::parse_fail(source, line_no, 5, "bad w");
    if (!text::parse_number(f[5], d.box.h)) text::parse_fail(source, line_no, 6, "bad h");
    if (!text::parse_number(f[6], d.confidence) || d.confidence < 0.0 || d.confidence > 1.0) {
      text::parse_fail(source, line_no, 7, "confidence must be in [0, 1]");
    }
    const auto cls = text::trim(f[7]);
    if (cls == "target") {
      d.cls = DetectionClass::target;
    } else if (cls == "negative") {
      d.cls = DetectionClass::negative;
    } else {
      text::parse_fail(source, line_no, 8, "class must be target or negative");
    }
    if (!(d.box.w > 0.0) || !(d.box.h > 0.0)) {
      throw NegativeExtent(std::string(source) + ":" + std::to_string(line_no) + ": box extent must be positive");
    }
    out[d.frame].push_back(d);
  }
  return out;
}

}  // namespace evfish
