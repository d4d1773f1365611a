#pragma once

// Fixed-pattern-noise suppression and lens undistortion.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "evfish/error.hpp"
#include "evfish/event_io.hpp"

namespace evfish {

/// Per-pixel firing rate measured with the lens covered. A pixel is hot when
/// its rate strictly exceeds the threshold.
struct HotPixelModel {
  std::uint16_t width = 0;
  std::uint16_t height = 0;
  double threshold = 2.0;  // events / second
  std::vector<double> rate;
  std::vector<std::uint8_t> hot_mask;

  bool is_hot(int x, int y) const { return hot_mask[static_cast<std::size_t>(y) * width + x] != 0; }
  double rate_at(int x, int y) const { return rate[static_cast<std::size_t>(y) * width + x]; }

  std::size_t hot_count() const {
    std::size_t n = 0;
    for (auto h : hot_mask) n += h;
    return n;
  }
};

inline constexpr double kDefaultFpnThreshold = 2.0;

inline HotPixelModel build_hot_pixel_model(std::span<const Event> dark_events, double duration_s,
                                           const StreamHeader& geometry,
                                           double threshold = kDefaultFpnThreshold) {
  if (!(duration_s > 0.0)) throw NonPositiveDuration("dark capture duration must be positive");
  HotPixelModel m;
  m.width = geometry.width;
  m.height = geometry.height;
  m.threshold = threshold;
  const std::size_t n = static_cast<std::size_t>(geometry.width) * geometry.height;
  std::vector<std::uint64_t> counts(n, 0);
  for (const auto& e : dark_events) {
    if (!geometry.contains(e.x, e.y)) {
      throw GeometryMismatch("dark event outside model geometry");
    }
    ++counts[static_cast<std::size_t>(e.y) * geometry.width + e.x];
  }
  m.rate.resize(n);
  m.hot_mask.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    m.rate[i] = static_cast<double>(counts[i]) / duration_s;
    m.hot_mask[i] = m.rate[i] > threshold ? 1 : 0;
  }
  return m;
}

/// Drops every event that lands on a hot pixel, preserving order.
inline std::vector<Event> suppress_fpn(std::span<const Event> events, const HotPixelModel& model) {
  std::vector<Event> out;
  out.reserve(events.size());
  for (const auto& e : events) {
    if (e.x >= model.width || e.y >= model.height) {
      throw GeometryMismatch("event (" + std::to_string(e.x) + "," + std::to_string(e.y) +
                             ") outside hot-pixel model geometry");
    }
    if (!model.is_hot(e.x, e.y)) out.push_back(e);
  }
  return out;
}

/// Intrinsics plus Brown-Conrady radial (k1..k3) and tangential (p1, p2)
/// coefficients.
struct CalibrationParams {
  double fx = 1.0, fy = 1.0;
  double cx = 0.0, cy = 0.0;
  double k1 = 0.0, k2 = 0.0, k3 = 0.0;
  double p1 = 0.0, p2 = 0.0;

  void validate() const {
    if (!(fx > 0.0) || !(fy > 0.0)) throw InvariantViolation("focal lengths must be positive");
  }
  bool has_distortion() const { return k1 != 0 || k2 != 0 || k3 != 0 || p1 != 0 || p2 != 0; }
};

struct UndistortOptions {
  int max_iterations = 20;
  double tolerance = 1e-8;  // normalized units
};

struct NormalizedPoint {
  double x = 0.0;
  double y = 0.0;
};

/// Forward distortion in normalized camera coordinates.
inline NormalizedPoint distort_normalized(NormalizedPoint p, const CalibrationParams& c) {
  const double r2 = p.x * p.x + p.y * p.y;
  const double radial = 1.0 + r2 * (c.k1 + r2 * (c.k2 + r2 * c.k3));
  const double dx = 2.0 * c.p1 * p.x * p.y + c.p2 * (r2 + 2.0 * p.x * p.x);
  const double dy = c.p1 * (r2 + 2.0 * p.y * p.y) + 2.0 * c.p2 * p.x * p.y;
  return {p.x * radial + dx, p.y * radial + dy};
}

/// Inverts the distortion model by fixed-point iteration. Throws
/// NonConvergence when the residual stays above tolerance.
inline NormalizedPoint undistort_normalized(NormalizedPoint observed, const CalibrationParams& c,
                                            const UndistortOptions& opt = {}) {
  NormalizedPoint p = observed;
  for (int it = 0; it < opt.max_iterations; ++it) {
    const auto fwd = distort_normalized(p, c);
    if (std::hypot(fwd.x - observed.x, fwd.y - observed.y) <= opt.tolerance) return p;
    const double r2 = p.x * p.x + p.y * p.y;
    const double radial = 1.0 + r2 * (c.k1 + r2 * (c.k2 + r2 * c.k3));
    const double dx = 2.0 * c.p1 * p.x * p.y + c.p2 * (r2 + 2.0 * p.x * p.x);
    const double dy = c.p1 * (r2 + 2.0 * p.y * p.y) + 2.0 * c.p2 * p.x * p.y;
    if (radial == 0.0 || !std::isfinite(radial)) break;
    p = {(observed.x - dx) / radial, (observed.y - dy) / radial};
  }
  const auto fwd = distort_normalized(p, c);
  if (std::hypot(fwd.x - observed.x, fwd.y - observed.y) <= opt.tolerance) return p;
  throw NonConvergence("undistortion did not converge within " +
                       std::to_string(opt.max_iterations) + " iterations");
}

struct PixelPoint {
  double x = 0.0;
  double y = 0.0;
};

inline PixelPoint undistort_pixel(PixelPoint observed, const CalibrationParams& c,
                                  const UndistortOptions& opt = {}) {
  const NormalizedPoint n{(observed.x - c.cx) / c.fx, (observed.y - c.cy) / c.fy};
  const auto u = undistort_normalized(n, c, opt);
  return {u.x * c.fx + c.cx, u.y * c.fy + c.cy};
}

/// Remapped event with its real-valued coordinates rounded half away from
/// zero. The result may lie outside the sensor; see undistort_stream.
struct RemappedEvent {
  Event event;
  long long x = 0;
  long long y = 0;
};

inline RemappedEvent undistort_event(const Event& e, const CalibrationParams& c,
                                     const UndistortOptions& opt = {}) {
  c.validate();
  const auto p = undistort_pixel({static_cast<double>(e.x), static_cast<double>(e.y)}, c, opt);
  return {e, std::llround(p.x), std::llround(p.y)};
}

/// Undistorts every event and drops those that leave the sensor. Pixel
/// remaps are cached since many events share a pixel.
inline std::vector<Event> undistort_stream(std::span<const Event> events, const StreamHeader& geometry,
                                           const CalibrationParams& c, const UndistortOptions& opt = {}) {
  c.validate();
  const std::size_t n = static_cast<std::size_t>(geometry.width) * geometry.height;
  constexpr std::int32_t kUnset = -2;
  constexpr std::int32_t kDropped = -1;
  std::vector<std::int32_t> remap(n, kUnset);
  std::vector<Event> out;
  out.reserve(events.size());
  for (const auto& e : events) {
    if (!geometry.contains(e.x, e.y)) throw GeometryMismatch("event outside stream geometry");
    const std::size_t idx = static_cast<std::size_t>(e.y) * geometry.width + e.x;
    if (remap[idx] == kUnset) {
      const auto r = undistort_event(e, c, opt);
      remap[idx] = geometry.contains(static_cast<int>(std::clamp<long long>(r.x, -1, 65536)),
                                     static_cast<int>(std::clamp<long long>(r.y, -1, 65536)))
                       ? static_cast<std::int32_t>(r.y * geometry.width + r.x)
                       : kDropped;
    }
    if (remap[idx] == kDropped) continue;
    Event moved = e;
    moved.x = static_cast<std::uint16_t>(remap[idx] % geometry.width);
    moved.y = static_cast<std::uint16_t>(remap[idx] / geometry.width);
    out.push_back(moved);
  }
  return out;
}

}  // namespace evfish
