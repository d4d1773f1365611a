#pragma once

// Deterministic synthetic scenes: oriented-ellipse fish on bounded random
// walks, rendered into contour events plus per-frame ground-truth boxes.
//
// Random sequence discipline (reproducible for a given seed):
//   * fish i draws from its own stream seeded mix_seed(seed ^ (i + 1)):
//     initial x, y, heading, speed, gray, then per frame k >= 1 exactly one
//     normal() for the turn and one normal() for the speed jitter, whether or
//     not the draw is applied;
//   * hot-pixel noise draws from a stream seeded mix_seed(seed ^ noise tag):
//     per frame, per configured hot pixel in order, one Poisson count and,
//     per noise event, uniform time offset, polarity and gray.
// Initial placement rejects overlapping starts, retrying on the fish's own
// stream.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "evfish/detect.hpp"
#include "evfish/error.hpp"
#include "evfish/event_io.hpp"
#include "evfish/framing.hpp"
#include "evfish/rng.hpp"

namespace evfish {

struct HotPixel {
  std::uint16_t x = 0;
  std::uint16_t y = 0;
  double rate = 0.0;  // events / second

  friend bool operator==(const HotPixel&, const HotPixel&) = default;
};

/// Fish `occluded` passes under fish `occluder` for frames [start, end).
struct OcclusionScript {
  int occluded = 0;
  int occluder = 1;
  int start = 0;
  int end = 1;

  friend bool operator==(const OcclusionScript&, const OcclusionScript&) = default;
};

struct SceneSpec {
  std::uint16_t width = 1280;
  std::uint16_t height = 800;
  int n_fish = 20;
  double fish_length = 60.0;
  double fish_width = 12.0;
  double speed_min = 2.0;  // px / frame
  double speed_max = 8.0;
  double speed_jitter = 0.3;  // px / frame std per frame
  double turn_std = 0.15;     // rad / frame
  double duration_s = 3.0;
  double fps = kDefaultFps;
  int gray_min = 80;
  int gray_max = 220;
  std::vector<HotPixel> hot_pixels;
  std::vector<OcclusionScript> occlusions;
  std::uint64_t seed = 1;

  // Scripted-occlusion choreography, in frames.
  int script_blend_frames = 60;
  int script_hold_frames = 10;

  std::size_t frame_count() const {
    const double n = std::floor(duration_s * fps + 1e-9);
    return n < 0 ? 0 : static_cast<std::size_t>(n);
  }

  StreamHeader header() const { return {width, height}; }

  void validate() const {
    if (width < 1 || height < 1) throw InvariantViolation("scene geometry must be at least 1x1");
    if (n_fish < 0) throw InvariantViolation("n_fish must be non-negative");
    if (!(fish_length > 0) || !(fish_width > 0) || fish_width > fish_length) {
      throw InvariantViolation("fish size must satisfy 0 < width <= length");
    }
    if (n_fish > 0 && (fish_length + 2 > width || fish_length + 2 > height)) {
      throw InvariantViolation("fish do not fit inside the arena");
    }
    if (!(fps > 0) || !(duration_s > 0) || frame_count() < 1) {
      throw InvariantViolation("duration * fps must be at least one frame");
    }
    if (speed_min < 0 || speed_max < speed_min) throw InvariantViolation("speed range must satisfy 0 <= min <= max");
    if (turn_std < 0 || speed_jitter < 0) throw InvariantViolation("noise magnitudes must be non-negative");
    if (gray_min < 0 || gray_max > 255 || gray_min > gray_max) throw InvariantViolation("gray range must lie in 0..255");
    if (script_blend_frames < 1 || script_hold_frames < 0) throw InvariantViolation("bad occlusion choreography");
    for (const auto& hp : hot_pixels) {
      if (hp.x >= width || hp.y >= height) throw InvariantViolation("hot pixel outside the sensor");
      if (!(hp.rate >= 0)) throw InvariantViolation("hot pixel rate must be non-negative");
    }
    for (const auto& s : occlusions) {
      if (s.occluded < 0 || s.occluded >= n_fish || s.occluder < 0 || s.occluder >= n_fish) {
        throw UnknownFishId("occlusion script references fish outside 0.." + std::to_string(n_fish - 1));
      }
      if (s.occluded == s.occluder) throw InvariantViolation("a fish cannot occlude itself");
      if (s.start >= s.end) throw InvariantViolation("occlusion start must precede end");
    }
  }
};

/// Adds a scripted occlusion of fish `occluded` under fish `occluder`.
inline SceneSpec script_occlusion(SceneSpec spec, int occluded, int occluder, int start, int end) {
  if (occluded < 0 || occluded >= spec.n_fish || occluder < 0 || occluder >= spec.n_fish) {
    throw UnknownFishId("unknown fish id in occlusion script");
  }
  if (occluded == occluder) throw InvariantViolation("a fish cannot occlude itself");
  if (start >= end) throw InvariantViolation("occlusion start must precede end");
  spec.occlusions.push_back({occluded, occluder, start, end});
  return spec;
}

struct SimResult {
  EventStream events;
  DetectionsByFrame ground_truth;  // id = fish index
  std::size_t frames = 0;
  std::vector<std::size_t> fish_events_per_frame;
  std::vector<std::size_t> noise_events_per_frame;
};

namespace sim_detail {

struct Pose {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
};

struct Walker {
  Rng rng;
  Pose pose;
  double speed = 0.0;
  std::uint8_t gray = 0;
};

inline double half_extent_x(double a, double b, double th) {
  return std::sqrt(a * a * std::cos(th) * std::cos(th) + b * b * std::sin(th) * std::sin(th));
}
inline double half_extent_y(double a, double b, double th) {
  return std::sqrt(a * a * std::sin(th) * std::sin(th) + b * b * std::cos(th) * std::cos(th));
}

/// Keeps the ellipse's bounding box inside the arena, reflecting the heading
/// off whichever wall was crossed.
inline void reflect_into_arena(Pose& p, double a, double b, double W, double H) {
  const double ex = half_extent_x(a, b, p.heading);
  const double ey = half_extent_y(a, b, p.heading);
  if (p.x - ex < 0.0) {
    p.x = 2.0 * ex - p.x;
    p.heading = std::numbers::pi - p.heading;
  } else if (p.x + ex > W) {
    p.x = 2.0 * (W - ex) - p.x;
    p.heading = std::numbers::pi - p.heading;
  }
  if (p.y - ey < 0.0) {
    p.y = 2.0 * ey - p.y;
    p.heading = -p.heading;
  } else if (p.y + ey > H) {
    p.y = 2.0 * (H - ey) - p.y;
    p.heading = -p.heading;
  }
  p.heading = std::remainder(p.heading, 2.0 * std::numbers::pi);
}

inline void clamp_into_arena(Pose& p, double a, double b, double W, double H) {
  const double ex = half_extent_x(a, b, p.heading);
  const double ey = half_extent_y(a, b, p.heading);
  p.x = std::clamp(p.x, ex, W - ex);
  p.y = std::clamp(p.y, ey, H - ey);
}

inline bool inside(const Pose& p, double a, double b, double px, double py) {
  const double dx = px - p.x, dy = py - p.y;
  const double c = std::cos(p.heading), s = std::sin(p.heading);
  const double u = dx * c + dy * s;
  const double v = -dx * s + dy * c;
  return (u * u) / (a * a) + (v * v) / (b * b) <= 1.0;
}

struct Raster {
  std::vector<std::uint32_t> pixels;  // sorted linear indices
  int min_x = 0, max_x = -1, min_y = 0, max_y = -1;
  bool empty() const { return pixels.empty(); }
};

inline Raster rasterize(const Pose& p, double a, double b, int W, int H) {
  Raster r;
  const double ex = half_extent_x(a, b, p.heading);
  const double ey = half_extent_y(a, b, p.heading);
  const int x0 = std::max(0, static_cast<int>(std::floor(p.x - ex)));
  const int x1 = std::min(W - 1, static_cast<int>(std::ceil(p.x + ex)));
  const int y0 = std::max(0, static_cast<int>(std::floor(p.y - ey)));
  const int y1 = std::min(H - 1, static_cast<int>(std::ceil(p.y + ey)));
  r.min_x = W;
  r.min_y = H;
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      if (!inside(p, a, b, x + 0.5, y + 0.5)) continue;
      r.pixels.push_back(static_cast<std::uint32_t>(y) * W + x);
      r.min_x = std::min(r.min_x, x);
      r.max_x = std::max(r.max_x, x);
      r.min_y = std::min(r.min_y, y);
      r.max_y = std::max(r.max_y, y);
    }
  }
  return r;
}

inline double smoothstep(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

inline double lerp_angle(double from, double to, double w) {
  const double d = std::remainder(to - from, 2.0 * std::numbers::pi);
  return from + w * d;
}

enum class Phase { none, blend_in, hold, hidden, hold_after, depart };

/// Where a script places its occluded fish at frame k.
inline Phase script_phase(const OcclusionScript& s, const SceneSpec& spec, long k) {
  const long hold = spec.script_hold_frames, blend = spec.script_blend_frames;
  if (k >= s.start - hold - blend && k < s.start - hold) return Phase::blend_in;
  if (k >= s.start - hold && k < s.start) return Phase::hold;
  if (k >= s.start && k < s.end) return Phase::hidden;
  if (k >= s.end && k < s.end + hold) return Phase::hold_after;
  if (k >= s.end + hold && k < s.end + hold + blend / 2) return Phase::depart;
  return Phase::none;
}

// Heading change (rad) away from the occluder when a scripted fish resumes.
inline constexpr double kDepartTurn = 0.6;

inline constexpr std::uint64_t kNoiseStreamTag = 0x6E6F697365ull;  // "noise"

}  // namespace sim_detail

/// Generates the event stream and ground truth for a scene.
///
/// Each frame a fish that moved emits one event per visible pixel of its
/// current outline (occupied pixels with an unoccupied 4-neighbour): polarity
/// on where the pixel was not covered by the fish in the previous frame, off
/// otherwise. Outline pixels covered by a fish drawn above (higher index, or
/// the scripted occluder) are suppressed. Event timestamps are spread evenly
/// over the frame interval starting at its first microsecond.
inline SimResult simulate(const SceneSpec& spec) {
  using namespace sim_detail;
  spec.validate();
  const int W = spec.width, H = spec.height;
  const double a = spec.fish_length / 2.0, b = spec.fish_width / 2.0;
  const std::size_t n_frames = spec.frame_count();
  const double center_x = W / 2.0, center_y = H / 2.0;

  std::vector<Walker> fish;
  fish.reserve(static_cast<std::size_t>(spec.n_fish));
  for (int i = 0; i < spec.n_fish; ++i) {
    Walker w{Rng(mix_seed(spec.seed ^ static_cast<std::uint64_t>(i + 1))), {}, 0.0, 0};
    // Start positions keep a margin between fish so frame 0 is unambiguous.
    for (int attempt = 0; attempt < 200; ++attempt) {
      w.pose.heading = w.rng.uniform(-std::numbers::pi, std::numbers::pi);
      const double ex = half_extent_x(a, b, w.pose.heading), ey = half_extent_y(a, b, w.pose.heading);
      w.pose.x = w.rng.uniform(ex, W - ex);
      w.pose.y = w.rng.uniform(ey, H - ey);
      bool clear = true;
      for (const auto& o : fish) {
        if (std::hypot(o.pose.x - w.pose.x, o.pose.y - w.pose.y) < spec.fish_length + 8.0) clear = false;
      }
      if (clear) break;
    }
    w.speed = w.rng.uniform(spec.speed_min, spec.speed_max);
    w.gray = static_cast<std::uint8_t>(w.rng.uniform_int(spec.gray_min, spec.gray_max));
    fish.push_back(std::move(w));
  }
  Rng noise_rng(mix_seed(spec.seed ^ kNoiseStreamTag));

  // Active script per occluded fish (first listed wins when windows overlap).
  auto script_for = [&](int fish_index, long k, Phase& phase) -> const OcclusionScript* {
    for (const auto& s : spec.occlusions) {
      if (s.occluded != fish_index) continue;
      phase = script_phase(s, spec, k);
      if (phase != Phase::none) return &s;
    }
    phase = Phase::none;
    return nullptr;
  };
  // Occluders steer toward the arena center while their partner blends in,
  // then swim straight until the partner has re-emerged.
  auto occluder_phase = [&](int fish_index, long k) {
    Phase best = Phase::none;
    for (const auto& s : spec.occlusions) {
      if (s.occluder != fish_index) continue;
      const Phase p = script_phase(s, spec, k);
      if (p == Phase::blend_in) return Phase::blend_in;
      if (p != Phase::none) best = Phase::hold;
    }
    return best;
  };

  auto departing = [&](int fish_index, long k) {
    Phase phase;
    return script_for(fish_index, k, phase) != nullptr && phase == Phase::depart;
  };

  SimResult out;
  out.events.header = spec.header();
  out.frames = n_frames;
  out.fish_events_per_frame.assign(n_frames, 0);
  out.noise_events_per_frame.assign(n_frames, 0);

  std::vector<Pose> render(fish.size());
  std::vector<Raster> prev(fish.size()), cur(fish.size());
  const double shadow_offset = spec.fish_width + 8.0;
  // Which side of its occluder each scripted fish swims on. It follows the
  // fish's own walk through the first half of the approach and is frozen
  // after that, so the blend stays on one side of the occluder's axis.
  std::vector<double> script_side(spec.occlusions.size(), 0.0);

  struct Pending {
    std::uint32_t pixel;
    Polarity polarity;
    std::uint8_t gray;
  };
  std::vector<Pending> pending;
  std::vector<Event> frame_events;

  for (std::size_t k = 0; k < n_frames; ++k) {
    const long kl = static_cast<long>(k);
    // 1. Advance each fish's own walk.
    if (k > 0) {
      // A scripted fish resumes its own walk from where it re-emerged.
      for (const auto& sc : spec.occlusions) {
        if (kl != sc.end + spec.script_hold_frames) continue;
        auto& f = fish[static_cast<std::size_t>(sc.occluded)];
        f.pose = render[static_cast<std::size_t>(sc.occluded)];
        f.pose.heading += kDepartTurn * script_side[static_cast<std::size_t>(&sc - spec.occlusions.data())];
        f.speed = fish[static_cast<std::size_t>(sc.occluder)].speed;
      }
      for (std::size_t i = 0; i < fish.size(); ++i) {
        auto& f = fish[i];
        const double turn = f.rng.normal(0.0, spec.turn_std);
        const double jitter = f.rng.normal(0.0, spec.speed_jitter);
        const Phase op = occluder_phase(static_cast<int>(i), kl);
        if (op == Phase::blend_in) {
          const double want = std::atan2(center_y - f.pose.y, center_x - f.pose.x);
          const double d = std::remainder(want - f.pose.heading, 2.0 * std::numbers::pi);
          f.pose.heading += std::clamp(d, -0.1, 0.1);
        } else if (op == Phase::none && !departing(static_cast<int>(i), kl)) {
          f.pose.heading += turn;
          f.speed = std::clamp(f.speed + jitter, spec.speed_min, spec.speed_max);
        }
        f.pose.x += f.speed * std::cos(f.pose.heading);
        f.pose.y += f.speed * std::sin(f.pose.heading);
        reflect_into_arena(f.pose, a, b, W, H);
        clamp_into_arena(f.pose, a, b, W, H);
      }
    }

    // 2. Rendered poses, with scripted fish pulled alongside / under their occluder.
    std::vector<int> forced_above(fish.size(), -1);
    for (std::size_t i = 0; i < fish.size(); ++i) {
      render[i] = fish[i].pose;
      Phase phase;
      const auto* s = script_for(static_cast<int>(i), kl, phase);
      if (s == nullptr) continue;
      const Pose& host = fish[static_cast<std::size_t>(s->occluder)].pose;
      const double nx = -std::sin(host.heading), ny = std::cos(host.heading);
      const auto si = static_cast<std::size_t>(s - spec.occlusions.data());
      double& side = script_side[si];
      const long begin = s->start - spec.script_hold_frames - spec.script_blend_frames;
      const double w = smoothstep(static_cast<double>(kl - begin + 1) / spec.script_blend_frames);
      if (side == 0.0 || (phase == Phase::blend_in && w < 0.2)) {
        const double across = nx * (fish[i].pose.x - host.x) + ny * (fish[i].pose.y - host.y);
        side = across < 0.0 ? -1.0 : 1.0;
      }
      Pose shadow = host;
      shadow.x += side * shadow_offset * nx;
      shadow.y += side * shadow_offset * ny;
      switch (phase) {
        case Phase::blend_in: {
          const Pose& own = fish[i].pose;
          double px = own.x + w * (shadow.x - own.x);
          double py = own.y + w * (shadow.y - own.y);
          // Keep clear of the occluder's body on the chosen side. The
          // clearance tapers off beyond one body length so the push is
          // continuous.
          const double ux = std::cos(host.heading), uy = std::sin(host.heading);
          const double along = ux * (px - host.x) + uy * (py - host.y);
          const double across = nx * (px - host.x) + ny * (py - host.y);
          const double L = spec.fish_length;
          const double clearance = shadow_offset * std::clamp(2.0 - std::abs(along) / L, 0.0, 1.0);
          if (side * across < clearance && side * across > -clearance) {
            const double fixed = side * clearance;
            px += (fixed - across) * nx;
            py += (fixed - across) * ny;
          }
          render[i].x = px;
          render[i].y = py;
          render[i].heading = lerp_angle(fish[i].pose.heading, shadow.heading, w);
          break;
        }
        case Phase::hold:
        case Phase::hold_after:
          render[i] = shadow;
          break;
        case Phase::hidden:
          render[i] = host;
          forced_above[i] = s->occluder;
          break;
        case Phase::depart:
          continue;  // own walk, already steered away
        case Phase::none:
          break;
      }
      clamp_into_arena(render[i], a, b, W, H);
    }

    // 3. Rasterize and emit outline events.
    pending.clear();
    for (std::size_t i = 0; i < fish.size(); ++i) cur[i] = rasterize(render[i], a, b, W, H);
    for (std::size_t i = 0; i < fish.size(); ++i) {
      const auto& r = cur[i];
      if (r.empty()) continue;
      const bool moved = k == 0 || r.pixels != prev[i].pixels;
      auto& gt = out.ground_truth[static_cast<std::int64_t>(k)];
      Detection d;
      d.frame = static_cast<std::int64_t>(k);
      d.id = static_cast<std::int64_t>(i);
      d.box.w = r.max_x - r.min_x + 1;
      d.box.h = r.max_y - r.min_y + 1;
      d.box.x = r.min_x + d.box.w / 2.0;
      d.box.y = r.min_y + d.box.h / 2.0;
      gt.push_back(d);
      if (!moved) continue;
      for (const auto idx : r.pixels) {
        const int x = static_cast<int>(idx % W), y = static_cast<int>(idx / W);
        const double cx = x + 0.5, cy = y + 0.5;
        const bool outline = !inside(render[i], a, b, cx - 1, cy) || !inside(render[i], a, b, cx + 1, cy) ||
                             !inside(render[i], a, b, cx, cy - 1) || !inside(render[i], a, b, cx, cy + 1) ||
                             x == 0 || y == 0 || x == W - 1 || y == H - 1;
        if (!outline) continue;
        bool covered = false;
        for (std::size_t j = 0; j < fish.size() && !covered; ++j) {
          if (j == i) continue;
          const bool above = static_cast<int>(j) == forced_above[i] ||
                             (j > i && forced_above[j] != static_cast<int>(i));
          if (!above || cur[j].empty()) continue;
          if (x < cur[j].min_x || x > cur[j].max_x || y < cur[j].min_y || y > cur[j].max_y) continue;
          covered = inside(render[j], a, b, cx, cy);
        }
        if (covered) continue;
        const bool was_covered = k > 0 && std::binary_search(prev[i].pixels.begin(), prev[i].pixels.end(), idx);
        pending.push_back({idx, was_covered ? Polarity::off : Polarity::on, fish[i].gray});
      }
    }

    const std::uint64_t t0 = window_offset_us(k, spec.fps);
    const std::uint64_t t1 = window_offset_us(k + 1, spec.fps);
    const std::uint64_t len = t1 - t0;
    frame_events.clear();
    const std::size_t n = pending.size();
    for (std::size_t e = 0; e < n; ++e) {
      const auto& p = pending[e];
      frame_events.push_back({t0 + (len * e) / n, static_cast<std::uint16_t>(p.pixel % W),
                              static_cast<std::uint16_t>(p.pixel / W), p.polarity, p.gray});
    }
    out.fish_events_per_frame[k] = n;

    // 4. Hot-pixel noise.
    const double dt = static_cast<double>(len) / 1e6;
    std::size_t noise = 0;
    for (const auto& hp : spec.hot_pixels) {
      const auto count = noise_rng.poisson(hp.rate * dt);
      for (std::uint64_t c = 0; c < count; ++c) {
        const auto off = static_cast<std::uint64_t>(noise_rng.uniform() * static_cast<double>(len));
        const auto pol = noise_rng.uniform() < 0.5 ? Polarity::off : Polarity::on;
        const auto gray = static_cast<std::uint8_t>(noise_rng.uniform_int(0, 255));
        frame_events.push_back({t0 + std::min(off, len - 1), hp.x, hp.y, pol, gray});
        ++noise;
      }
    }
    out.noise_events_per_frame[k] = noise;
    std::stable_sort(frame_events.begin(), frame_events.end(),
                     [](const Event& l, const Event& r) { return l.t < r.t; });
    out.events.events.insert(out.events.events.end(), frame_events.begin(), frame_events.end());

    std::swap(prev, cur);
  }
  return out;
}

/// The same scene with the fish removed: what the sensor records with the
/// lens covered.
inline SceneSpec dark_capture_spec(SceneSpec spec, double duration_s) {
  spec.n_fish = 0;
  spec.occlusions.clear();
  spec.duration_s = duration_s;
  return spec;
}

}  // namespace evfish
