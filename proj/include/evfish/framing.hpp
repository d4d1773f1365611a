#pragma once

// Rendering of event windows into binary / count / gray / accumulate frames
// and the screen-blended mixed frame.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "evfish/error.hpp"
#include "evfish/event_io.hpp"

namespace evfish {

enum class Mode : std::uint8_t { binary, count, gray, accumulate };

inline constexpr std::array<Mode, 4> kAllModes{Mode::binary, Mode::count, Mode::gray, Mode::accumulate};

inline std::string_view mode_name(Mode m) {
  switch (m) {
    case Mode::binary: return "binary";
    case Mode::count: return "count";
    case Mode::gray: return "gray";
    case Mode::accumulate: return "accumulate";
  }
  return "?";
}

struct ModeFrame {
  Mode mode = Mode::binary;
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  ModeFrame() = default;
  ModeFrame(Mode m, int w, int h) : mode(m), width(w), height(h), pixels(static_cast<std::size_t>(w) * h, 0) {}

  std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }

  friend bool operator==(const ModeFrame&, const ModeFrame&) = default;
};

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Interleaved RGB, row-major.
struct MixedFrame {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  MixedFrame() = default;
  MixedFrame(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3, 0) {}

  Rgb at(int x, int y) const {
    const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
    return {pixels[i], pixels[i + 1], pixels[i + 2]};
  }

  friend bool operator==(const MixedFrame&, const MixedFrame&) = default;
};

/// Most recent gray value seen at every pixel, carried across windows.
struct AccumulateState {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> last_gray;

  AccumulateState() = default;
  AccumulateState(int w, int h) : width(w), height(h), last_gray(static_cast<std::size_t>(w) * h, 0) {}

  friend bool operator==(const AccumulateState&, const AccumulateState&) = default;
};

struct TimeWindow {
  std::size_t index = 0;
  std::uint64_t t_start = 0;  // inclusive
  std::uint64_t t_end = 0;    // exclusive
};

struct FrameStack {
  std::size_t window_index = 0;
  std::uint64_t t_start = 0;
  std::uint64_t t_end = 0;
  ModeFrame binary;
  ModeFrame count;
  ModeFrame gray;
  ModeFrame accumulate;
  MixedFrame mixed;

  const ModeFrame& frame(Mode m) const {
    switch (m) {
      case Mode::binary: return binary;
      case Mode::count: return count;
      case Mode::gray: return gray;
      case Mode::accumulate: return accumulate;
    }
    return binary;
  }

  friend bool operator==(const FrameStack&, const FrameStack&) = default;
};

// ---------------------------------------------------------------------------
// Screen blending.

/// C = 1 - (1 - A)(1 - B) on normalized channel values.
constexpr double screen(double a, double b) { return 1.0 - (1.0 - a) * (1.0 - b); }

/// Normalized [0,1] channel to 8 bits, rounding half away from zero.
inline std::uint8_t quantize(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::round(v * 255.0), 0.0, 255.0));
}

/// Screen-blends any number of 8-bit channel values exactly.
///
/// With inputs v_i / 255 the composite is 255 - prod(255 - v_i) / 255^(n-1),
/// so the result is computed in integers and is independent of layer order.
/// The quotient never sits on a .5 boundary because 255^(n-1) is odd.
template <std::size_t N>
constexpr std::uint8_t screen_u8(const std::array<std::uint8_t, N>& layers) {
  static_assert(N >= 1 && N <= 7);
  std::uint64_t prod = 1;
  std::uint64_t den = 1;
  for (std::size_t i = 0; i < N; ++i) {
    prod *= 255u - layers[i];
    if (i > 0) den *= 255u;
  }
  // round(prod / den), then 255 minus that.
  const std::uint64_t q = (2 * prod + den) / (2 * den);
  return static_cast<std::uint8_t>(255u - q);
}

/// Layer order is accumulate (lowest), gray, count, binary (top). The binary
/// layer is recolored so white becomes pure green; the other three are
/// replicated to gray RGB.
inline MixedFrame fuse(const ModeFrame& binary, const ModeFrame& count, const ModeFrame& gray,
                       const ModeFrame& accumulate) {
  const int w = binary.width, h = binary.height;
  for (const ModeFrame* f : {&count, &gray, &accumulate}) {
    if (f->width != w || f->height != h) throw GeometryMismatch("fuse: mode frames differ in geometry");
  }
  MixedFrame out(w, h);
  const std::size_t n = static_cast<std::size_t>(w) * h;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t a = accumulate.pixels[i], g = gray.pixels[i], c = count.pixels[i];
    // Binary contributes (0, v, 0), so it only enters the green channel.
    const std::uint8_t rb = screen_u8<3>({a, g, c});
    out.pixels[3 * i + 0] = rb;
    out.pixels[3 * i + 1] = screen_u8<4>({a, g, c, binary.pixels[i]});
    out.pixels[3 * i + 2] = rb;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Window rendering.

/// Start offset (microseconds) of window `index` relative to the stream
/// origin: floor(index * 1e6 / fps).
inline std::uint64_t window_offset_us(std::uint64_t index, double fps) {
  return static_cast<std::uint64_t>(std::floor(static_cast<long double>(index) * 1e6L / fps));
}

inline constexpr double kDefaultFps = 30.0;

/// Renders the events of one window. `state` is advanced by the window's
/// events; the accumulate frame is a copy of the advanced state.
inline FrameStack render_window(std::span<const Event> events, const TimeWindow& window,
                                AccumulateState& state) {
  const int w = state.width, h = state.height;
  FrameStack fs;
  fs.window_index = window.index;
  fs.t_start = window.t_start;
  fs.t_end = window.t_end;
  fs.binary = ModeFrame(Mode::binary, w, h);
  fs.count = ModeFrame(Mode::count, w, h);
  fs.gray = ModeFrame(Mode::gray, w, h);

  std::vector<std::uint32_t> hits(static_cast<std::size_t>(w) * h, 0);
  std::uint32_t n_max = 0;
  std::uint64_t prev_t = window.t_start;
  for (const auto& e : events) {
    if (e.t < window.t_start || e.t >= window.t_end) {
      throw EventOutOfWindow("event t=" + std::to_string(e.t) + " outside window [" +
                             std::to_string(window.t_start) + ", " + std::to_string(window.t_end) + ")");
    }
    if (e.t < prev_t) throw TimestampRegression("window events are not time ordered");
    prev_t = e.t;
    if (e.x >= w || e.y >= h) throw GeometryMismatch("event outside frame geometry");
    const std::size_t i = static_cast<std::size_t>(e.y) * w + e.x;
    fs.binary.pixels[i] = 255;
    n_max = std::max(n_max, ++hits[i]);
    fs.gray.pixels[i] = e.gray;
    state.last_gray[i] = e.gray;
  }
  if (n_max > 0) {
    for (std::size_t i = 0; i < hits.size(); ++i) {
      if (hits[i] == 0) continue;
      // round(255 * n / n_max), half away from zero
      fs.count.pixels[i] =
          static_cast<std::uint8_t>((2ull * 255ull * hits[i] + n_max) / (2ull * n_max));
    }
  }
  fs.accumulate = ModeFrame(Mode::accumulate, w, h);
  fs.accumulate.pixels = state.last_gray;
  fs.mixed = fuse(fs.binary, fs.count, fs.gray, fs.accumulate);
  return fs;
}

/// Lazily partitions a time-ordered stream into contiguous windows of
/// 1/fps seconds aligned to the first event, threading the accumulate state.
class WindowSequence {
public:
  WindowSequence(std::span<const Event> events, const StreamHeader& geometry, double fps = kDefaultFps)
      : events_(events), fps_(fps), state_(geometry.width, geometry.height) {
    if (!(fps > 0.0)) throw InvariantViolation("fps must be positive");
    if (!events_.empty()) {
      origin_ = events_.front().t;
      const std::uint64_t span_us = events_.back().t - origin_;
      // Last window index containing the final event.
      std::uint64_t last = static_cast<std::uint64_t>(std::floor(static_cast<long double>(span_us) * fps / 1e6L));
      while (last > 0 && window_offset_us(last, fps_) > span_us) --last;
      while (window_offset_us(last + 1, fps_) <= span_us) ++last;
      count_ = static_cast<std::size_t>(last) + 1;
    }
  }

  std::size_t size() const { return count_; }
  std::uint64_t origin() const { return origin_; }

  TimeWindow window(std::size_t index) const {
    return {index, origin_ + window_offset_us(index, fps_), origin_ + window_offset_us(index + 1, fps_)};
  }

  /// Events falling inside window `index` (windows must be consumed in order
  /// for next(); this accessor is random-access).
  std::span<const Event> events_in(std::size_t index) const {
    const auto win = window(index);
    const auto lo = std::lower_bound(events_.begin(), events_.end(), win.t_start,
                                     [](const Event& e, std::uint64_t t) { return e.t < t; });
    const auto hi = std::lower_bound(lo, events_.end(), win.t_end,
                                     [](const Event& e, std::uint64_t t) { return e.t < t; });
    return {lo, hi};
  }

  std::optional<FrameStack> next() {
    if (next_index_ >= count_) return std::nullopt;
    const auto win = window(next_index_);
    auto hi = cursor_;
    while (hi < events_.size() && events_[hi].t < win.t_end) ++hi;
    auto fs = render_window(events_.subspan(cursor_, hi - cursor_), win, state_);
    cursor_ = hi;
    ++next_index_;
    return fs;
  }

  /// Binary frame of the next window only. Skips the other modes and does
  /// not advance the accumulate state; do not mix with next() on one sequence.
  std::optional<std::pair<TimeWindow, ModeFrame>> next_binary() {
    if (next_index_ >= count_) return std::nullopt;
    const auto win = window(next_index_);
    ModeFrame f(Mode::binary, state_.width, state_.height);
    while (cursor_ < events_.size() && events_[cursor_].t < win.t_end) {
      const auto& e = events_[cursor_++];
      if (e.x >= f.width || e.y >= f.height) throw GeometryMismatch("event outside frame geometry");
      f.at(e.x, e.y) = 255;
    }
    ++next_index_;
    return std::make_pair(win, std::move(f));
  }

  const AccumulateState& state() const { return state_; }

private:
  std::span<const Event> events_;
  double fps_;
  AccumulateState state_;
  std::uint64_t origin_ = 0;
  std::size_t count_ = 0;
  std::size_t next_index_ = 0;
  std::size_t cursor_ = 0;
};

}  // namespace evfish
