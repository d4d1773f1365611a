#pragma once

// Tracking-by-detection: constant-velocity Kalman filter over [x, y, vx, vy],
// Hungarian association on center distance, and an ID lifecycle that lets an
// unmatched track coast on its prediction for a bounded number of frames.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "evfish/assignment.hpp"
#include "evfish/detect.hpp"
#include "evfish/error.hpp"
#include "evfish/text.hpp"

namespace evfish {

using Vec4 = Eigen::Matrix<double, 4, 1>;
using Vec2 = Eigen::Matrix<double, 2, 1>;
using Mat4 = Eigen::Matrix<double, 4, 4>;
using Mat2 = Eigen::Matrix<double, 2, 2>;
using Mat24 = Eigen::Matrix<double, 2, 4>;

/// Linear-Gaussian motion and measurement model. Time step is one frame;
/// the control term B*u is kept for completeness and is identically zero.
struct KalmanModel {
  Mat4 F = Mat4::Identity();
  Mat24 H = Mat24::Zero();
  Mat4 Q = Mat4::Identity();
  Mat2 R = Mat2::Identity();
  Mat4 B = Mat4::Zero();
  Vec4 u = Vec4::Zero();

  static KalmanModel constant_velocity(double q_pos, double q_vel, double r) {
    KalmanModel m;
    m.F(0, 2) = 1.0;
    m.F(1, 3) = 1.0;
    m.H(0, 0) = 1.0;
    m.H(1, 1) = 1.0;
    m.Q = Vec4(q_pos, q_pos, q_vel, q_vel).asDiagonal();
    m.R = Vec2(r, r).asDiagonal();
    return m;
  }
};

struct TrackState {
  Vec4 mean = Vec4::Zero();
  Mat4 covariance = Mat4::Identity();
};

enum class TrackStatus : std::uint8_t { tentative, confirmed, dead };

struct Track {
  std::int64_t id = 0;
  TrackState state;
  double w = 0.0;
  double h = 0.0;
  int frames_since_update = 0;
  int hits = 0;
  TrackStatus status = TrackStatus::tentative;

  double x() const { return state.mean(0); }
  double y() const { return state.mean(1); }
};

template <int N>
void symmetrize(Eigen::Matrix<double, N, N>& m) {
  m = 0.5 * (m + m.transpose()).eval();
}

inline Track predict(Track track, const KalmanModel& model) {
  track.state.mean = model.F * track.state.mean + model.B * model.u;
  track.state.covariance = model.F * track.state.covariance * model.F.transpose() + model.Q;
  symmetrize(track.state.covariance);
  return track;
}

inline Track update(Track track, const Vec2& z, const KalmanModel& model) {
  const Mat4& P = track.state.covariance;
  const Vec2 innovation = z - model.H * track.state.mean;
  Mat2 S = model.H * P * model.H.transpose() + model.R;
  symmetrize(S);
  const double det = S.determinant();
  if (!std::isfinite(det) || std::abs(det) <= 1e-300) {
    throw SingularInnovationCovariance("innovation covariance is singular");
  }
  const Eigen::Matrix<double, 4, 2> K = P * model.H.transpose() * S.inverse();
  track.state.mean += K * innovation;
  track.state.covariance = (Mat4::Identity() - K * model.H) * P;
  symmetrize(track.state.covariance);
  track.frames_since_update = 0;
  ++track.hits;
  return track;
}

struct AssignmentResult {
  AssignmentPairs matches;  // (track index, detection index)
  std::vector<std::size_t> unmatched_tracks;
  std::vector<std::size_t> unmatched_detections;
};

/// Optimal assignment on Euclidean center distance; pairs farther apart than
/// `gate` are dissolved afterwards.
inline AssignmentResult assign(std::span<const Track> predicted, std::span<const Detection> detections,
                               double gate) {
  if (!(gate > 0.0)) throw InvariantViolation("gate must be positive");
  CostMatrix cost(predicted.size(), detections.size());
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    for (std::size_t j = 0; j < detections.size(); ++j) {
      cost(i, j) = std::hypot(detections[j].box.x - predicted[i].x(), detections[j].box.y - predicted[i].y());
    }
  }
  AssignmentResult r;
  std::vector<char> track_used(predicted.size(), 0), det_used(detections.size(), 0);
  for (const auto& [ti, di] : solve_assignment(cost)) {
    if (cost(ti, di) > gate) continue;
    r.matches.emplace_back(ti, di);
    track_used[ti] = 1;
    det_used[di] = 1;
  }
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (!track_used[i]) r.unmatched_tracks.push_back(i);
  }
  for (std::size_t j = 0; j < detections.size(); ++j) {
    if (!det_used[j]) r.unmatched_detections.push_back(j);
  }
  return r;
}

struct TrackerParams {
  double q_pos = 1.0;
  double q_vel = 0.25;
  double r = 4.0;
  double p0_pos = 10.0;
  double p0_vel = 100.0;
  double gate = 50.0;
  int min_hits = 3;
  int max_coast = 15;

  KalmanModel model() const { return KalmanModel::constant_velocity(q_pos, q_vel, r); }

  void validate() const {
    if (q_pos < 0 || q_vel < 0 || !(r > 0) || !(p0_pos > 0) || !(p0_vel > 0)) {
      throw InvariantViolation("tracker covariances must be non-negative (R, P0 positive)");
    }
    if (!(gate > 0)) throw InvariantViolation("track gate must be positive");
    if (min_hits < 1 || max_coast < 0) throw InvariantViolation("min_hits >= 1 and max_coast >= 0 required");
  }
};

struct TrackSnapshotEntry {
  std::int64_t id = 0;
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;
  TrackStatus status = TrackStatus::tentative;
  int frames_since_update = 0;

  bool matched() const { return frames_since_update == 0; }
};

struct TrackSnapshot {
  std::int64_t frame = 0;
  std::vector<TrackSnapshotEntry> tracks;
};

/// Sequential tracker state machine; one call to step() per frame.
class Tracker {
public:
  explicit Tracker(TrackerParams params = {}) : params_(params), model_(params.model()) { params_.validate(); }

  TrackSnapshot step(std::span<const Detection> detections, std::int64_t frame) {
    for (auto& t : tracks_) t = predict(t, model_);
    const auto a = assign(tracks_, detections, params_.gate);
    for (const auto& [ti, di] : a.matches) {
      auto& t = tracks_[ti];
      const auto& d = detections[di];
      t = update(t, Vec2(d.box.x, d.box.y), model_);
      t.w = d.box.w;
      t.h = d.box.h;
      if (t.status == TrackStatus::tentative && t.hits >= params_.min_hits) t.status = TrackStatus::confirmed;
    }
    for (auto ti : a.unmatched_tracks) {
      auto& t = tracks_[ti];
      if (++t.frames_since_update > params_.max_coast) t.status = TrackStatus::dead;
    }
    std::erase_if(tracks_, [](const Track& t) { return t.status == TrackStatus::dead; });
    for (auto di : a.unmatched_detections) {
      const auto& d = detections[di];
      Track t;
      t.id = next_id_++;
      t.state.mean = Vec4(d.box.x, d.box.y, 0.0, 0.0);
      t.state.covariance = Vec4(params_.p0_pos, params_.p0_pos, params_.p0_vel, params_.p0_vel).asDiagonal();
      t.w = d.box.w;
      t.h = d.box.h;
      t.hits = 1;
      t.status = params_.min_hits <= 1 ? TrackStatus::confirmed : TrackStatus::tentative;
      tracks_.push_back(t);
    }
    TrackSnapshot snap;
    snap.frame = frame;
    for (const auto& t : tracks_) {
      snap.tracks.push_back({t.id, t.x(), t.y(), t.w, t.h, t.status, t.frames_since_update});
    }
    return snap;
  }

  const std::vector<Track>& tracks() const { return tracks_; }
  const TrackerParams& params() const { return params_; }

private:
  TrackerParams params_;
  KalmanModel model_;
  std::vector<Track> tracks_;
  std::int64_t next_id_ = 0;
};

/// Runs the tracker over every frame in [first, last]. Frames without
/// detections still advance the tracker. Negative-class detections are
/// dropped first.
inline std::vector<TrackSnapshot> track_all(const DetectionsByFrame& detections, std::int64_t first,
                                            std::int64_t last, const TrackerParams& params = {}) {
  Tracker tracker(params);
  std::vector<TrackSnapshot> out;
  for (std::int64_t f = first; f <= last; ++f) {
    const auto it = detections.find(f);
    const auto dets = it == detections.end() ? std::vector<Detection>{} : targets_only(it->second);
    out.push_back(tracker.step(dets, f));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Track CSV: "frame,id,x,y,w,h,status", one row per live confirmed track.
// status is "confirmed" when matched this frame and "coasting" otherwise.

inline constexpr std::string_view kTrackCsvHeader = "frame,id,x,y,w,h,status";

struct TrackRow {
  std::int64_t frame = 0;
  std::int64_t id = 0;
  Box box;
  bool coasting = false;

  friend bool operator==(const TrackRow&, const TrackRow&) = default;
};

inline std::vector<TrackRow> confirmed_rows(std::span<const TrackSnapshot> snapshots) {
  std::vector<TrackRow> rows;
  for (const auto& s : snapshots) {
    for (const auto& t : s.tracks) {
      if (t.status != TrackStatus::confirmed) continue;
      rows.push_back({s.frame, t.id, Box{t.x, t.y, t.w, t.h}, !t.matched()});
    }
  }
  return rows;
}

inline std::string write_tracks(std::span<const TrackRow> rows) {
  std::string out(kTrackCsvHeader);
  out += '\n';
  for (const auto& r : rows) {
    out += std::to_string(r.frame) + ',' + std::to_string(r.id) + ',' + text::format_double(r.box.x) + ',' +
           text::format_double(r.box.y) + ',' + text::format_double(r.box.w) + ',' +
           text::format_double(r.box.h) + ',' + (r.coasting ? "coasting" : "confirmed") + '\n';
  }
  return out;
}

inline std::vector<TrackRow> read_tracks(std::string_view csv, std::string_view source = "<tracks>") {
  const auto rows = text::lines(csv);
  if (rows.empty() || text::trim(rows[0]) != kTrackCsvHeader) {
    text::parse_fail(source, 1, 1, "expected header \"" + std::string(kTrackCsvHeader) + "\"");
  }
  std::vector<TrackRow> out;
  for (std::size_t li = 1; li < rows.size(); ++li) {
    const auto line_no = li + 1;
    if (text::trim(rows[li]).empty()) continue;
    const auto f = text::split(rows[li], ',');
    if (f.size() != 7) text::parse_fail(source, line_no, 1, "expected 7 fields, got " + std::to_string(f.size()));
    TrackRow r;
    if (!text::parse_number(f[0], r.frame) || r.frame < 0) text::parse_fail(source, line_no, 1, "bad frame");
    if (!text::parse_number(f[1], r.id) || r.id < 0) text::parse_fail(source, line_no, 2, "bad id");
    if (!text::parse_number(f[2], r.box.x)) text::parse_fail(source, line_no, 3, "bad x");
    if (!text::parse_number(f[3], r.box.y)) text::parse_fail(source, line_no, 4, "bad y");
    if (!text::parse_number(f[4], r.box.w)) text::parse_fail(source, line_no, 5, "bad w");
    if (!text::parse_number(f[5], r.box.h)) text::parse_fail(source, line_no, 6, "bad h");
    const auto st = text::trim(f[6]);
    if (st == "confirmed") {
      r.coasting = false;
    } else if (st == "coasting") {
      r.coasting = true;
    } else {
      text::parse_fail(source, line_no, 7, "status must be confirmed or coasting");
    }
    if (!(r.box.w > 0.0) || !(r.box.h > 0.0)) {
      throw NegativeExtent(std::string(source) + ":" + std::to_string(line_no) + ": box extent must be positive");
    }
    out.push_back(r);
  }
  return out;
}

}  // namespace evfish
