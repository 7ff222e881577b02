#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "ixe/detemu.hpp"
#include "ixe/geometry.hpp"
#include "ixe/types.hpp"

namespace ixe::tracker {

using Vector7 = Eigen::Matrix<double, 7, 1>;
using Matrix7 = Eigen::Matrix<double, 7, 7>;
using Vector4 = Eigen::Matrix<double, 4, 1>;
using Matrix4 = Eigen::Matrix<double, 4, 4>;

/// Constant-velocity box state [u, v, s, r, du, dv, ds]: center pixels,
/// area, aspect ratio and their rates (no aspect-ratio velocity).
struct KalmanState {
  Vector7 mean = Vector7::Zero();
  Matrix7 covariance = Matrix7::Identity();
};

Vector4 box_to_measurement(const PixelBox& box);
PixelBox measurement_to_box(const Vector4& z);
PixelBox state_to_box(const KalmanState& state);

/// Fresh state around a first measurement, velocities zero with wide priors.
KalmanState make_state(const PixelBox& box);

/// Advance dt frames (dt >= 1). Scale-relative process noise is accumulated
/// one frame at a time, so predict(x, 2) equals two predict(x, 1) steps.
/// The area component is floored at 1 px^2.
KalmanState predict(const KalmanState& state, int dt = 1);

/// Kalman correction observing [u, v, s, r] with scale-relative noise.
KalmanState update(const KalmanState& state, const PixelBox& measurement);

/// Correction with an explicit measurement noise matrix.
/// Throws SingularInnovation when the innovation covariance is not invertible.
KalmanState update_with_noise(const KalmanState& state, const Vector4& z, const Matrix4& r);

struct TrackerConfig {
  double iou_threshold = 0.3;
  int max_age = 5;
  int min_hits = 3;
  /// Optional appearance hook (DeepSORT-style association cost), disabled at
  /// weight 0. Bird's-eye streams rarely need it.
  double appearance_weight = 0.0;
  std::function<double(int track_id, const detemu::Detection&)> appearance_cost;
};

struct TrackBoxRef {
  int track_id = 0;
  PixelBox box;
  ObjectClass cls = ObjectClass::pedestrian;
};

struct AssociationResult {
  std::vector<std::pair<int, int>> matches;  // (track index, detection index)
  std::vector<int> unmatched_tracks;
  std::vector<int> unmatched_detections;
};

/// Minimum-cost matching on 1 - IoU (plus weighted appearance cost when
/// hooked). Pairs below the IoU threshold stay unmatched; cross-class pairs
/// are forbidden.
AssociationResult associate(const std::vector<TrackBoxRef>& tracks,
                            const std::vector<detemu::Detection>& detections,
                            const TrackerConfig& cfg);

enum class TrackStatus { tentative, confirmed, dead };

struct TrackSnapshot {
  std::uint64_t frame_index = 0;
  int track_id = 0;
  ObjectClass cls = ObjectClass::pedestrian;
  PixelBox box;
  double u = 0, v = 0, s = 0, r = 1;
  Vec2 world_pos;
  Vec2 world_vel;  // m/s, finite difference over the world history
  int hits = 0;
};

/// SORT: predict, associate, update, manage lifecycle. One instance per
/// camera stream; step() must be called with increasing frame indices.
class SortTracker {
 public:
  SortTracker(TrackerConfig cfg, geometry::Homography pixel_to_world, double frame_rate);

  /// Returns snapshots of confirmed tracks updated in this frame.
  std::vector<TrackSnapshot> step(std::uint64_t frame_index,
                                  const std::vector<detemu::Detection>& detections);

  int live_track_count() const { return static_cast<int>(tracks_.size()); }
  int next_track_id() const { return next_id_; }

 private:
  struct Track {
    int id = 0;
    ObjectClass cls = ObjectClass::pedestrian;
    KalmanState state;
    int hits = 0;
    int age_since_update = 0;
    TrackStatus status = TrackStatus::tentative;
    std::vector<std::pair<std::uint64_t, Vec2>> history;
  };

  TrackerConfig cfg_;
  geometry::Homography pixel_to_world_;
  double frame_rate_;
  std::vector<Track> tracks_;
  int next_id_ = 1;
  bool started_ = false;
  std::uint64_t last_frame_ = 0;
};

}  // namespace ixe::tracker
