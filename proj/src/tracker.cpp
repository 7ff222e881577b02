#include "ixe/tracker.hpp"

#include <algorithm>
#include <cmath>

#include "ixe/errors.hpp"
#include "ixe/hungarian.hpp"

namespace ixe::tracker {

namespace {

constexpr double kForbiddenCost = 1e6;
constexpr double kSMin = 1.0;  // area floor, px^2
constexpr double kRMin = 1e-3;

// Scale-relative noise: position std 1/20 of box height, velocity std 1/160.
// Area behaves like a product of two lengths, so its stds are doubled
// relative to the linear terms.
void scale_stds(const Vector7& mean, double* h_out, double* s_out) {
  const double s = std::max(mean(2), kSMin);
  const double r = std::max(mean(3), kRMin);
  *h_out = std::max(1.0, std::sqrt(s / r));
  *s_out = s;
}

Matrix7 process_noise(const Vector7& mean) {
  double h, s;
  scale_stds(mean, &h, &s);
  const double sp = h / 20.0;
  const double sv = h / 160.0;
  Vector7 d;
  d << sp * sp, sp * sp, (s / 10.0) * (s / 10.0), 1e-4, sv * sv, sv * sv,
      (s / 80.0) * (s / 80.0);
  return d.asDiagonal();
}

Matrix4 measurement_noise(const Vector7& mean) {
  double h, s;
  scale_stds(mean, &h, &s);
  const double sp = h / 20.0;
  Vector4 d;
  d << sp * sp, sp * sp, (s / 10.0) * (s / 10.0), 2.5e-3;
  return d.asDiagonal();
}

Eigen::Matrix<double, 4, 7> measurement_matrix() {
  Eigen::Matrix<double, 4, 7> h = Eigen::Matrix<double, 4, 7>::Zero();
  h(0, 0) = h(1, 1) = h(2, 2) = h(3, 3) = 1.0;
  return h;
}

}  // namespace

Vector4 box_to_measurement(const PixelBox& box) {
  const double w = box.width();
  const double h = box.height();
  Vector4 z;
  z << box.x_min + w / 2.0, box.y_min + h / 2.0, w * h, h > 0 ? w / h : 1.0;
  return z;
}

PixelBox measurement_to_box(const Vector4& z) {
  const double s = std::max(z(2), kSMin);
  const double r = std::max(z(3), kRMin);
  const double w = std::sqrt(s * r);
  const double h = std::sqrt(s / r);
  return PixelBox{z(0) - w / 2.0, z(1) - h / 2.0, z(0) + w / 2.0, z(1) + h / 2.0};
}

PixelBox state_to_box(const KalmanState& state) {
  Vector4 z;
  z << state.mean(0), state.mean(1), state.mean(2), state.mean(3);
  return measurement_to_box(z);
}

KalmanState make_state(const PixelBox& box) {
  KalmanState st;
  const Vector4 z = box_to_measurement(box);
  st.mean.setZero();
  st.mean.head<4>() = z;
  double h, s;
  scale_stds(st.mean, &h, &s);
  Vector7 d;
  d << (h / 10.0) * (h / 10.0), (h / 10.0) * (h / 10.0), (s / 5.0) * (s / 5.0), 1e-2,
      (h / 8.0) * (h / 8.0), (h / 8.0) * (h / 8.0), (s / 20.0) * (s / 20.0);
  st.covariance = d.asDiagonal();
  return st;
}

KalmanState predict(const KalmanState& state, int dt) {
  KalmanState st = state;
  Matrix7 f = Matrix7::Identity();
  f(0, 4) = f(1, 5) = f(2, 6) = 1.0;
  for (int step = 0; step < std::max(1, dt); ++step) {
    const Matrix7 q = process_noise(st.mean);
    st.mean = f * st.mean;
    if (st.mean(2) < kSMin) st.mean(2) = kSMin;
    if (st.mean(3) < kRMin) st.mean(3) = kRMin;
    st.covariance = f * st.covariance * f.transpose() + q;
  }
  st.covariance = 0.5 * (st.covariance + st.covariance.transpose());
  return st;
}

KalmanState update_with_noise(const KalmanState& state, const Vector4& z, const Matrix4& r) {
  const auto h = measurement_matrix();
  const Matrix4 s_innov = h * state.covariance * h.transpose() + r;
  const Eigen::LLT<Matrix4> llt(s_innov);
  if (llt.info() != Eigen::Success) {
    throw SingularInnovation("kalman update: innovation covariance is singular");
  }
  const Eigen::Matrix<double, 7, 4> k =
      state.covariance * h.transpose() * llt.solve(Matrix4::Identity());
  KalmanState out;
  out.mean = state.mean + k * (z - h * state.mean);
  if (out.mean(2) < kSMin) out.mean(2) = kSMin;
  if (out.mean(3) < kRMin) out.mean(3) = kRMin;
  const Matrix7 ikh = Matrix7::Identity() - k * h;
  out.covariance = ikh * state.covariance;
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose());
  return out;
}

KalmanState update(const KalmanState& state, const PixelBox& measurement) {
  return update_with_noise(state, box_to_measurement(measurement),
                           measurement_noise(state.mean));
}

AssociationResult associate(const std::vector<TrackBoxRef>& tracks,
                            const std::vector<detemu::Detection>& detections,
                            const TrackerConfig& cfg) {
  AssociationResult res;
  const int nt = static_cast<int>(tracks.size());
  const int nd = static_cast<int>(detections.size());
  if (nt == 0 || nd == 0) {
    for (int i = 0; i < nt; ++i) res.unmatched_tracks.push_back(i);
    for (int j = 0; j < nd; ++j) res.unmatched_detections.push_back(j);
    return res;
  }

  std::vector<double> cost(static_cast<size_t>(nt) * nd, 0.0);
  std::vector<double> iou_val(static_cast<size_t>(nt) * nd, 0.0);
  for (int i = 0; i < nt; ++i) {
    for (int j = 0; j < nd; ++j) {
      const size_t idx = static_cast<size_t>(i) * nd + j;
      if (tracks[i].cls != detections[j].cls) {
        cost[idx] = kForbiddenCost;
        continue;
      }
      const double v = iou(tracks[i].box, detections[j].box);
      iou_val[idx] = v;
      double c = 1.0 - v;
      if (cfg.appearance_weight > 0.0 && cfg.appearance_cost) {
        c += cfg.appearance_weight * cfg.appearance_cost(tracks[i].track_id, detections[j]);
      }
      cost[idx] = c;
    }
  }

  const Assignment sol = solve_assignment(cost, nt, nd);
  std::vector<char> det_used(nd, 0);
  for (int i = 0; i < nt; ++i) {
    const int j = sol.row_to_col[i];
    bool ok = j >= 0;
    if (ok) {
      const size_t idx = static_cast<size_t>(i) * nd + j;
      ok = cost[idx] < kForbiddenCost / 2 && iou_val[idx] >= cfg.iou_threshold;
    }
    if (ok) {
      res.matches.push_back({i, j});
      det_used[j] = 1;
    } else {
      res.unmatched_tracks.push_back(i);
    }
  }
  for (int j = 0; j < nd; ++j) {
    if (!det_used[j]) res.unmatched_detections.push_back(j);
  }
  return res;
}

SortTracker::SortTracker(TrackerConfig cfg, geometry::Homography pixel_to_world,
                         double frame_rate)
    : cfg_(std::move(cfg)), pixel_to_world_(pixel_to_world), frame_rate_(frame_rate) {}

std::vector<TrackSnapshot> SortTracker::step(std::uint64_t frame_index,
                                             const std::vector<detemu::Detection>& detections) {
  if (started_ && frame_index <= last_frame_) {
    throw OutOfOrderFrame("tracker: frame " + std::to_string(frame_index) +
                          " not after " + std::to_string(last_frame_));
  }
  const int dt = started_ ? static_cast<int>(frame_index - last_frame_) : 1;
  started_ = true;
  last_frame_ = frame_index;

  for (auto& t : tracks_) t.state = predict(t.state, dt);

  std::vector<TrackBoxRef> refs;
  refs.reserve(tracks_.size());
  for (const auto& t : tracks_) refs.push_back({t.id, state_to_box(t.state), t.cls});
  const AssociationResult assoc = associate(refs, detections, cfg_);

  for (const auto& [ti, di] : assoc.matches) {
    Track& t = tracks_[ti];
    t.state = update(t.state, detections[di].box);
    t.hits += 1;
    t.age_since_update = 0;
    if (t.status == TrackStatus::tentative && t.hits >= cfg_.min_hits) {
      t.status = TrackStatus::confirmed;
    }
    t.history.push_back({frame_index, pixel_to_world_.apply({t.state.mean(0), t.state.mean(1)})});
  }
  for (int ti : assoc.unmatched_tracks) {
    Track& t = tracks_[ti];
    t.age_since_update += dt;
    t.hits = 0;
  }
  for (int di : assoc.unmatched_detections) {
    Track t;
    t.id = next_id_++;
    t.cls = detections[di].cls;
    t.state = make_state(detections[di].box);
    t.hits = 1;
    t.status = cfg_.min_hits <= 1 ? TrackStatus::confirmed : TrackStatus::tentative;
    t.history.push_back({frame_index, pixel_to_world_.apply({t.state.mean(0), t.state.mean(1)})});
    tracks_.push_back(std::move(t));
  }

  std::erase_if(tracks_, [this](const Track& t) { return t.age_since_update > cfg_.max_age; });

  std::vector<TrackSnapshot> out;
  for (const auto& t : tracks_) {
    if (t.status != TrackStatus::confirmed || t.age_since_update != 0) continue;
    TrackSnapshot snap;
    snap.frame_index = frame_index;
    snap.track_id = t.id;
    snap.cls = t.cls;
    snap.box = state_to_box(t.state);
    snap.u = t.state.mean(0);
    snap.v = t.state.mean(1);
    snap.s = t.state.mean(2);
    snap.r = t.state.mean(3);
    snap.world_pos = t.history.back().second;
    if (t.history.size() >= 2) {
      const auto& [f1, p1] = t.history[t.history.size() - 2];
      const auto& [f2, p2] = t.history.back();
      const double df = static_cast<double>(f2 - f1);
      if (df > 0) snap.world_vel = (p2 - p1) * (frame_rate_ / df);
    }
    snap.hits = t.hits;
    out.push_back(snap);
  }
  return out;
}

}  // namespace ixe::tracker
