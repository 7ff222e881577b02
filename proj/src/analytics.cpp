#include "ixe/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "ixe/errors.hpp"

namespace ixe::analytics {

const char* to_string(TurnOutcome t) {
  switch (t) {
    case TurnOutcome::left: return "left";
    case TurnOutcome::right: return "right";
    case TurnOutcome::straight: return "straight";
    case TurnOutcome::u_turn: return "u_turn";
    case TurnOutcome::incomplete: return "incomplete";
  }
  return "?";
}

TurnOutcome to_outcome(scenesim::Movement m) {
  switch (m) {
    case scenesim::Movement::left: return TurnOutcome::left;
    case scenesim::Movement::right: return TurnOutcome::right;
    case scenesim::Movement::straight: return TurnOutcome::straight;
    case scenesim::Movement::u_turn: return TurnOutcome::u_turn;
  }
  return TurnOutcome::incomplete;
}

TurnOutcome classify_turn(const TrackHistory& history, const scenesim::ArmPolygons& arms) {
  if (history.empty()) return TurnOutcome::incomplete;

  int entry = -1, exit = -1;
  size_t entry_idx = 0, exit_idx = 0;
  for (size_t i = 0; i < history.size(); ++i) {
    const auto arm = scenesim::arm_containing(arms, history[i].world_pos);
    if (arm.has_value()) {
      entry = static_cast<int>(*arm);
      entry_idx = i;
      break;
    }
  }
  if (entry < 0) return TurnOutcome::incomplete;
  for (size_t i = history.size(); i-- > 0;) {
    const auto arm = scenesim::arm_containing(arms, history[i].world_pos);
    if (arm.has_value()) {
      exit = static_cast<int>(*arm);
      exit_idx = i;
      break;
    }
  }

  if (entry != exit) {
    return to_outcome(
        scenesim::movement_for(static_cast<scenesim::Arm>(entry), static_cast<scenesim::Arm>(exit)));
  }

  // Same arm at both ends: a u-turn only if the track left the arm in between.
  for (size_t i = entry_idx; i <= exit_idx; ++i) {
    const auto arm = scenesim::arm_containing(arms, history[i].world_pos);
    if (!arm.has_value() || static_cast<int>(*arm) != entry) {
      return TurnOutcome::u_turn;
    }
  }
  return TurnOutcome::incomplete;
}

void TurnCounts::add(scenesim::Arm entry, TurnOutcome movement) {
  if (movement == TurnOutcome::incomplete) return;
  counts[static_cast<int>(entry)][static_cast<int>(movement)] += 1;
}

long long TurnCounts::total() const {
  long long t = 0;
  for (const auto& row : counts) {
    for (long long c : row) t += c;
  }
  return t;
}

std::vector<RawViolation> pairwise_violations(std::uint64_t frame_index,
                                              const std::vector<PedestrianObs>& pedestrians,
                                              double threshold_m) {
  std::vector<RawViolation> out;
  for (size_t i = 0; i < pedestrians.size(); ++i) {
    for (size_t j = i + 1; j < pedestrians.size(); ++j) {
      const double d = (pedestrians[i].world_pos - pedestrians[j].world_pos).norm();
      if (d < threshold_m) {
        int a = pedestrians[i].track_id, b = pedestrians[j].track_id;
        if (a > b) std::swap(a, b);
        out.push_back(RawViolation{a, b, frame_index, d});
      }
    }
  }
  return out;
}

namespace {

// Per-frame velocity from a track's own history (backward difference).
std::vector<Vec2> velocities(const TrackHistory& h, double frame_rate) {
  std::vector<Vec2> v(h.size());
  for (size_t i = 1; i < h.size(); ++i) {
    const double df = static_cast<double>(h[i].frame_index - h[i - 1].frame_index);
    v[i] = (h[i].world_pos - h[i - 1].world_pos) * (frame_rate / (df > 0 ? df : 1.0));
  }
  if (h.size() >= 2) v[0] = v[1];
  return v;
}

}  // namespace

GroupLabel validate_pair(int track_a, int track_b, const TrackHistory& a, const TrackHistory& b,
                         const GroupParams& params, double frame_rate) {
  GroupLabel label;
  label.track_a = track_a;
  label.track_b = track_b;

  const auto va = velocities(a, frame_rate);
  const auto vb = velocities(b, frame_rate);

  // Co-visible frames via two-pointer walk.
  std::vector<double> dist;
  std::vector<double> cosine;
  size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].frame_index < b[j].frame_index) {
      ++i;
    } else if (b[j].frame_index < a[i].frame_index) {
      ++j;
    } else {
      dist.push_back((a[i].world_pos - b[j].world_pos).norm());
      const double na = va[i].norm(), nb = vb[j].norm();
      double c;
      if (na < 0.05 && nb < 0.05) {
        c = 1.0;  // co-idle counts as aligned
      } else if (na < 0.05 || nb < 0.05) {
        c = 0.0;
      } else {
        c = va[i].dot(vb[j]) / (na * nb);
      }
      cosine.push_back(c);
      ++i;
      ++j;
    }
  }

  label.covisible_frames = static_cast<int>(dist.size());
  const int w = params.window_frames;
  if (label.covisible_frames < w) {
    throw InsufficientOverlap("group validation: pair (" + std::to_string(track_a) + "," +
                              std::to_string(track_b) + ") co-visible " +
                              std::to_string(label.covisible_frames) + " < " + std::to_string(w) +
                              " frames");
  }

  double best_mean = 1e18;
  for (size_t start = 0; start + w <= dist.size(); ++start) {
    double sum = 0, sq = 0, csum = 0;
    for (int k = 0; k < w; ++k) {
      sum += dist[start + k];
      sq += dist[start + k] * dist[start + k];
      csum += cosine[start + k];
    }
    const double mean = sum / w;
    const double var = std::max(0.0, sq / w - mean * mean);
    const double sd = std::sqrt(var);
    const double cmean = csum / w;
    const bool safe = mean <= params.d_group_m && sd <= params.sigma_max_m &&
                      cmean >= params.cos_min;
    if (safe) {
      label.is_safe_group = true;
      label.mean_distance = mean;
      label.distance_std = sd;
      label.velocity_cosine = cmean;
      return label;
    }
    if (mean < best_mean) {
      best_mean = mean;
      label.mean_distance = mean;
      label.distance_std = sd;
      label.velocity_cosine = cmean;
    }
  }
  return label;
}

ViolationAnalysis validate_groups(const std::vector<RawViolation>& raw,
                                  const std::map<int, TrackHistory>& histories,
                                  const GroupParams& params, double frame_rate) {
  ViolationAnalysis out;
  std::set<std::pair<int, int>> pairs;
  for (const auto& v : raw) pairs.insert({v.track_a, v.track_b});

  std::set<std::pair<int, int>> safe;
  for (const auto& [a, b] : pairs) {
    const auto ha = histories.find(a);
    const auto hb = histories.find(b);
    GroupLabel label;
    label.track_a = a;
    label.track_b = b;
    if (ha != histories.end() && hb != histories.end()) {
      try {
        label = validate_pair(a, b, ha->second, hb->second, params, frame_rate);
      } catch (const InsufficientOverlap&) {
        // Short overlap: never a safe group, flags stay.
      }
    }
    if (label.is_safe_group) safe.insert({a, b});
    out.labels.push_back(label);
  }

  for (const auto& v : raw) {
    if (!safe.count({v.track_a, v.track_b})) out.kept.push_back(v);
  }
  return out;
}

std::vector<ViolationEvent> merge_events(const std::vector<RawViolation>& flags, int gap_merge,
                                         int min_duration_frames) {
  std::map<std::pair<int, int>, std::vector<const RawViolation*>> by_pair;
  for (const auto& f : flags) by_pair[{f.track_a, f.track_b}].push_back(&f);

  std::vector<ViolationEvent> events;
  for (auto& [key, list] : by_pair) {
    std::sort(list.begin(), list.end(), [](const RawViolation* x, const RawViolation* y) {
      return x->frame_index < y->frame_index;
    });
    ViolationEvent cur{key.first, key.second, list[0]->frame_index, list[0]->frame_index,
                       list[0]->distance_m};
    for (size_t i = 1; i < list.size(); ++i) {
      const auto* f = list[i];
      if (f->frame_index <= cur.end_frame + static_cast<std::uint64_t>(gap_merge) + 1) {
        cur.end_frame = f->frame_index;
        cur.min_distance_m = std::min(cur.min_distance_m, f->distance_m);
      } else {
        events.push_back(cur);
        cur = ViolationEvent{key.first, key.second, f->frame_index, f->frame_index,
                             f->distance_m};
      }
    }
    events.push_back(cur);
  }

  std::erase_if(events, [&](const ViolationEvent& e) {
    return static_cast<long long>(e.end_frame - e.start_frame + 1) < min_duration_frames;
  });
  std::sort(events.begin(), events.end(), [](const ViolationEvent& x, const ViolationEvent& y) {
    if (x.start_frame != y.start_frame) return x.start_frame < y.start_frame;
    if (x.track_a != y.track_a) return x.track_a < y.track_a;
    return x.track_b < y.track_b;
  });
  return events;
}

DurationHistogram violation_durations(const std::vector<ViolationEvent>& events,
                                      double frame_rate, double bin_width_s) {
  DurationHistogram hist;
  hist.bin_width_s = bin_width_s;
  for (const auto& e : events) {
    const double duration = static_cast<double>(e.end_frame - e.start_frame + 1) / frame_rate;
    // Bins are (k*w, (k+1)*w]; an exact multiple lands in the lower bin.
    int idx = static_cast<int>(std::ceil(duration / bin_width_s)) - 1;
    if (idx < 0) idx = 0;
    if (static_cast<size_t>(idx) >= hist.counts.size()) hist.counts.resize(idx + 1, 0);
    hist.counts[idx] += 1;
    hist.total += 1;
  }
  return hist;
}

F1Result f1_score(long long tp, long long fp, long long fn) {
  F1Result r;
  r.tp = tp;
  r.fp = fp;
  r.fn = fn;
  r.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  r.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  r.f1 = r.precision + r.recall > 0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
                                    : 0.0;
  return r;
}

}  // namespace ixe::analytics
