#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <vector>

#include "ixe/scenesim.hpp"
#include "ixe/types.hpp"

namespace ixe::analytics {

struct TrackPoint {
  std::uint64_t frame_index = 0;
  Vec2 world_pos;
};
using TrackHistory = std::vector<TrackPoint>;  // sorted by frame

enum class TurnOutcome { left = 0, right = 1, straight = 2, u_turn = 3, incomplete = 4 };

const char* to_string(TurnOutcome t);
TurnOutcome to_outcome(scenesim::Movement m);

/// Entry arm = first arm containing a history point, exit arm = the last.
/// A track that never leaves its entry arm (or never touches one) is
/// incomplete; returning to the entry arm after leaving it is a u-turn.
TurnOutcome classify_turn(const TrackHistory& history, const scenesim::ArmPolygons& arms);

/// (entry arm x movement) counters.
struct TurnCounts {
  std::array<std::array<long long, 4>, 4> counts{};
  void add(scenesim::Arm entry, TurnOutcome movement);
  long long total() const;
};

struct PedestrianObs {
  int track_id = 0;
  Vec2 world_pos;
};

struct RawViolation {
  int track_a = 0;  // track_a < track_b
  int track_b = 0;
  std::uint64_t frame_index = 0;
  double distance_m = 0.0;
};

/// Frame-level flags: every pedestrian pair closer than threshold_m
/// (strict inequality).
std::vector<RawViolation> pairwise_violations(std::uint64_t frame_index,
                                              const std::vector<PedestrianObs>& pedestrians,
                                              double threshold_m = 2.0);

struct GroupParams {
  int window_frames = 30;   // W co-visible frames
  double d_group_m = 1.5;   // mean distance bound
  double sigma_max_m = 0.4; // distance standard deviation bound
  double cos_min = 0.9;     // mean velocity cosine bound
};

struct GroupLabel {
  int track_a = 0, track_b = 0;
  bool is_safe_group = false;
  double mean_distance = 0.0;
  double distance_std = 0.0;
  double velocity_cosine = 0.0;
  int covisible_frames = 0;
};

/// Trajectory similarity and stability over one pair. A pair is a safe group
/// iff some window of W co-visible frames has mean distance <= d_group,
/// distance std <= sigma_max and mean velocity cosine >= cos_min.
/// Throws InsufficientOverlap when the pair shares fewer than W frames.
GroupLabel validate_pair(int track_a, int track_b, const TrackHistory& a, const TrackHistory& b,
                         const GroupParams& params, double frame_rate);

struct ViolationAnalysis {
  std::vector<RawViolation> kept;  // raw flags minus safe-group pairs
  std::vector<GroupLabel> labels;  // one per distinct flagged pair
};

/// Suppress flags of pairs validated as safe groups. Pairs with fewer than W
/// co-visible frames are never safe.
ViolationAnalysis validate_groups(const std::vector<RawViolation>& raw,
                                  const std::map<int, TrackHistory>& histories,
                                  const GroupParams& params, double frame_rate);

struct ViolationEvent {
  int track_a = 0, track_b = 0;
  std::uint64_t start_frame = 0, end_frame = 0;  // inclusive
  double min_distance_m = 0.0;
};

/// Merge per-pair frame flags into events, bridging gaps of at most
/// gap_merge frames; events shorter than min_duration frames are dropped.
std::vector<ViolationEvent> merge_events(const std::vector<RawViolation>& flags,
                                         int gap_merge = 2, int min_duration_frames = 1);

struct DurationHistogram {
  double bin_width_s = 1.0;
  std::vector<long long> counts;  // bin k covers (k*w, (k+1)*w]
  long long total = 0;
};

DurationHistogram violation_durations(const std::vector<ViolationEvent>& events,
                                      double frame_rate, double bin_width_s = 1.0);

struct F1Result {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  long long tp = 0, fp = 0, fn = 0;
};

F1Result f1_score(long long tp, long long fp, long long fn);

}  // namespace ixe::analytics
