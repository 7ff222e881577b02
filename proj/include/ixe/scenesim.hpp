#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "ixe/anonymize.hpp"
#include "ixe/detemu.hpp"
#include "ixe/geometry.hpp"
#include "ixe/types.hpp"

namespace ixe::scenesim {

enum class Arm { north = 0, east = 1, south = 2, west = 3 };
enum class Movement { left = 0, right = 1, straight = 2, u_turn = 3 };

const char* to_string(Arm a);
const char* to_string(Movement m);
Arm arm_from_string(const std::string& s);

/// Movement implied by an (entry, exit) arm pair; same arm means u-turn.
Movement movement_for(Arm entry, Arm exit);

struct GroundTruthObject {
  std::uint64_t id = 0;
  ObjectClass cls = ObjectClass::pedestrian;
  Vec2 pos;     // world meters, x east / y north, origin at intersection center
  Vec2 vel;     // world m/s
  double length = 0.5;  // footprint along heading
  double width = 0.5;
  std::uint64_t group_id = 0;  // shared by co-walking pedestrians, 0 = none
};

struct FrameTruth {
  std::uint64_t frame_index = 0;
  std::uint64_t timestamp_us = 0;
  std::vector<GroundTruthObject> objects;
};

struct SpawnRates {
  double vehicles_per_min_per_arm = 14.0;
  double pedestrian_events_per_min_per_arm = 14.0;  // an event may be a pair
  double bicycles_per_min_per_arm = 4.0;
};

struct SceneConfig {
  double frame_rate = 30.0;
  double duration_s = 600.0;
  double world_extent_m = 40.0;  // full side of the square road patch
  double road_half_width_m = 7.0;
  double lane_offset_m = 1.75;
  SpawnRates rates;
  double group_fraction = 0.25;
  std::uint64_t seed = 1;

  double vehicle_speed_min = 2.5, vehicle_speed_max = 8.0;    // m/s
  double pedestrian_speed_min = 0.9, pedestrian_speed_max = 1.8;
  double bicycle_speed_min = 3.0, bicycle_speed_max = 5.5;

  double p_left = 0.18, p_right = 0.22, p_u_turn = 0.03;  // remainder straight

  double accel_max_vehicle = 3.0;     // m/s^2 bound, also used for bicycles
  double accel_max_pedestrian = 1.5;

  std::uint64_t frame_period_us() const;
  std::uint64_t total_frames() const;
  void validate() const;  // throws InvalidConfig
};

/// Entry/exit polygons for the four road arms, derived from the config.
struct ArmPolygons {
  std::array<std::vector<Vec2>, 4> polys;
};
ArmPolygons arm_polygons(const SceneConfig& cfg);
bool point_in_polygon(const std::vector<Vec2>& poly, Vec2 p);
std::optional<Arm> arm_containing(const ArmPolygons& arms, Vec2 p);

/// Straight lines plus circular arcs; s is arc length from the start.
struct RouteSegment {
  bool is_arc = false;
  Vec2 a, b;                  // line endpoints
  Vec2 center;                // arc
  double radius = 0.0;
  double ang0 = 0.0, ang1 = 0.0;  // radians; ang1 > ang0 means counterclockwise
  double speed_limit = 1e9;   // m/s cap while on this segment
  double length() const;
  Vec2 pos_at(double s) const;
  Vec2 dir_at(double s) const;
};

struct Route {
  std::vector<RouteSegment> segments;
  double total_length = 0.0;
  Vec2 pos(double s) const;
  Vec2 dir(double s) const;
  double limit_at(double s) const;
  /// Maximum speed admissible at s such that every upcoming segment limit can
  /// still be met with decelerations within accel_max.
  double allowed_speed(double s, double cruise, double accel_max) const;
};

/// Lane route for vehicles/bicycles entering at `entry` with movement `m`.
Route make_lane_route(const SceneConfig& cfg, Arm entry, Movement m);

/// Crosswalk route across the road of arm `arm`; `from_left` picks the end,
/// `lateral` shifts within the crosswalk band.
Route make_crosswalk_route(const SceneConfig& cfg, Arm arm, bool from_left, double lateral);

/// Spawn/route record kept for every object, for truth labels and counting.
struct ObjectRoute {
  std::uint64_t object_id = 0;
  ObjectClass cls = ObjectClass::pedestrian;
  bool lane_traffic = false;  // vehicles and bicycles
  std::optional<Arm> entry;
  std::optional<Arm> exit;
  bool completed = false;  // object left the scene during the run
  std::uint64_t spawn_frame = 0;
};

/// Turn label from the route record. Throws IncompleteRoute for objects that
/// never exited or that are not lane traffic.
Movement truth_turn_label(const ObjectRoute& route);

/// Deterministic, seeded scene generator. next() yields consecutive frames.
class SceneSimulator {
 public:
  explicit SceneSimulator(SceneConfig cfg);

  FrameTruth next();
  bool done() const { return frame_ >= cfg_.total_frames(); }
  std::uint64_t frames_remaining() const;

  const SceneConfig& config() const { return cfg_; }
  const std::vector<ObjectRoute>& routes() const { return routes_; }

 private:
  struct ActiveObject {
    std::uint64_t id = 0;
    ObjectClass cls = ObjectClass::pedestrian;
    Route route;
    double s = 0.0;
    double speed = 0.0;
    double cruise = 0.0;
    double accel_max = 0.0;
    double length = 0.5, width = 0.5;
    std::uint64_t group_id = 0;
    size_t route_index = 0;  // into routes_
  };

  void spawn_for_frame();
  void spawn_vehicle_like(ObjectClass cls, Arm arm);
  void spawn_pedestrian_event(Arm arm);

  SceneConfig cfg_;
  std::uint64_t frame_ = 0;
  std::uint64_t next_id_ = 1;
  std::uint64_t next_group_ = 1;
  std::mt19937_64 rng_;
  std::vector<ActiveObject> active_;
  std::vector<ObjectRoute> routes_;
};

/// Convenience wrapper generating the full run.
std::vector<FrameTruth> generate(const SceneConfig& cfg);

/// Axis-aligned pixel bound of the oriented footprint corners. Objects whose
/// bound lies fully outside the frame are omitted; partial bounds are kept
/// unclipped. Throws DegenerateProjection via the homography.
std::vector<detemu::TruthBox> project_to_pixels(const FrameTruth& frame,
                                                const geometry::Homography& world_to_pixel,
                                                int frame_w, int frame_h);

/// Synthetic face/plate ground truth for the anonymization protocol: a face
/// strip across the top 1/7 of each pedestrian box and a plate patch at each
/// vehicle's rear edge. A region is flagged identifiable when its rasterized
/// area reaches identifiable_min_area_px.
std::vector<anonymize::SensitiveRegion> sensitive_regions(
    const FrameTruth& frame, const geometry::Homography& world_to_pixel, int frame_w, int frame_h,
    double identifiable_min_area_px = 100.0);

}  // namespace ixe::scenesim
