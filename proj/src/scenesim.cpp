#include "ixe/scenesim.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "ixe/errors.hpp"
#include "ixe/rng.hpp"

namespace ixe::scenesim {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kLateralAccel = 2.0;  // m/s^2 comfort bound inside arcs

// Rotation taking the canonical north-entry geometry to each arm.
double arm_rotation(Arm arm) {
  switch (arm) {
    case Arm::north: return 0.0;
    case Arm::east: return -kPi / 2.0;
    case Arm::south: return kPi;
    case Arm::west: return kPi / 2.0;
  }
  return 0.0;
}

Vec2 rotate(Vec2 p, double phi) {
  const double c = std::cos(phi), s = std::sin(phi);
  return {p.x * c - p.y * s, p.x * s + p.y * c};
}

RouteSegment line_segment(Vec2 a, Vec2 b, double limit = 1e9) {
  RouteSegment seg;
  seg.is_arc = false;
  seg.a = a;
  seg.b = b;
  seg.speed_limit = limit;
  return seg;
}

RouteSegment arc_segment(Vec2 center, double radius, double ang0, double ang1) {
  RouteSegment seg;
  seg.is_arc = true;
  seg.center = center;
  seg.radius = radius;
  seg.ang0 = ang0;
  seg.ang1 = ang1;
  seg.speed_limit = std::sqrt(kLateralAccel * radius);
  return seg;
}

Route rotate_route(Route route, double phi) {
  for (auto& seg : route.segments) {
    if (seg.is_arc) {
      seg.center = rotate(seg.center, phi);
      seg.ang0 += phi;
      seg.ang1 += phi;
    } else {
      seg.a = rotate(seg.a, phi);
      seg.b = rotate(seg.b, phi);
    }
  }
  return route;
}

void finalize(Route& route) {
  route.total_length = 0.0;
  for (const auto& seg : route.segments) route.total_length += seg.length();
}

}  // namespace

const char* to_string(Arm a) {
  switch (a) {
    case Arm::north: return "N";
    case Arm::east: return "E";
    case Arm::south: return "S";
    case Arm::west: return "W";
  }
  return "?";
}

const char* to_string(Movement m) {
  switch (m) {
    case Movement::left: return "left";
    case Movement::right: return "right";
    case Movement::straight: return "straight";
    case Movement::u_turn: return "u_turn";
  }
  return "?";
}

Arm arm_from_string(const std::string& s) {
  if (s == "N" || s == "north") return Arm::north;
  if (s == "E" || s == "east") return Arm::east;
  if (s == "S" || s == "south") return Arm::south;
  if (s == "W" || s == "west") return Arm::west;
  throw Error("unknown arm: " + s);
}

Movement movement_for(Arm entry, Arm exit) {
  const int d = (static_cast<int>(exit) - static_cast<int>(entry) + 4) % 4;
  switch (d) {
    case 0: return Movement::u_turn;
    case 1: return Movement::left;
    case 2: return Movement::straight;
    default: return Movement::right;
  }
}

std::uint64_t SceneConfig::frame_period_us() const {
  return static_cast<std::uint64_t>(std::llround(1e6 / frame_rate));
}

std::uint64_t SceneConfig::total_frames() const {
  return static_cast<std::uint64_t>(std::llround(duration_s * frame_rate));
}

void SceneConfig::validate() const {
  if (frame_rate <= 0.0) throw InvalidConfig("scene: frame_rate must be positive");
  if (duration_s < 0.0) throw InvalidConfig("scene: duration must be non-negative");
  if (world_extent_m <= 2.0 * road_half_width_m) {
    throw InvalidConfig("scene: world extent must exceed the road width");
  }
  if (lane_offset_m <= 0.0 || lane_offset_m >= road_half_width_m) {
    throw InvalidConfig("scene: lane offset must lie inside the road half width");
  }
  if (rates.vehicles_per_min_per_arm < 0.0 || rates.pedestrian_events_per_min_per_arm < 0.0 ||
      rates.bicycles_per_min_per_arm < 0.0) {
    throw InvalidConfig("scene: spawn rates must be non-negative");
  }
  if (group_fraction < 0.0 || group_fraction > 1.0) {
    throw InvalidConfig("scene: group fraction must be in [0, 1]");
  }
  if (vehicle_speed_min <= 0 || vehicle_speed_min > vehicle_speed_max ||
      pedestrian_speed_min <= 0 || pedestrian_speed_min > pedestrian_speed_max ||
      bicycle_speed_min <= 0 || bicycle_speed_min > bicycle_speed_max) {
    throw InvalidConfig("scene: bad speed range");
  }
  if (vehicle_speed_max > 27.78) throw InvalidConfig("scene: vehicle speed above 100 km/h");
  if (pedestrian_speed_max > 3.0) throw InvalidConfig("scene: pedestrian speed above 3 m/s");
  if (p_left < 0 || p_right < 0 || p_u_turn < 0 || p_left + p_right + p_u_turn > 1.0) {
    throw InvalidConfig("scene: movement probabilities must sum to at most 1");
  }
}

ArmPolygons arm_polygons(const SceneConfig& cfg) {
  const double rh = cfg.road_half_width_m;
  const double e = cfg.world_extent_m / 2.0;
  auto rect = [](double x0, double y0, double x1, double y1) {
    return std::vector<Vec2>{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
  };
  ArmPolygons arms;
  arms.polys[static_cast<int>(Arm::north)] = rect(-rh, rh, rh, e);
  arms.polys[static_cast<int>(Arm::east)] = rect(rh, -rh, e, rh);
  arms.polys[static_cast<int>(Arm::south)] = rect(-rh, -e, rh, -rh);
  arms.polys[static_cast<int>(Arm::west)] = rect(-e, -rh, -rh, rh);
  return arms;
}

bool point_in_polygon(const std::vector<Vec2>& poly, Vec2 p) {
  // Ray cast, with boundary points treated as inside via epsilon.
  bool inside = false;
  const size_t n = poly.size();
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2 a = poly[j], b = poly[i];
    if ((b.y > p.y) != (a.y > p.y)) {
      const double x_cross = b.x + (p.y - b.y) / (a.y - b.y) * (a.x - b.x);
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

std::optional<Arm> arm_containing(const ArmPolygons& arms, Vec2 p) {
  for (int i = 0; i < 4; ++i) {
    if (point_in_polygon(arms.polys[i], p)) return static_cast<Arm>(i);
  }
  return std::nullopt;
}

double RouteSegment::length() const {
  if (!is_arc) return (b - a).norm();
  return std::abs(ang1 - ang0) * radius;
}

Vec2 RouteSegment::pos_at(double s) const {
  if (!is_arc) {
    const double len = length();
    const double t = len > 0 ? std::clamp(s / len, 0.0, 1.0) : 0.0;
    return {a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t};
  }
  const double t = std::clamp(s / length(), 0.0, 1.0);
  const double ang = ang0 + (ang1 - ang0) * t;
  return {center.x + radius * std::cos(ang), center.y + radius * std::sin(ang)};
}

Vec2 RouteSegment::dir_at(double s) const {
  if (!is_arc) {
    const Vec2 d = b - a;
    const double n = d.norm();
    return n > 0 ? Vec2{d.x / n, d.y / n} : Vec2{0, 1};
  }
  const double t = std::clamp(s / length(), 0.0, 1.0);
  const double ang = ang0 + (ang1 - ang0) * t;
  const double sign = ang1 >= ang0 ? 1.0 : -1.0;
  return {-sign * std::sin(ang), sign * std::cos(ang)};
}

Vec2 Route::pos(double s) const {
  double rem = std::clamp(s, 0.0, total_length);
  for (const auto& seg : segments) {
    const double len = seg.length();
    if (rem <= len || &seg == &segments.back()) return seg.pos_at(rem);
    rem -= len;
  }
  return segments.back().pos_at(segments.back().length());
}

Vec2 Route::dir(double s) const {
  double rem = std::clamp(s, 0.0, total_length);
  for (const auto& seg : segments) {
    const double len = seg.length();
    if (rem <= len || &seg == &segments.back()) return seg.dir_at(rem);
    rem -= len;
  }
  return segments.back().dir_at(segments.back().length());
}

double Route::limit_at(double s) const {
  double rem = std::clamp(s, 0.0, total_length);
  for (const auto& seg : segments) {
    const double len = seg.length();
    if (rem <= len || &seg == &segments.back()) return seg.speed_limit;
    rem -= len;
  }
  return 1e9;
}

double Route::allowed_speed(double s, double cruise, double accel_max) const {
  double allowed = std::min(cruise, limit_at(s));
  // Braking headroom: v^2 <= limit^2 + 2 a d for each upcoming segment start.
  double offset = 0.0;
  for (const auto& seg : segments) {
    const double len = seg.length();
    const double d = offset - s;
    if (d > 0.0 && seg.speed_limit < cruise) {
      const double v2 = seg.speed_limit * seg.speed_limit + 2.0 * accel_max * d;
      allowed = std::min(allowed, std::sqrt(v2));
    }
    offset += len;
  }
  return allowed;
}

Route make_lane_route(const SceneConfig& cfg, Arm entry, Movement m) {
  const double lo = cfg.lane_offset_m;
  const double e = cfg.world_extent_m / 2.0;
  Route route;
  switch (m) {
    case Movement::straight: {
      route.segments.push_back(line_segment({-lo, e}, {-lo, -e}));
      break;
    }
    case Movement::left: {
      const double r = 5.0;
      route.segments.push_back(line_segment({-lo, e}, {-lo, -lo + r}));
      route.segments.push_back(arc_segment({-lo + r, -lo + r}, r, kPi, 1.5 * kPi));
      route.segments.push_back(line_segment({-lo + r, -lo}, {e, -lo}));
      break;
    }
    case Movement::right: {
      const double r = 3.0;
      route.segments.push_back(line_segment({-lo, e}, {-lo, lo + r}));
      route.segments.push_back(arc_segment({-lo - r, lo + r}, r, 0.0, -kPi / 2.0));
      route.segments.push_back(line_segment({-lo - r, lo}, {-e, lo}));
      break;
    }
    case Movement::u_turn: {
      const double yu = 2.0;
      route.segments.push_back(line_segment({-lo, e}, {-lo, yu}));
      route.segments.push_back(arc_segment({0.0, yu}, lo, kPi, 2.0 * kPi));
      route.segments.push_back(line_segment({lo, yu}, {lo, e}));
      break;
    }
  }
  Route rotated = rotate_route(std::move(route), arm_rotation(entry));
  finalize(rotated);
  return rotated;
}

Route make_crosswalk_route(const SceneConfig& cfg, Arm arm, bool from_left, double lateral) {
  const double rh = cfg.road_half_width_m;
  const double reach = rh + 1.5;
  const double yc = rh + 2.0 + lateral;
  Vec2 a{-reach, yc}, b{reach, yc};
  if (!from_left) std::swap(a, b);
  Route route;
  route.segments.push_back(line_segment(a, b));
  Route rotated = rotate_route(std::move(route), arm_rotation(arm));
  finalize(rotated);
  return rotated;
}

Movement truth_turn_label(const ObjectRoute& route) {
  if (!route.lane_traffic || !route.entry.has_value() || !route.exit.has_value() ||
      !route.completed) {
    throw IncompleteRoute("turn label: object " + std::to_string(route.object_id) +
                          " has no completed arm-to-arm route");
  }
  return movement_for(*route.entry, *route.exit);
}

SceneSimulator::SceneSimulator(SceneConfig cfg) : cfg_(cfg), rng_(make_rng(cfg.seed)) {
  cfg_.validate();
}

std::uint64_t SceneSimulator::frames_remaining() const {
  return cfg_.total_frames() - frame_;
}

void SceneSimulator::spawn_vehicle_like(ObjectClass cls, Arm arm) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double mv = uni(rng_);
  Movement m = Movement::straight;
  if (mv < cfg_.p_left) {
    m = Movement::left;
  } else if (mv < cfg_.p_left + cfg_.p_right) {
    m = Movement::right;
  } else if (mv < cfg_.p_left + cfg_.p_right + cfg_.p_u_turn) {
    m = Movement::u_turn;
  }

  ActiveObject obj;
  obj.id = next_id_++;
  obj.cls = cls;
  obj.route = make_lane_route(cfg_, arm, m);
  if (cls == ObjectClass::vehicle) {
    std::uniform_real_distribution<double> spd(cfg_.vehicle_speed_min, cfg_.vehicle_speed_max);
    obj.cruise = spd(rng_);
    std::uniform_real_distribution<double> len(4.1, 5.0);
    std::uniform_real_distribution<double> wid(1.7, 1.9);
    obj.length = len(rng_);
    obj.width = wid(rng_);
  } else {
    std::uniform_real_distribution<double> spd(cfg_.bicycle_speed_min, cfg_.bicycle_speed_max);
    obj.cruise = spd(rng_);
    obj.length = 1.7;
    obj.width = 0.6;
  }
  obj.accel_max = cfg_.accel_max_vehicle;
  obj.speed = std::min(obj.cruise, obj.route.allowed_speed(0.0, obj.cruise, obj.accel_max));
  obj.s = 0.0;

  ObjectRoute rec;
  rec.object_id = obj.id;
  rec.cls = cls;
  rec.lane_traffic = true;
  rec.entry = arm;
  const int exit = (static_cast<int>(arm) +
                    (m == Movement::u_turn ? 0 : m == Movement::left ? 1 : m == Movement::straight ? 2 : 3)) % 4;
  rec.exit = static_cast<Arm>(exit);
  rec.spawn_frame = frame_;
  obj.route_index = routes_.size();
  routes_.push_back(rec);
  active_.push_back(std::move(obj));
}

void SceneSimulator::spawn_pedestrian_event(Arm arm) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const bool from_left = uni(rng_) < 0.5;
  const bool pair = uni(rng_) < cfg_.group_fraction;
  std::uniform_real_distribution<double> spd(cfg_.pedestrian_speed_min, cfg_.pedestrian_speed_max);
  const double speed = spd(rng_);
  std::uniform_real_distribution<double> lat(-1.0, pair ? 0.3 : 1.0);
  const double lateral = lat(rng_);
  const std::uint64_t group = pair ? next_group_++ : 0;

  const int members = pair ? 2 : 1;
  for (int k = 0; k < members; ++k) {
    ActiveObject obj;
    obj.id = next_id_++;
    obj.cls = ObjectClass::pedestrian;
    obj.route = make_crosswalk_route(cfg_, arm, from_left, lateral + 0.7 * k);
    obj.cruise = speed;
    obj.speed = speed;
    obj.accel_max = cfg_.accel_max_pedestrian;
    obj.length = 0.5;
    obj.width = 0.5;
    obj.group_id = group;
    obj.s = 0.0;

    ObjectRoute rec;
    rec.object_id = obj.id;
    rec.cls = ObjectClass::pedestrian;
    rec.lane_traffic = false;
    rec.spawn_frame = frame_;
    obj.route_index = routes_.size();
    routes_.push_back(rec);
    active_.push_back(std::move(obj));
  }
}

void SceneSimulator::spawn_for_frame() {
  const double per_frame = 1.0 / (60.0 * cfg_.frame_rate);
  const std::array<Arm, 4> arms{Arm::north, Arm::east, Arm::south, Arm::west};

  if (cfg_.rates.vehicles_per_min_per_arm > 0.0) {
    std::poisson_distribution<int> pois(cfg_.rates.vehicles_per_min_per_arm * per_frame);
    for (Arm arm : arms) {
      const int n = pois(rng_);
      for (int i = 0; i < n; ++i) spawn_vehicle_like(ObjectClass::vehicle, arm);
    }
  }
  if (cfg_.rates.bicycles_per_min_per_arm > 0.0) {
    std::poisson_distribution<int> pois(cfg_.rates.bicycles_per_min_per_arm * per_frame);
    for (Arm arm : arms) {
      const int n = pois(rng_);
      for (int i = 0; i < n; ++i) spawn_vehicle_like(ObjectClass::bicycle, arm);
    }
  }
  if (cfg_.rates.pedestrian_events_per_min_per_arm > 0.0) {
    std::poisson_distribution<int> pois(cfg_.rates.pedestrian_events_per_min_per_arm * per_frame);
    for (Arm arm : arms) {
      const int n = pois(rng_);
      for (int i = 0; i < n; ++i) spawn_pedestrian_event(arm);
    }
  }
}

FrameTruth SceneSimulator::next() {
  const double dt = 1.0 / cfg_.frame_rate;

  spawn_for_frame();

  FrameTruth frame;
  frame.frame_index = frame_;
  frame.timestamp_us = frame_ * cfg_.frame_period_us();
  frame.objects.reserve(active_.size());

  std::vector<ActiveObject> survivors;
  survivors.reserve(active_.size());
  for (auto& obj : active_) {
    // Speed tracking with bounded acceleration, then advance along the route.
    const double target = obj.route.allowed_speed(obj.s, obj.cruise, obj.accel_max);
    const double dv = std::clamp(target - obj.speed, -obj.accel_max * dt, obj.accel_max * dt);
    obj.speed += dv;
    obj.s += obj.speed * dt;

    if (obj.s >= obj.route.total_length) {
      routes_[obj.route_index].completed = true;
      continue;
    }

    GroundTruthObject g;
    g.id = obj.id;
    g.cls = obj.cls;
    g.pos = obj.route.pos(obj.s);
    const Vec2 d = obj.route.dir(obj.s);
    g.vel = d * obj.speed;
    g.length = obj.length;
    g.width = obj.width;
    g.group_id = obj.group_id;
    frame.objects.push_back(g);
    survivors.push_back(std::move(obj));
  }
  active_ = std::move(survivors);
  ++frame_;
  return frame;
}

std::vector<FrameTruth> generate(const SceneConfig& cfg) {
  SceneSimulator sim(cfg);
  std::vector<FrameTruth> frames;
  frames.reserve(cfg.total_frames());
  while (!sim.done()) frames.push_back(sim.next());
  return frames;
}

std::vector<detemu::TruthBox> project_to_pixels(const FrameTruth& frame,
                                                const geometry::Homography& world_to_pixel,
                                                int frame_w, int frame_h) {
  std::vector<detemu::TruthBox> out;
  out.reserve(frame.objects.size());
  for (const auto& obj : frame.objects) {
    Vec2 heading = obj.vel;
    const double n = heading.norm();
    heading = n > 1e-9 ? Vec2{heading.x / n, heading.y / n} : Vec2{0, 1};
    const Vec2 perp{-heading.y, heading.x};
    const Vec2 half_l = heading * (obj.length / 2.0);
    const Vec2 half_w = perp * (obj.width / 2.0);

    PixelBox box{1e18, 1e18, -1e18, -1e18};
    for (int sx = -1; sx <= 1; sx += 2) {
      for (int sy = -1; sy <= 1; sy += 2) {
        const Vec2 corner = obj.pos + half_l * sx + half_w * sy;
        const Vec2 px = world_to_pixel.apply(corner);
        box.x_min = std::min(box.x_min, px.x);
        box.x_max = std::max(box.x_max, px.x);
        box.y_min = std::min(box.y_min, px.y);
        box.y_max = std::max(box.y_max, px.y);
      }
    }
    if (box.x_max <= 0 || box.y_max <= 0 || box.x_min >= frame_w || box.y_min >= frame_h) {
      continue;  // fully outside
    }
    out.push_back(detemu::TruthBox{frame.frame_index, static_cast<std::int64_t>(obj.id), box,
                                   obj.cls});
  }
  return out;
}

std::vector<anonymize::SensitiveRegion> sensitive_regions(
    const FrameTruth& frame, const geometry::Homography& world_to_pixel, int frame_w, int frame_h,
    double identifiable_min_area_px) {
  std::vector<anonymize::SensitiveRegion> out;
  const auto boxes = project_to_pixels(frame, world_to_pixel, frame_w, frame_h);

  std::map<std::uint64_t, const GroundTruthObject*> by_id;
  for (const auto& obj : frame.objects) by_id[obj.id] = &obj;

  for (const auto& tb : boxes) {
    anonymize::SensitiveRegion region;
    region.frame_index = frame.frame_index;
    region.region_id = tb.truth_id;

    if (tb.cls == ObjectClass::pedestrian) {
      region.kind = anonymize::RegionKind::face;
      const double h = tb.box.height() / 7.0;
      const double w = tb.box.width() * 0.5;
      const double cx = (tb.box.x_min + tb.box.x_max) / 2.0;
      region.box = PixelBox{cx - w / 2.0, tb.box.y_min, cx + w / 2.0, tb.box.y_min + h};
    } else if (tb.cls == ObjectClass::vehicle) {
      region.kind = anonymize::RegionKind::license_plate;
      const auto it = by_id.find(static_cast<std::uint64_t>(tb.truth_id));
      if (it == by_id.end()) continue;
      const GroundTruthObject& obj = *it->second;
      Vec2 heading = obj.vel;
      const double n = heading.norm();
      heading = n > 1e-9 ? Vec2{heading.x / n, heading.y / n} : Vec2{0, 1};
      const Vec2 perp{-heading.y, heading.x};
      const Vec2 rear = obj.pos - heading * (obj.length / 2.0);
      PixelBox box{1e18, 1e18, -1e18, -1e18};
      for (int sx = -1; sx <= 1; sx += 2) {
        for (int sy = -1; sy <= 1; sy += 2) {
          const Vec2 corner = rear + heading * (0.125 * sx) + perp * (0.30 * sy);
          const Vec2 px = world_to_pixel.apply(corner);
          box.x_min = std::min(box.x_min, px.x);
          box.x_max = std::max(box.x_max, px.x);
          box.y_min = std::min(box.y_min, px.y);
          box.y_max = std::max(box.y_max, px.y);
        }
      }
      region.box = box;
    } else {
      continue;  // bicycles carry neither faces-at-scale nor plates here
    }

    region.area_px = anonymize::rasterized_area(region.box, frame_w, frame_h);
    if (region.area_px <= 0) continue;
    region.identifiable = static_cast<double>(region.area_px) >= identifiable_min_area_px;
    out.push_back(region);
  }
  return out;
}

}  // namespace ixe::scenesim
