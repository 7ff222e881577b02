#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

namespace ixe {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double norm() const { return std::hypot(x, y); }
};

/// Axis-aligned pixel box, [x_min, x_max) x [y_min, y_max).
struct PixelBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return std::max(0.0, width()) * std::max(0.0, height()); }
  bool valid() const { return x_min < x_max && y_min < y_max; }
  Vec2 center() const { return {(x_min + x_max) * 0.5, (y_min + y_max) * 0.5}; }
};

inline double iou(const PixelBox& a, const PixelBox& b) {
  const double ix = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double iy = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (ix <= 0.0 || iy <= 0.0) return 0.0;
  const double inter = ix * iy;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

enum class ObjectClass : std::uint8_t {
  pedestrian = 0,
  vehicle = 1,
  bicycle = 2,
  other = 3,
};

inline constexpr int kNumClasses = 3;  // tracked classes; `other` is wire-only

const char* to_string(ObjectClass c);
ObjectClass object_class_from_string(const std::string& s);

}  // namespace ixe
