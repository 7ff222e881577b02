#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ixe/types.hpp"

namespace ixe::geometry {

/// 3x3 projective map between the image plane and the road plane.
/// Coefficients are stored row-major and normalized so m[2][2] == 1 whenever
/// |m[2][2]| > 1e-9. Construction rejects non-invertible matrices.
class Homography {
 public:
  static Homography identity();
  static Homography from_rows(const std::array<double, 9>& rows);
  static Homography scaling(double sx, double sy);
  static Homography translation(double dx, double dy);

  double at(int row, int col) const { return m_[row * 3 + col]; }
  const std::array<double, 9>& coeffs() const { return m_; }

  double determinant() const;
  Homography inverse() const;

  /// this ∘ inner: apply(p) == this->apply(inner.apply(p)).
  Homography compose(const Homography& inner) const;

  /// Projective application (hx·p)/w. Throws DegenerateProjection when the
  /// homogeneous coordinate w vanishes (|w| < 1e-12).
  Vec2 apply(Vec2 p) const;

 private:
  Homography() = default;
  void normalize();
  std::array<double, 9> m_{1, 0, 0, 0, 1, 0, 0, 0, 1};
};

/// Normalized direct linear transform from n >= 4 (pixel, world) pairs,
/// least squares for n > 4. Throws DegenerateConfiguration when the system
/// is rank deficient (e.g. three collinear pixel points).
Homography calibrate(const std::vector<std::pair<Vec2, Vec2>>& correspondences);

/// Region-of-interest bitmap; one entry per pixel, 1 = keep.
struct SceneMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;

  bool at(int x, int y) const { return bits[static_cast<size_t>(y) * width + x] != 0; }
  bool valid() const;

  static SceneMask filled(int width, int height, bool value = true);
};

/// Keep a detection box iff the ROI covers at least keep_threshold of the
/// box's pixels (pixel-center rule). Boxes are clipped to the frame first.
bool apply_mask(const SceneMask& mask, const PixelBox& box, double keep_threshold = 0.5);

/// Square crop window; defaults follow the 832x832 detector input cut from a
/// 1920x1080 frame.
struct CropSpec {
  int offset_x = 544;
  int offset_y = 124;
  int side = 832;
};

/// Pixel transform for a validated crop. Source pixels land at
/// source - offset; points outside [0, side) are out of view.
class CropTransform {
 public:
  CropTransform(int frame_w, int frame_h, CropSpec spec);  // throws SpecOutOfBounds

  std::optional<Vec2> apply(Vec2 source) const;
  Vec2 invert(Vec2 cropped) const { return {cropped.x + spec_.offset_x, cropped.y + spec_.offset_y}; }
  const CropSpec& spec() const { return spec_; }

  /// The same offset as a homography, for composing with calibrations.
  Homography as_homography() const;

 private:
  CropSpec spec_;
};

// Mask files are binary PGM (P5, maxval 255); pixel > 127 marks the ROI.
SceneMask load_mask_pgm(const std::string& path);
void save_mask_pgm(const SceneMask& mask, const std::string& path);

// Calibration files: one correspondence per line, "px py wx wy".
std::vector<std::pair<Vec2, Vec2>> load_correspondences(const std::string& path);

}  // namespace ixe::geometry
