#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ixe/detemu.hpp"
#include "ixe/types.hpp"

namespace ixe::anonymize {

/// 8-bit grayscale frame, row-major.
struct FrameBuffer {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  static FrameBuffer filled(int w, int h, std::uint8_t value);
  std::uint8_t at(int x, int y) const { return pixels[static_cast<size_t>(y) * width + x]; }
  void set(int x, int y, std::uint8_t v) { pixels[static_cast<size_t>(y) * width + x] = v; }
};

FrameBuffer load_frame_pgm(const std::string& path);
void save_frame_pgm(const FrameBuffer& frame, const std::string& path);

enum class RegionKind { face = 0, license_plate = 1 };
const char* to_string(RegionKind k);

struct SensitiveRegion {
  std::uint64_t frame_index = 0;
  std::int64_t region_id = 0;
  RegionKind kind = RegionKind::face;
  PixelBox box;
  bool identifiable = false;  // simulator proxy for "large enough to identify"
  long long area_px = 0;      // rasterized pixel count, clipped to the frame
};

/// Rasterized pixel count of a box clipped to the frame (pixel-center rule).
long long rasterized_area(const PixelBox& box, int frame_w, int frame_h);

struct BlurResult {
  FrameBuffer frame;
  int clipped_regions = 0;  // regions that had to be clipped to the frame
};

/// Box-filter blur inside each region; the kernel window is clamped to the
/// region, pixels outside the regions are untouched bit-exactly. Regions
/// reaching past the frame are clipped and counted. Kernel must be odd >= 3.
BlurResult blur_regions(const FrameBuffer& frame, const std::vector<PixelBox>& regions,
                        int kernel = 15);

struct KindTally {
  long long total = 0;
  long long eligible = 0;       // area_px >= area_floor
  long long identifiable = 0;
  long long anonymized_eligible = 0;
  long long anonymized_identifiable = 0;
  double visible_recall() const {
    return identifiable > 0
               ? static_cast<double>(anonymized_identifiable) / static_cast<double>(identifiable)
               : 1.0;
  }
  double total_recall() const {
    return eligible > 0
               ? static_cast<double>(anonymized_eligible) / static_cast<double>(eligible)
               : 1.0;
  }
};

struct RecallReport {
  KindTally face;
  KindTally plate;
  const KindTally& of(RegionKind k) const {
    return k == RegionKind::face ? face : plate;
  }
};

/// Coverage-based recall for one frame: a region counts as anonymized iff the
/// blurred boxes cover at least coverage_min of its rasterized pixels (the
/// complement of the quarter-exposed miss rule). visible recall runs over
/// identifiable regions, total recall over regions with area >= area_floor_px.
RecallReport evaluate_recall(const std::vector<PixelBox>& blurred,
                             const std::vector<SensitiveRegion>& truth, int frame_w, int frame_h,
                             long long area_floor_px = 100, double coverage_min = 0.75);

/// Multi-frame accumulation of the same protocol.
class RecallAccumulator {
 public:
  RecallAccumulator(long long area_floor_px = 100, double coverage_min = 0.75)
      : floor_(area_floor_px), coverage_(coverage_min) {}
  void add_frame(const std::vector<PixelBox>& blurred, const std::vector<SensitiveRegion>& truth,
                 int frame_w, int frame_h);
  const RecallReport& report() const { return report_; }

 private:
  long long floor_;
  double coverage_;
  RecallReport report_;
};

/// Emulated face/plate detector feeding the blur stage: area-dependent
/// misses and box jitter on the truth regions, plus a dilation margin on the
/// surviving boxes. Deterministic per (inputs, seed).
struct RegionNoise {
  detemu::MissCurve miss_face{0.01, 60.0, 25.0};
  detemu::MissCurve miss_plate{0.02, 70.0, 25.0};
  double jitter_sigma = 0.04;  // fraction of box side per edge
  double dilate_px = 2.0;
};

std::vector<PixelBox> emulate_blur_boxes(const std::vector<SensitiveRegion>& regions,
                                         const RegionNoise& noise, std::uint64_t seed);

}  // namespace ixe::anonymize
