#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "ixe/geometry.hpp"
#include "ixe/types.hpp"

namespace ixe::detemu {

struct Detection {
  std::uint64_t frame_index = 0;
  PixelBox box;
  ObjectClass cls = ObjectClass::pedestrian;
  double confidence = 1.0;
  std::int64_t truth_id = -1;  // simulator-only provenance; never fed to the tracker
};

/// One ground-truth pixel box, as produced by the scene projection.
struct TruthBox {
  std::uint64_t frame_index = 0;
  std::int64_t truth_id = 0;
  PixelBox box;
  ObjectClass cls = ObjectClass::pedestrian;
};

/// Miss rate as a logistic in box pixel area: floor_rate for large boxes,
/// rising toward 1 as the area shrinks through area_mid.
struct MissCurve {
  double floor_rate = 0.0;
  double area_mid = 0.0;
  double area_slope = 1.0;
};

double miss_probability(const MissCurve& curve, double area_px);

struct ConfidenceModel {
  double mean = 1.0;
  double sigma = 0.0;
};

struct NoiseProfile {
  std::array<MissCurve, kNumClasses> miss{};
  std::array<ConfidenceModel, kNumClasses> confidence{};
  double fp_per_frame = 0.0;  // Poisson mean per frame
  ConfidenceModel fp_confidence{0.35, 0.12};
  double fp_box_side_px = 10.0;
  double fp_box_side_sigma_px = 2.0;
  double jitter_sigma = 0.0;  // Gaussian sigma as a fraction of box side, per edge
  double confusion_ped_bike = 0.0;

  /// Pass-through profile: detections equal truth boxes at confidence 1.
  static NoiseProfile zero_noise();
  /// Profile tuned so the emulated detector lands in the published AP bands
  /// (pedestrian ~0.66, vehicle ~0.975 at IoU 0.5) on the default scene.
  static NoiseProfile defaults();
};

/// Emulate one frame of an imperfect detector: size-dependent misses, box
/// jitter, pedestrian/bicycle confusion, and Poisson false positives placed
/// at mask-valid locations. Deterministic for fixed (inputs, seed).
std::vector<Detection> emulate(std::uint64_t frame_index, const std::vector<TruthBox>& boxes,
                               const NoiseProfile& profile, const geometry::SceneMask* mask,
                               int frame_w, int frame_h, std::uint64_t seed);

struct ApResult {
  std::array<double, kNumClasses> ap{};
  std::array<bool, kNumClasses> has_truth{};
  double map = 0.0;  // unweighted mean over classes present in the truth
};

/// All-point interpolated average precision with greedy confidence-ordered
/// matching (one match per truth box). Throws EmptyTruth when no truth exists.
ApResult evaluate_ap(const std::vector<Detection>& detections,
                     const std::vector<TruthBox>& truths, double iou_threshold = 0.5);

/// Per-frame inference latency, linear in the number of detected objects.
struct LatencyModel {
  double base_us = kTableBaseUs;
  double per_object_us = default_per_object_us(kTableBaseUs);

  /// 1e6 / 34.99 fps, the published single-image detector pass.
  static constexpr double kTableBaseUs = 28580.0;

  /// Slope that makes the high-density sweep cost exactly 1.40x the
  /// low-density sweep: solving N*b + p*C_hi = 1.4*(N*b + p*C_lo) for p
  /// with the sweep constants below gives p = 0.4*N*b / (C_hi - 1.4*C_lo).
  static double default_per_object_us(double base_us);
};

// The density sweep mirrors ten 90 s clips at 30 fps whose aggregate
// object-frame counts span 4,000 to 26,000.
inline constexpr int kSweepFrames = 2700;
inline constexpr long long kSweepLowCount = 4000;
inline constexpr long long kSweepHighCount = 26000;

double inference_latency(const LatencyModel& model, int object_count);

/// Deterministic per-frame object counts summing to exactly `aggregate`,
/// lightly shuffled (sum-preserving) so the profile is not flat.
std::vector<int> density_count_profile(int frames, long long aggregate, std::uint64_t seed);

}  // namespace ixe::detemu
