#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "ixe/detemu.hpp"
#include "ixe/types.hpp"

namespace ixe::tracker {

struct TrackedBox {
  std::uint64_t frame_index = 0;
  int track_id = 0;
  ObjectClass cls = ObjectClass::pedestrian;
  PixelBox box;
};

struct MotaCounts {
  long long fn = 0;
  long long fp = 0;
  long long idsw = 0;
  long long gt = 0;
  double mota() const {
    return gt > 0 ? 1.0 - static_cast<double>(fn + fp + idsw) / static_cast<double>(gt) : 1.0;
  }
};

struct MotaResult {
  std::array<MotaCounts, kNumClasses> per_class{};
  std::array<bool, kNumClasses> has_truth{};
};

/// CLEAR-MOT accounting per class: frame-wise Hungarian matching at IoU >= iou_min,
/// carrying matches from prior frames forward before re-matching.
/// Throws EmptyTruth when the ground truth is empty.
MotaResult evaluate_mota(const std::vector<detemu::TruthBox>& truths,
                         const std::vector<TrackedBox>& tracks, double iou_min = 0.5);

}  // namespace ixe::tracker
