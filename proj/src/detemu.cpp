#include "ixe/detemu.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "ixe/errors.hpp"
#include "ixe/rng.hpp"

namespace ixe::detemu {

double miss_probability(const MissCurve& curve, double area_px) {
  const double slope = curve.area_slope > 1e-9 ? curve.area_slope : 1e-9;
  const double logistic = 1.0 / (1.0 + std::exp((area_px - curve.area_mid) / slope));
  return curve.floor_rate + (1.0 - curve.floor_rate) * logistic;
}

NoiseProfile NoiseProfile::zero_noise() {
  NoiseProfile p;
  for (auto& m : p.miss) m = MissCurve{0.0, -1e9, 1.0};  // miss ~ 0 for any area
  for (auto& c : p.confidence) c = ConfidenceModel{1.0, 0.0};
  p.fp_per_frame = 0.0;
  p.jitter_sigma = 0.0;
  p.confusion_ped_bike = 0.0;
  return p;
}

NoiseProfile NoiseProfile::defaults() {
  NoiseProfile p;
  p.miss[static_cast<int>(ObjectClass::pedestrian)] = MissCurve{0.08, 72.0, 20.0};
  p.miss[static_cast<int>(ObjectClass::vehicle)] = MissCurve{0.02, 320.0, 90.0};
  p.miss[static_cast<int>(ObjectClass::bicycle)] = MissCurve{0.10, 90.0, 30.0};
  p.confidence[static_cast<int>(ObjectClass::pedestrian)] = ConfidenceModel{0.52, 0.16};
  p.confidence[static_cast<int>(ObjectClass::vehicle)] = ConfidenceModel{0.42, 0.22};
  p.confidence[static_cast<int>(ObjectClass::bicycle)] = ConfidenceModel{0.48, 0.16};
  p.fp_per_frame = 0.6;
  p.fp_confidence = ConfidenceModel{0.35, 0.12};
  p.fp_box_side_px = 10.0;
  p.fp_box_side_sigma_px = 2.0;
  p.jitter_sigma = 0.03;
  p.confusion_ped_bike = 0.03;
  return p;
}

namespace {

double clamp01(double v) { return std::clamp(v, 0.01, 1.0); }

PixelBox clamp_to_frame(PixelBox b, int w, int h) {
  b.x_min = std::clamp(b.x_min, 0.0, static_cast<double>(w));
  b.x_max = std::clamp(b.x_max, 0.0, static_cast<double>(w));
  b.y_min = std::clamp(b.y_min, 0.0, static_cast<double>(h));
  b.y_max = std::clamp(b.y_max, 0.0, static_cast<double>(h));
  if (b.x_max - b.x_min < 0.5) b.x_max = std::min(static_cast<double>(w), b.x_min + 0.5);
  if (b.y_max - b.y_min < 0.5) b.y_max = std::min(static_cast<double>(h), b.y_min + 0.5);
  return b;
}

}  // namespace

std::vector<Detection> emulate(std::uint64_t frame_index, const std::vector<TruthBox>& boxes,
                               const NoiseProfile& profile, const geometry::SceneMask* mask,
                               int frame_w, int frame_h, std::uint64_t seed) {
  std::mt19937_64 rng = make_rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<Detection> out;
  out.reserve(boxes.size());
  for (const auto& tb : boxes) {
    const int ci = static_cast<int>(tb.cls);
    const double p_miss = miss_probability(profile.miss[ci], tb.box.area());
    if (uni(rng) < p_miss) continue;

    // Truth boxes pass through unclipped so a zero-noise profile is an exact
    // identity; only jittered boxes need their ordering restored.
    PixelBox b = tb.box;
    if (profile.jitter_sigma > 0.0) {
      const double sx = profile.jitter_sigma * tb.box.width();
      const double sy = profile.jitter_sigma * tb.box.height();
      b.x_min += gauss(rng) * sx;
      b.x_max += gauss(rng) * sx;
      b.y_min += gauss(rng) * sy;
      b.y_max += gauss(rng) * sy;
      if (b.x_min > b.x_max) std::swap(b.x_min, b.x_max);
      if (b.y_min > b.y_max) std::swap(b.y_min, b.y_max);
      if (b.x_max - b.x_min < 0.5) b.x_max = b.x_min + 0.5;
      if (b.y_max - b.y_min < 0.5) b.y_max = b.y_min + 0.5;
    }
    if (!b.valid()) continue;

    ObjectClass cls = tb.cls;
    if (profile.confusion_ped_bike > 0.0 &&
        (cls == ObjectClass::pedestrian || cls == ObjectClass::bicycle)) {
      if (uni(rng) < profile.confusion_ped_bike) {
        cls = cls == ObjectClass::pedestrian ? ObjectClass::bicycle : ObjectClass::pedestrian;
      }
    }

    const auto& cm = profile.confidence[ci];
    const double conf = clamp01(cm.mean + gauss(rng) * cm.sigma);
    out.push_back(Detection{frame_index, b, cls, conf, tb.truth_id});
  }

  if (profile.fp_per_frame > 0.0) {
    std::poisson_distribution<int> pois(profile.fp_per_frame);
    const int n_fp = pois(rng);
    for (int k = 0; k < n_fp; ++k) {
      double cx = 0.0, cy = 0.0;
      for (int attempt = 0; attempt < 100; ++attempt) {
        cx = uni(rng) * frame_w;
        cy = uni(rng) * frame_h;
        if (mask == nullptr) break;
        const int ix = std::clamp(static_cast<int>(cx), 0, mask->width - 1);
        const int iy = std::clamp(static_cast<int>(cy), 0, mask->height - 1);
        if (mask->at(ix, iy)) break;
      }
      const double w =
          std::max(2.0, profile.fp_box_side_px + gauss(rng) * profile.fp_box_side_sigma_px);
      const double h =
          std::max(2.0, profile.fp_box_side_px + gauss(rng) * profile.fp_box_side_sigma_px);
      PixelBox b{cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2};
      b = clamp_to_frame(b, frame_w, frame_h);
      if (!b.valid()) continue;
      const ObjectClass cls =
          uni(rng) < 0.85 ? ObjectClass::pedestrian : ObjectClass::bicycle;
      const double conf = clamp01(profile.fp_confidence.mean +
                                  gauss(rng) * profile.fp_confidence.sigma);
      out.push_back(Detection{frame_index, b, cls, conf, -1});
    }
  }
  return out;
}

ApResult evaluate_ap(const std::vector<Detection>& detections,
                     const std::vector<TruthBox>& truths, double iou_threshold) {
  if (truths.empty()) throw EmptyTruth("evaluate_ap: no ground-truth boxes");

  // Index truth boxes by (class, frame).
  std::array<std::unordered_map<std::uint64_t, std::vector<size_t>>, kNumClasses> by_frame;
  std::array<long long, kNumClasses> totals{};
  for (size_t i = 0; i < truths.size(); ++i) {
    const int ci = static_cast<int>(truths[i].cls);
    if (ci >= kNumClasses) continue;
    by_frame[ci][truths[i].frame_index].push_back(i);
    ++totals[ci];
  }

  ApResult result;
  std::vector<char> matched(truths.size(), 0);
  int classes_present = 0;
  double ap_sum = 0.0;

  for (int ci = 0; ci < kNumClasses; ++ci) {
    if (totals[ci] == 0) {
      result.has_truth[ci] = false;
      result.ap[ci] = 0.0;
      continue;
    }
    result.has_truth[ci] = true;
    ++classes_present;

    std::vector<size_t> det_idx;
    for (size_t i = 0; i < detections.size(); ++i) {
      if (static_cast<int>(detections[i].cls) == ci) det_idx.push_back(i);
    }
    std::sort(det_idx.begin(), det_idx.end(), [&](size_t a, size_t b) {
      if (detections[a].confidence != detections[b].confidence) {
        return detections[a].confidence > detections[b].confidence;
      }
      if (detections[a].frame_index != detections[b].frame_index) {
        return detections[a].frame_index < detections[b].frame_index;
      }
      return detections[a].box.x_min < detections[b].box.x_min;
    });

    std::vector<char> is_tp(det_idx.size(), 0);
    for (size_t k = 0; k < det_idx.size(); ++k) {
      const auto& det = detections[det_idx[k]];
      const auto it = by_frame[ci].find(det.frame_index);
      if (it == by_frame[ci].end()) continue;
      double best = iou_threshold;
      size_t best_t = truths.size();
      for (size_t ti : it->second) {
        if (matched[ti]) continue;
        const double v = iou(det.box, truths[ti].box);
        if (v >= best) {
          best = v;
          best_t = ti;
        }
      }
      if (best_t < truths.size()) {
        matched[best_t] = 1;
        is_tp[k] = 1;
      }
    }

    // All-point interpolation: running max of precision from the tail.
    const size_t n = det_idx.size();
    std::vector<double> precision(n), recall(n);
    long long tp = 0;
    for (size_t k = 0; k < n; ++k) {
      tp += is_tp[k];
      precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
      recall[k] = static_cast<double>(tp) / static_cast<double>(totals[ci]);
    }
    double ap = 0.0;
    double max_prec = 0.0;
    for (size_t k = n; k-- > 0;) {
      max_prec = std::max(max_prec, precision[k]);
      const double prev_recall = k > 0 ? recall[k - 1] : 0.0;
      if (is_tp[k]) ap += (recall[k] - prev_recall) * max_prec;
    }
    result.ap[ci] = ap;
    ap_sum += ap;
  }
  result.map = classes_present > 0 ? ap_sum / classes_present : 0.0;
  return result;
}

double LatencyModel::default_per_object_us(double base_us) {
  const double n = static_cast<double>(kSweepFrames);
  const double c_lo = static_cast<double>(kSweepLowCount);
  const double c_hi = static_cast<double>(kSweepHighCount);
  return 0.4 * n * base_us / (c_hi - 1.4 * c_lo);
}

double inference_latency(const LatencyModel& model, int object_count) {
  return model.base_us + model.per_object_us * static_cast<double>(object_count);
}

std::vector<int> density_count_profile(int frames, long long aggregate, std::uint64_t seed) {
  std::vector<int> counts(frames, 0);
  if (frames <= 0) return counts;
  const long long base = aggregate / frames;
  const long long rem = aggregate % frames;
  for (int f = 0; f < frames; ++f) {
    counts[f] = static_cast<int>(base + (f < rem ? 1 : 0));
  }
  // Sum-preserving shuffle: move one unit between random frame pairs.
  std::mt19937_64 rng = make_rng(seed);
  std::uniform_int_distribution<int> pick(0, frames - 1);
  for (int t = 0; t < frames * 2; ++t) {
    const int a = pick(rng);
    const int b = pick(rng);
    if (counts[a] > 0) {
      --counts[a];
      ++counts[b];
    }
  }
  return counts;
}

}  // namespace ixe::detemu
