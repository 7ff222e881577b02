#include "ixe/mota.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

#include "ixe/errors.hpp"
#include "ixe/hungarian.hpp"

namespace ixe::tracker {

namespace {
constexpr double kForbiddenCost = 1e6;
}

MotaResult evaluate_mota(const std::vector<detemu::TruthBox>& truths,
                         const std::vector<TrackedBox>& tracks, double iou_min) {
  if (truths.empty()) throw EmptyTruth("evaluate_mota: no ground truth");

  // Per frame, per class indices into the two streams.
  std::map<std::uint64_t, std::array<std::vector<size_t>, kNumClasses>> gt_frames;
  std::map<std::uint64_t, std::array<std::vector<size_t>, kNumClasses>> tr_frames;
  for (size_t i = 0; i < truths.size(); ++i) {
    const int ci = static_cast<int>(truths[i].cls);
    if (ci < kNumClasses) gt_frames[truths[i].frame_index][ci].push_back(i);
  }
  for (size_t i = 0; i < tracks.size(); ++i) {
    const int ci = static_cast<int>(tracks[i].cls);
    if (ci < kNumClasses) tr_frames[tracks[i].frame_index][ci].push_back(i);
  }

  MotaResult result;
  std::array<std::unordered_map<std::int64_t, int>, kNumClasses> last_match;

  for (const auto& [frame, gt_by_class] : gt_frames) {
    const auto tr_it = tr_frames.find(frame);
    for (int ci = 0; ci < kNumClasses; ++ci) {
      const auto& gts = gt_by_class[ci];
      if (!gts.empty()) result.has_truth[ci] = true;
      static const std::vector<size_t> kEmpty;
      const auto& trs = tr_it != tr_frames.end() ? tr_it->second[ci] : kEmpty;
      auto& counts = result.per_class[ci];
      counts.gt += static_cast<long long>(gts.size());

      std::vector<char> gt_done(gts.size(), 0), tr_done(trs.size(), 0);

      // Carry over last frame's correspondence when it still holds.
      for (size_t gi = 0; gi < gts.size(); ++gi) {
        const auto it = last_match[ci].find(truths[gts[gi]].truth_id);
        if (it == last_match[ci].end()) continue;
        for (size_t tj = 0; tj < trs.size(); ++tj) {
          if (tr_done[tj] || tracks[trs[tj]].track_id != it->second) continue;
          if (iou(truths[gts[gi]].box, tracks[trs[tj]].box) >= iou_min) {
            gt_done[gi] = 1;
            tr_done[tj] = 1;
          }
          break;
        }
      }

      // Hungarian over the remainder.
      std::vector<size_t> g_rest, t_rest;
      for (size_t gi = 0; gi < gts.size(); ++gi)
        if (!gt_done[gi]) g_rest.push_back(gi);
      for (size_t tj = 0; tj < trs.size(); ++tj)
        if (!tr_done[tj]) t_rest.push_back(tj);

      if (!g_rest.empty() && !t_rest.empty()) {
        std::vector<double> cost(g_rest.size() * t_rest.size());
        for (size_t a = 0; a < g_rest.size(); ++a) {
          for (size_t b = 0; b < t_rest.size(); ++b) {
            const double v = iou(truths[gts[g_rest[a]]].box, tracks[trs[t_rest[b]]].box);
            cost[a * t_rest.size() + b] = v >= iou_min ? 1.0 - v : kForbiddenCost;
          }
        }
        const Assignment sol = solve_assignment(cost, static_cast<int>(g_rest.size()),
                                                static_cast<int>(t_rest.size()));
        for (size_t a = 0; a < g_rest.size(); ++a) {
          const int b = sol.row_to_col[a];
          if (b < 0 || cost[a * t_rest.size() + b] >= kForbiddenCost / 2) continue;
          const std::int64_t gt_id = truths[gts[g_rest[a]]].truth_id;
          const int tr_id = tracks[trs[t_rest[static_cast<size_t>(b)]]].track_id;
          const auto prev = last_match[ci].find(gt_id);
          if (prev != last_match[ci].end() && prev->second != tr_id) counts.idsw += 1;
          last_match[ci][gt_id] = tr_id;
          gt_done[g_rest[a]] = 1;
          tr_done[t_rest[static_cast<size_t>(b)]] = 1;
        }
      }

      for (size_t gi = 0; gi < gts.size(); ++gi)
        if (!gt_done[gi]) counts.fn += 1;
      for (size_t tj = 0; tj < trs.size(); ++tj)
        if (!tr_done[tj]) counts.fp += 1;
    }

    // Track-only frames between truth frames would be missed by the loop
    // above; those frames contribute pure false positives.
  }

  // Frames that contain tracker output but no ground truth at all.
  for (const auto& [frame, tr_by_class] : tr_frames) {
    if (gt_frames.count(frame)) continue;
    for (int ci = 0; ci < kNumClasses; ++ci) {
      result.per_class[ci].fp += static_cast<long long>(tr_by_class[ci].size());
    }
  }

  return result;
}

}  // namespace ixe::tracker
