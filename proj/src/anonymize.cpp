#include "ixe/anonymize.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "ixe/errors.hpp"
#include "ixe/rng.hpp"

namespace ixe::anonymize {

namespace {

struct IntRect {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // [x0, x1) x [y0, y1)
  bool empty() const { return x0 >= x1 || y0 >= y1; }
  long long area() const { return empty() ? 0 : static_cast<long long>(x1 - x0) * (y1 - y0); }
};

// Pixel-center rasterization of a real-valued box, clipped to the frame.
IntRect rasterize(const PixelBox& box, int frame_w, int frame_h) {
  IntRect r;
  r.x0 = std::max(0, static_cast<int>(std::floor(box.x_min + 0.5)));
  r.y0 = std::max(0, static_cast<int>(std::floor(box.y_min + 0.5)));
  r.x1 = std::min(frame_w, static_cast<int>(std::ceil(box.x_max - 0.5)));
  r.y1 = std::min(frame_h, static_cast<int>(std::ceil(box.y_max - 0.5)));
  return r;
}

}  // namespace

FrameBuffer FrameBuffer::filled(int w, int h, std::uint8_t value) {
  FrameBuffer f;
  f.width = w;
  f.height = h;
  f.pixels.assign(static_cast<size_t>(w) * h, value);
  return f;
}

FrameBuffer load_frame_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("frame: cannot open " + path);
  std::string magic;
  in >> magic;
  if (magic != "P5") throw Error("frame: not a P5 PGM: " + path);
  int w, h, maxval;
  in >> w >> h >> maxval;
  if (maxval != 255) throw Error("frame: expected maxval 255: " + path);
  in.get();
  FrameBuffer f = FrameBuffer::filled(w, h, 0);
  in.read(reinterpret_cast<char*>(f.pixels.data()),
          static_cast<std::streamsize>(f.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(f.pixels.size())) {
    throw Error("frame: truncated PGM payload: " + path);
  }
  return f;
}

void save_frame_pgm(const FrameBuffer& frame, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("frame: cannot write " + path);
  out << "P5\n" << frame.width << " " << frame.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(frame.pixels.data()),
            static_cast<std::streamsize>(frame.pixels.size()));
}

const char* to_string(RegionKind k) {
  return k == RegionKind::face ? "face" : "license_plate";
}

long long rasterized_area(const PixelBox& box, int frame_w, int frame_h) {
  return rasterize(box, frame_w, frame_h).area();
}

BlurResult blur_regions(const FrameBuffer& frame, const std::vector<PixelBox>& regions,
                        int kernel) {
  if (kernel < 3 || kernel % 2 == 0) {
    throw InvalidConfig("blur: kernel must be an odd integer >= 3");
  }
  BlurResult result;
  result.frame = frame;
  const int half = kernel / 2;

  for (const auto& region : regions) {
    const IntRect r = rasterize(region, frame.width, frame.height);
    if (region.x_min < 0 || region.y_min < 0 || region.x_max > frame.width ||
        region.y_max > frame.height) {
      result.clipped_regions += 1;
    }
    if (r.empty()) continue;

    const int rw = r.x1 - r.x0;
    const int rh = r.y1 - r.y0;
    // Integral image over the region read from the input frame.
    std::vector<long long> integral(static_cast<size_t>(rw + 1) * (rh + 1), 0);
    for (int y = 0; y < rh; ++y) {
      long long row = 0;
      for (int x = 0; x < rw; ++x) {
        row += frame.at(r.x0 + x, r.y0 + y);
        integral[static_cast<size_t>(y + 1) * (rw + 1) + (x + 1)] =
            integral[static_cast<size_t>(y) * (rw + 1) + (x + 1)] + row;
      }
    }
    auto box_sum = [&](int x0, int y0, int x1, int y1) {
      return integral[static_cast<size_t>(y1) * (rw + 1) + x1] -
             integral[static_cast<size_t>(y0) * (rw + 1) + x1] -
             integral[static_cast<size_t>(y1) * (rw + 1) + x0] +
             integral[static_cast<size_t>(y0) * (rw + 1) + x0];
    };

    for (int y = 0; y < rh; ++y) {
      const int wy0 = std::max(0, y - half);
      const int wy1 = std::min(rh, y + half + 1);
      for (int x = 0; x < rw; ++x) {
        const int wx0 = std::max(0, x - half);
        const int wx1 = std::min(rw, x + half + 1);
        const long long sum = box_sum(wx0, wy0, wx1, wy1);
        const long long count = static_cast<long long>(wx1 - wx0) * (wy1 - wy0);
        const long long mean = std::llround(static_cast<double>(sum) / static_cast<double>(count));
        result.frame.set(r.x0 + x, r.y0 + y,
                         static_cast<std::uint8_t>(std::clamp<long long>(mean, 0, 255)));
      }
    }
  }
  return result;
}

namespace {

// Covered pixel count of `rect` under the union of blur rectangles,
// computed row-wise with merged integer intervals.
long long covered_pixels(const IntRect& rect, const std::vector<IntRect>& blurs) {
  long long covered = 0;
  std::vector<std::pair<int, int>> spans;
  for (int y = rect.y0; y < rect.y1; ++y) {
    spans.clear();
    for (const auto& b : blurs) {
      if (y < b.y0 || y >= b.y1) continue;
      const int x0 = std::max(rect.x0, b.x0);
      const int x1 = std::min(rect.x1, b.x1);
      if (x0 < x1) spans.push_back({x0, x1});
    }
    if (spans.empty()) continue;
    std::sort(spans.begin(), spans.end());
    int cur0 = spans[0].first, cur1 = spans[0].second;
    for (size_t i = 1; i < spans.size(); ++i) {
      if (spans[i].first <= cur1) {
        cur1 = std::max(cur1, spans[i].second);
      } else {
        covered += cur1 - cur0;
        cur0 = spans[i].first;
        cur1 = spans[i].second;
      }
    }
    covered += cur1 - cur0;
  }
  return covered;
}

void tally_region(KindTally& tally, const SensitiveRegion& region, long long covered,
                  long long area, long long area_floor, double coverage_min) {
  tally.total += 1;
  const bool anonymized =
      area > 0 && static_cast<double>(covered) >= coverage_min * static_cast<double>(area);
  if (area >= area_floor) {
    tally.eligible += 1;
    if (anonymized) tally.anonymized_eligible += 1;
  }
  if (region.identifiable) {
    tally.identifiable += 1;
    if (anonymized) tally.anonymized_identifiable += 1;
  }
}

void accumulate(RecallReport& report, const std::vector<PixelBox>& blurred,
                const std::vector<SensitiveRegion>& truth, int frame_w, int frame_h,
                long long area_floor, double coverage_min) {
  std::vector<IntRect> blurs;
  blurs.reserve(blurred.size());
  for (const auto& b : blurred) {
    const IntRect r = rasterize(b, frame_w, frame_h);
    if (!r.empty()) blurs.push_back(r);
  }
  for (const auto& region : truth) {
    const IntRect r = rasterize(region.box, frame_w, frame_h);
    const long long area = r.area();
    const long long covered = r.empty() ? 0 : covered_pixels(r, blurs);
    KindTally& tally = region.kind == RegionKind::face ? report.face : report.plate;
    tally_region(tally, region, covered, area, area_floor, coverage_min);
  }
}

}  // namespace

RecallReport evaluate_recall(const std::vector<PixelBox>& blurred,
                             const std::vector<SensitiveRegion>& truth, int frame_w, int frame_h,
                             long long area_floor_px, double coverage_min) {
  RecallReport report;
  accumulate(report, blurred, truth, frame_w, frame_h, area_floor_px, coverage_min);
  return report;
}

void RecallAccumulator::add_frame(const std::vector<PixelBox>& blurred,
                                  const std::vector<SensitiveRegion>& truth, int frame_w,
                                  int frame_h) {
  accumulate(report_, blurred, truth, frame_w, frame_h, floor_, coverage_);
}

std::vector<PixelBox> emulate_blur_boxes(const std::vector<SensitiveRegion>& regions,
                                         const RegionNoise& noise, std::uint64_t seed) {
  std::mt19937_64 rng = make_rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<PixelBox> out;
  out.reserve(regions.size());
  for (const auto& region : regions) {
    const auto& curve =
        region.kind == RegionKind::face ? noise.miss_face : noise.miss_plate;
    if (uni(rng) < detemu::miss_probability(curve, static_cast<double>(region.area_px))) {
      continue;
    }
    PixelBox b = region.box;
    const double sx = noise.jitter_sigma * b.width();
    const double sy = noise.jitter_sigma * b.height();
    b.x_min += gauss(rng) * sx - noise.dilate_px;
    b.x_max += gauss(rng) * sx + noise.dilate_px;
    b.y_min += gauss(rng) * sy - noise.dilate_px;
    b.y_max += gauss(rng) * sy + noise.dilate_px;
    if (b.valid()) out.push_back(b);
  }
  return out;
}

}  // namespace ixe::anonymize
