#include "ixe/geometry.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ixe/errors.hpp"

namespace ixe::geometry {

namespace {

Eigen::Matrix3d to_eigen(const std::array<double, 9>& m) {
  Eigen::Matrix3d e;
  e << m[0], m[1], m[2], m[3], m[4], m[5], m[6], m[7], m[8];
  return e;
}

std::array<double, 9> from_eigen(const Eigen::Matrix3d& e) {
  return {e(0, 0), e(0, 1), e(0, 2), e(1, 0), e(1, 1), e(1, 2), e(2, 0), e(2, 1), e(2, 2)};
}

// Hartley normalization: translate centroid to the origin and scale the mean
// distance to sqrt(2). Returns the conditioning transform.
Eigen::Matrix3d normalizing_transform(const std::vector<Vec2>& pts) {
  double cx = 0.0, cy = 0.0;
  for (const auto& p : pts) {
    cx += p.x;
    cy += p.y;
  }
  cx /= static_cast<double>(pts.size());
  cy /= static_cast<double>(pts.size());
  double mean_dist = 0.0;
  for (const auto& p : pts) mean_dist += std::hypot(p.x - cx, p.y - cy);
  mean_dist /= static_cast<double>(pts.size());
  const double s = mean_dist > 1e-12 ? std::sqrt(2.0) / mean_dist : 1.0;
  Eigen::Matrix3d t;
  t << s, 0, -s * cx, 0, s, -s * cy, 0, 0, 1;
  return t;
}

}  // namespace

void Homography::normalize() {
  if (std::abs(m_[8]) > 1e-9) {
    const double inv = 1.0 / m_[8];
    for (auto& c : m_) c *= inv;
  }
}

double Homography::determinant() const { return to_eigen(m_).determinant(); }

Homography Homography::identity() { return Homography(); }

Homography Homography::from_rows(const std::array<double, 9>& rows) {
  Homography h;
  h.m_ = rows;
  h.normalize();
  if (std::abs(h.determinant()) <= 1e-12) {
    throw DegenerateConfiguration("homography: matrix is not invertible");
  }
  return h;
}

Homography Homography::scaling(double sx, double sy) {
  return from_rows({sx, 0, 0, 0, sy, 0, 0, 0, 1});
}

Homography Homography::translation(double dx, double dy) {
  return from_rows({1, 0, dx, 0, 1, dy, 0, 0, 1});
}

Homography Homography::inverse() const {
  const Eigen::Matrix3d inv = to_eigen(m_).inverse();
  return from_rows(from_eigen(inv));
}

Homography Homography::compose(const Homography& inner) const {
  const Eigen::Matrix3d prod = to_eigen(m_) * to_eigen(inner.m_);
  return from_rows(from_eigen(prod));
}

Vec2 Homography::apply(Vec2 p) const {
  const double hx = m_[0] * p.x + m_[1] * p.y + m_[2];
  const double hy = m_[3] * p.x + m_[4] * p.y + m_[5];
  const double w = m_[6] * p.x + m_[7] * p.y + m_[8];
  if (std::abs(w) < 1e-12) {
    throw DegenerateProjection("homography: homogeneous coordinate vanished");
  }
  return {hx / w, hy / w};
}

Homography calibrate(const std::vector<std::pair<Vec2, Vec2>>& correspondences) {
  const size_t n = correspondences.size();
  if (n < 4) throw DegenerateConfiguration("calibrate: need at least 4 correspondences");

  std::vector<Vec2> src(n), dst(n);
  for (size_t i = 0; i < n; ++i) {
    src[i] = correspondences[i].first;
    dst[i] = correspondences[i].second;
  }
  const Eigen::Matrix3d t_src = normalizing_transform(src);
  const Eigen::Matrix3d t_dst = normalizing_transform(dst);

  auto map = [](const Eigen::Matrix3d& t, Vec2 p) -> Vec2 {
    return {t(0, 0) * p.x + t(0, 2), t(1, 1) * p.y + t(1, 2)};
  };

  Eigen::MatrixXd a(2 * n, 9);
  for (size_t i = 0; i < n; ++i) {
    const Vec2 p = map(t_src, src[i]);
    const Vec2 q = map(t_dst, dst[i]);
    a.row(2 * i) << p.x, p.y, 1, 0, 0, 0, -q.x * p.x, -q.x * p.y, -q.x;
    a.row(2 * i + 1) << 0, 0, 0, p.x, p.y, 1, -q.y * p.x, -q.y * p.y, -q.y;
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  // The system must pin the solution up to one null direction: rank 8.
  const int rank_needed = 8;
  if (sv.size() < rank_needed || sv(rank_needed - 1) <= 1e-9 * sv(0)) {
    throw DegenerateConfiguration("calibrate: rank-deficient correspondence set");
  }
  const Eigen::VectorXd h = svd.matrixV().col(8);
  Eigen::Matrix3d hn;
  hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);

  const Eigen::Matrix3d result = t_dst.inverse() * hn * t_src;
  if (std::abs(result.determinant()) <= 1e-12) {
    throw DegenerateConfiguration("calibrate: recovered map is singular");
  }
  return Homography::from_rows(from_eigen(result));
}

bool SceneMask::valid() const {
  if (width <= 0 || height <= 0) return false;
  if (bits.size() != static_cast<size_t>(width) * height) return false;
  return std::any_of(bits.begin(), bits.end(), [](std::uint8_t b) { return b != 0; });
}

SceneMask SceneMask::filled(int width, int height, bool value) {
  SceneMask m;
  m.width = width;
  m.height = height;
  m.bits.assign(static_cast<size_t>(width) * height, value ? 1 : 0);
  return m;
}

bool apply_mask(const SceneMask& mask, const PixelBox& box, double keep_threshold) {
  // Pixel (ix, iy) belongs to the box iff its center lies inside.
  const int x0 = std::max(0, static_cast<int>(std::floor(box.x_min + 0.5)));
  const int y0 = std::max(0, static_cast<int>(std::floor(box.y_min + 0.5)));
  const int x1 = std::min(mask.width, static_cast<int>(std::ceil(box.x_max - 0.5)));
  const int y1 = std::min(mask.height, static_cast<int>(std::ceil(box.y_max - 0.5)));
  long long covered = 0, total = 0;
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      ++total;
      covered += mask.at(x, y) ? 1 : 0;
    }
  }
  if (total == 0) return false;
  return static_cast<double>(covered) / static_cast<double>(total) >= keep_threshold;
}

CropTransform::CropTransform(int frame_w, int frame_h, CropSpec spec) : spec_(spec) {
  if (spec.side <= 0) throw SpecOutOfBounds("square_crop: side must be positive");
  if (spec.offset_x < 0 || spec.offset_y < 0 || spec.offset_x + spec.side > frame_w ||
      spec.offset_y + spec.side > frame_h) {
    throw SpecOutOfBounds("square_crop: crop rectangle exceeds the source frame");
  }
}

std::optional<Vec2> CropTransform::apply(Vec2 source) const {
  const Vec2 out{source.x - spec_.offset_x, source.y - spec_.offset_y};
  if (out.x < 0.0 || out.y < 0.0 || out.x >= spec_.side || out.y >= spec_.side) {
    return std::nullopt;
  }
  return out;
}

Homography CropTransform::as_homography() const {
  return Homography::translation(-spec_.offset_x, -spec_.offset_y);
}

SceneMask load_mask_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("mask: cannot open " + path);
  std::string magic;
  in >> magic;
  if (magic != "P5") throw Error("mask: not a P5 PGM: " + path);
  auto next_int = [&in, &path]() {
    // Skip whitespace and '#' comment lines between header fields.
    while (true) {
      const int c = in.peek();
      if (c == '#') {
        std::string line;
        std::getline(in, line);
      } else if (std::isspace(c)) {
        in.get();
      } else {
        break;
      }
    }
    int v = 0;
    if (!(in >> v)) throw Error("mask: bad PGM header: " + path);
    return v;
  };
  const int w = next_int();
  const int h = next_int();
  const int maxval = next_int();
  if (maxval != 255) throw Error("mask: expected maxval 255: " + path);
  in.get();  // single whitespace after header
  std::vector<char> raw(static_cast<size_t>(w) * h);
  in.read(raw.data(), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
    throw Error("mask: truncated PGM payload: " + path);
  }
  SceneMask m;
  m.width = w;
  m.height = h;
  m.bits.resize(raw.size());
  for (size_t i = 0; i < raw.size(); ++i) {
    m.bits[i] = static_cast<unsigned char>(raw[i]) > 127 ? 1 : 0;
  }
  return m;
}

void save_mask_pgm(const SceneMask& mask, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("mask: cannot write " + path);
  out << "P5\n" << mask.width << " " << mask.height << "\n255\n";
  std::vector<char> raw(mask.bits.size());
  for (size_t i = 0; i < mask.bits.size(); ++i) raw[i] = mask.bits[i] ? '\xff' : '\0';
  out.write(raw.data(), static_cast<std::streamsize>(raw.size()));
}

std::vector<std::pair<Vec2, Vec2>> load_correspondences(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("calibration: cannot open " + path);
  std::vector<std::pair<Vec2, Vec2>> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    double px, py, wx, wy;
    if (!(ls >> px >> py >> wx >> wy)) {
      throw Error("calibration: expected 'px py wx wy' in " + path);
    }
    out.push_back({{px, py}, {wx, wy}});
  }
  return out;
}

}  // namespace ixe::geometry
