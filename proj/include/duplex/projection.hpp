// Copyright Contributors to the duplex-splat Project
// SPDX-License-Identifier: Apache-2.0
//
// Screen-space projection of Gaussians (EWA local-affine approximation) and of
// cell proxies (conservative visible-region bound).

#pragma once

#include "duplex/camera.hpp"
#include "duplex/decoder.hpp"
#include "duplex/scene.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <vector>

namespace duplex {

/// Screen-space low-pass dilation added to the projected covariance diagonal.
inline constexpr double kLowPassDilation = 0.3;

/// Footprint cutoff in standard deviations.
inline constexpr double kSigmaCutoff = 3.0;

class SingularCovariance : public Error {
 public:
  SingularCovariance() : Error("projected 2D covariance is singular") {}
};

/// Half-open pixel rectangle [x0, x1) x [y0, y1).
struct PixelRect {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  bool empty() const { return x0 >= x1 || y0 >= y1; }
  bool contains(int x, int y) const { return x >= x0 && x < x1 && y >= y0 && y < y1; }
  bool contains(const PixelRect& o) const {
    return o.empty() || (o.x0 >= x0 && o.x1 <= x1 && o.y0 >= y0 && o.y1 <= y1);
  }
  long long area() const { return empty() ? 0 : 1LL * (x1 - x0) * (y1 - y0); }
  PixelRect intersect(const PixelRect& o) const {
    return {std::max(x0, o.x0), std::max(y0, o.y0), std::min(x1, o.x1), std::min(y1, o.y1)};
  }
  friend bool operator==(const PixelRect&, const PixelRect&) = default;
};

/// Pixels whose sample points (i + 0.5, j + 0.5) fall inside the closed
/// continuous box, clipped to the image.
inline PixelRect pixel_rect(double lo_x, double hi_x, double lo_y, double hi_y, int width,
                            int height) {
  auto first = [](double lo, int n) {
    const double v = std::ceil(std::clamp(lo - 0.5, -1.0, static_cast<double>(n) + 1.0));
    return std::clamp(static_cast<int>(v), 0, n);
  };
  auto last = [](double hi, int n) {
    const double v = std::floor(std::clamp(hi - 0.5, -2.0, static_cast<double>(n))) + 1.0;
    return std::clamp(static_cast<int>(v), 0, n);
  };
  if (!(lo_x <= hi_x) || !(lo_y <= hi_y)) return {};
  return {first(lo_x, width), first(lo_y, height), last(hi_x, width), last(hi_y, height)};
}

struct Splat2D {
  Vec2 mean2d = Vec2::Zero();
  /// Upper triangle (a, b, c) of the inverse of the dilated 2D covariance.
  std::array<double, 3> conic{1.0, 0.0, 1.0};
  /// Projected covariance before the low-pass dilation.
  Mat2 cov2d = Mat2::Identity();
  double depth = 0.0;
  /// 3 * sqrt(largest eigenvalue of cov2d).
  double radius = 0.0;
  PixelRect aabb;
};

/// Σ = R diag(s)² Rᵀ.
inline Mat3 build_covariance(const Vec3& scale, const Quat& rotation) {
  const Mat3 r = rotation.to_matrix();
  const Mat3 m = r * scale.asDiagonal();
  return m * m.transpose();
}

inline double max_eigenvalue(const Mat2& m) {
  const double mid = 0.5 * (m(0, 0) + m(1, 1));
  const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  return mid + std::sqrt(std::max(0.0, mid * mid - det));
}

/// Local-affine projection Jacobian at camera-space point `t`, composed with
/// the camera rotation.
inline Eigen::Matrix<double, 2, 3> projection_jacobian(const Vec3& t, const Camera& cam) {
  Eigen::Matrix<double, 2, 3> j;
  const double iz = 1.0 / t.z();
  j << cam.focal.x() * iz, 0.0, -cam.focal.x() * t.x() * iz * iz,  //
      0.0, cam.focal.y() * iz, -cam.focal.y() * t.y() * iz * iz;
  return j * cam.rotation;
}

/// Returns nullopt when the center's view depth is outside the open interval
/// (near, far). Throws SingularCovariance when the dilated 2D covariance has
/// determinant at or below `det_floor`.
inline std::optional<Splat2D> project_gaussian(const Gaussian3D& g, const Camera& cam,
                                               double det_floor = 1e-6) {
  const Vec3 t = cam.to_camera(g.center);
  if (!(t.z() > cam.near && t.z() < cam.far)) return std::nullopt;

  const Eigen::Matrix<double, 2, 3> jw = projection_jacobian(t, cam);
  Splat2D s;
  s.cov2d = jw * build_covariance(g.scale, g.rotation) * jw.transpose();
  s.cov2d(1, 0) = s.cov2d(0, 1);

  Mat2 dilated = s.cov2d;
  dilated(0, 0) += kLowPassDilation;
  dilated(1, 1) += kLowPassDilation;
  const double det = dilated(0, 0) * dilated(1, 1) - dilated(0, 1) * dilated(0, 1);
  if (!(det > det_floor)) throw SingularCovariance();

  s.conic = {dilated(1, 1) / det, -dilated(0, 1) / det, dilated(0, 0) / det};
  s.mean2d = cam.project(t);
  s.depth = t.z();
  s.radius = kSigmaCutoff * std::sqrt(max_eigenvalue(s.cov2d));

  // Tight box of the 3-sigma ellipse of the kernel actually evaluated.
  const double hx = kSigmaCutoff * std::sqrt(dilated(0, 0));
  const double hy = kSigmaCutoff * std::sqrt(dilated(1, 1));
  s.aabb = pixel_rect(s.mean2d.x() - hx, s.mean2d.x() + hx, s.mean2d.y() - hy,
                      s.mean2d.y() + hy, cam.width, cam.height);
  return s;
}

struct CellSplat {
  std::size_t cell_index = 0;
  double depth = 0.0;
  PixelRect aabb;
};

/// Half-extents, along the cell's own axes, of the smallest cell-aligned box
/// holding every decoded slot center. Bounded by S_n for valid cells.
inline Vec3 cell_center_extent(const CellProxy& cell) {
  const Mat3 inv = cell.quaternion.to_matrix().inverse();
  Vec3 extent = Vec3::Zero();
  for (const SlotAttributes& slot : cell.slots)
    extent = extent.cwiseMax((inv * (slot_center(cell, slot) - cell.center)).cwiseAbs());
  return extent;
}

/// Largest standard deviation of any decoded slot.
inline double cell_max_sigma(const CellProxy& cell) {
  double sigma = 0.0;
  for (const SlotAttributes& slot : cell.slots)
    sigma = std::max(sigma, decode_slot(cell, slot).scale.maxCoeff());
  return sigma;
}

/// Screen bound of every slot splat the cell can emit. The slot centers lie
/// in a cell-aligned box; its corners bound the projected means, the nearest
/// corner depth and steepest corner ray bound the projection Jacobian, and
/// so the 3-sigma half-width of any slot footprint. Nullopt when no slot
/// center can fall inside (near, far) or the bound misses the image.
inline std::optional<CellSplat> project_cell(const CellProxy& cell, const Camera& cam,
                                             std::size_t cell_index = 0) {
  const Mat3 axes = cell.quaternion.to_matrix();
  const Vec3 extent = cell_center_extent(cell);

  std::array<Vec3, 8> corners;
  int behind_near = 0;
  int beyond_far = 0;
  for (int i = 0; i < 8; ++i) {
    const Vec3 sign((i & 1) ? 1.0 : -1.0, (i & 2) ? 1.0 : -1.0, (i & 4) ? 1.0 : -1.0);
    corners[i] = cam.to_camera(cell.center + axes * sign.cwiseProduct(extent));
    behind_near += corners[i].z() <= cam.near;
    beyond_far += corners[i].z() >= cam.far;
  }
  if (behind_near == 8 || beyond_far == 8) return std::nullopt;

  CellSplat out;
  out.cell_index = cell_index;
  out.depth = std::max(cam.to_camera(cell.center).z(), cam.near);
  if (behind_near > 0) {
    out.aabb = {0, 0, cam.width, cam.height};
  } else {
    double lo_x = INFINITY, hi_x = -INFINITY, lo_y = INFINITY, hi_y = -INFINITY;
    double z_min = INFINITY, slope_x = 0.0, slope_y = 0.0;
    for (const Vec3& c : corners) {
      const Vec2 p = cam.project(c);
      lo_x = std::min(lo_x, p.x());
      hi_x = std::max(hi_x, p.x());
      lo_y = std::min(lo_y, p.y());
      hi_y = std::max(hi_y, p.y());
      z_min = std::min(z_min, c.z());
      slope_x = std::max(slope_x, std::abs(c.x() / c.z()));
      slope_y = std::max(slope_y, std::abs(c.y() / c.z()));
    }
    const double reach = kSigmaCutoff * cell_max_sigma(cell) / z_min;
    // sqrt(a + d) <= sqrt(a) + sqrt(d) covers the low-pass dilation.
    const double dilation = kSigmaCutoff * std::sqrt(kLowPassDilation);
    const double pad_x = reach * cam.focal.x() * std::hypot(1.0, slope_x) + dilation;
    const double pad_y = reach * cam.focal.y() * std::hypot(1.0, slope_y) + dilation;
    out.aabb = pixel_rect(lo_x - pad_x, hi_x + pad_x, lo_y - pad_y, hi_y + pad_y, cam.width, cam.height);
  }
  if (out.aabb.empty()) return std::nullopt;
  return out;
}

inline std::vector<CellSplat> frustum_cull(std::span<const CellProxy> cells, const Camera& cam) {
  std::vector<CellSplat> out;
  for (std::size_t i = 0; i < cells.size(); ++i)
    if (auto s = project_cell(cells[i], cam, i)) out.push_back(*s);
  return out;
}

}  // namespace duplex
