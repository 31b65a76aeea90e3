// Copyright Contributors to the duplex-splat Project
// SPDX-License-Identifier: Apache-2.0
//
// Deterministic synthetic scenes and camera paths.
//
// All randomness comes from SplitMix64 and is mapped to doubles by bit
// manipulation only, so a (seed, parameters) pair yields the same scene on
// every platform. Every stored field is rounded to float32 so that generated
// scenes survive the binary container bit for bit.

#pragma once

#include "duplex/camera.hpp"
#include "duplex/projection.hpp"
#include "duplex/scene.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace duplex {

/// SplitMix64 (Steele, Lea, Flood). Output i of seed s is mix(s + (i+1)·γ),
/// so any element of a stream can be computed directly.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  static constexpr std::uint64_t at(std::uint64_t seed, std::uint64_t counter) {
    return mix(seed + (counter + 1) * kGamma);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    state_ += kGamma;
    return mix(state_);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::uint64_t state_;
};

/// Round-trip through float32.
inline double quantize(double v) {
  const volatile float f = static_cast<float>(v);
  return static_cast<double>(f);
}
inline Vec3 quantize(const Vec3& v) { return {quantize(v.x()), quantize(v.y()), quantize(v.z())}; }
inline Quat quantize(const Quat& q) {
  const Quat n = q.normalized();
  return {quantize(n.w), quantize(n.x), quantize(n.y), quantize(n.z)};
}

/// Uniformly distributed rotation (Shoemake's subgroup algorithm).
inline Quat random_rotation(SplitMix64& rng) {
  const double u1 = rng.uniform();
  const double u2 = rng.uniform();
  const double u3 = rng.uniform();
  const double a = std::sqrt(1.0 - u1);
  const double b = std::sqrt(u1);
  const double two_pi = 2.0 * std::numbers::pi;
  Quat q{b * std::cos(two_pi * u3), a * std::sin(two_pi * u2), a * std::cos(two_pi * u2),
         b * std::sin(two_pi * u3)};
  if (q.w < 0.0) q = -q;
  return q;
}

/// Uniform point in the ball of the given radius (rejection from the cube).
inline Vec3 random_in_ball(SplitMix64& rng, double radius) {
  for (;;) {
    const Vec3 p(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
    if (p.squaredNorm() <= 1.0) return radius * p;
  }
}

struct RandomCellOptions {
  double scale_min = 0.15;
  double scale_max = 0.45;
  /// Slot offsets are drawn uniformly from the ball of this radius.
  double offset_radius = 0.6;
  /// Scale ratios are drawn from [ratio_min, 1] times the offset bound.
  double ratio_min = 0.3;
  double opacity_min = 0.3;
  double opacity_max = 1.0;
};

/// N cells with centers uniform in a cube of side `extent` centered at the
/// origin. Valid by construction.
inline Scene gen_random_cells(std::uint64_t seed, std::size_t n, std::uint32_t k, double extent,
                              const RandomCellOptions& opt = {}) {
  if (n < 1 || k < 1) throw std::invalid_argument("gen_random_cells needs N >= 1 and K >= 1");
  SplitMix64 rng(seed);
  Scene scene;
  scene.slots_per_cell = k;
  scene.cells.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    CellProxy c;
    c.center = quantize(Vec3(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)) *
                        extent);
    c.structure_scales = quantize(Vec3(rng.uniform(opt.scale_min, opt.scale_max),
                                       rng.uniform(opt.scale_min, opt.scale_max),
                                       rng.uniform(opt.scale_min, opt.scale_max)));
    c.quaternion = quantize(random_rotation(rng));
    c.blend_weight = 1.0;
    for (std::uint32_t j = 0; j < k; ++j) {
      SlotAttributes s;
      s.pos_offset = quantize(random_in_ball(rng, opt.offset_radius));
      const double bound = scale_ratio_bound(s.pos_offset);
      for (int a = 0; a < 3; ++a) s.scale_ratio[a] = quantize(bound * rng.uniform(opt.ratio_min, 1.0));
      s.rotation = quantize(random_rotation(rng));
      s.opacity = quantize(rng.uniform(opt.opacity_min, opt.opacity_max));
      s.color = quantize(Vec3(rng.uniform(), rng.uniform(), rng.uniform()));
      c.slots.push_back(s);
    }
    scene.cells.push_back(std::move(c));
  }
  return scene;
}

struct OrbitOptions {
  /// Focal length in pixels; 0 selects the image width.
  double focal_px = 0.0;
  /// Height of the circle above `center` along world +y.
  double elevation = 0.0;
  double near = 0.01;
  double far = 1000.0;
};

/// Cameras on a horizontal circle (world +y up) looking at `center`. Frame i
/// sits at azimuth 2πi/n measured from +x toward +z.
inline std::vector<Camera> gen_orbit(const Vec3& center, double radius, int n_frames, int width,
                                     int height, const OrbitOptions& opt = {}) {
  if (n_frames < 1 || !(radius > 0.0)) throw std::invalid_argument("gen_orbit needs n_frames >= 1, radius > 0");
  std::vector<Camera> out;
  out.reserve(n_frames);
  const double focal = opt.focal_px > 0.0 ? opt.focal_px : static_cast<double>(width);
  for (int i = 0; i < n_frames; ++i) {
    const double theta = 2.0 * std::numbers::pi * i / n_frames;
    const Vec3 eye = center + Vec3(radius * std::cos(theta), opt.elevation, radius * std::sin(theta));
    Camera cam = Camera::look_at(eye, center, Vec3::UnitY(), width, height, focal);
    cam.near = opt.near;
    cam.far = opt.far;
    out.push_back(cam);
  }
  return out;
}

/// Geometry of the opaque-wall fixture. The wall lies in the plane z = 0 and
/// spans [-half_extent, half_extent]² in x and y; rear layer i sits at
/// z = i · layer_spacing and extends rear_margin further on every side.
struct OpaqueWallOptions {
  double front_opacity = 0.95;
  double rear_opacity = 0.9;
  int cells_per_side = 8;
  double half_extent = 2.0;
  double layer_spacing = 0.75;
  double rear_margin = 1.5;
  double camera_distance = 6.0;
};

inline Vec3 layer_color(int layer) {
  static constexpr std::array<std::array<double, 3>, 6> palette{{
      {1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0},
      {0.0, 1.0, 1.0}, {1.0, 0.0, 1.0}, {1.0, 1.0, 0.0},
  }};
  const auto& c = palette[static_cast<std::size_t>(layer) % palette.size()];
  return {c[0], c[1], c[2]};
}

namespace detail {

/// One flat layer of cells on a square grid with spacing `pitch`, facing -z.
inline void add_layer(Scene& scene, SplitMix64& rng, double z, double half_extent, double pitch,
                      double opacity, const Vec3& color, std::uint32_t k) {
  const int n = std::max(1, static_cast<int>(std::lround(2.0 * half_extent / pitch)));
  const double step = 2.0 * half_extent / n;
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      CellProxy c;
      c.center = quantize(Vec3(-half_extent + step * (ix + 0.5), -half_extent + step * (iy + 0.5), z));
      c.structure_scales = quantize(Vec3(step, step, 0.1 * step));
      for (std::uint32_t j = 0; j < k; ++j) {
        SlotAttributes s;
        if (k > 1) {
          const double phi = 2.0 * std::numbers::pi * (j + 0.25 * rng.uniform()) / k;
          const double rho = 0.25 + 0.2 * rng.uniform();
          s.pos_offset = quantize(Vec3(rho * std::cos(phi), rho * std::sin(phi), 0.0));
        }
        const double bound = scale_ratio_bound(s.pos_offset);
        s.scale_ratio = quantize(Vec3(0.9 * bound, 0.9 * bound, 0.5 * bound));
        s.opacity = quantize(opacity);
        s.color = color;
        c.slots.push_back(s);
      }
      scene.cells.push_back(std::move(c));
    }
}

}  // namespace detail

/// Near-opaque red wall in front of `layers - 1` distinctly colored planes.
inline Scene gen_opaque_wall(std::uint64_t seed, int layers, std::uint32_t k,
                             const OpaqueWallOptions& opt = {}) {
  if (layers < 2) throw std::invalid_argument("gen_opaque_wall needs at least two layers");
  if (k < 1) throw std::invalid_argument("gen_opaque_wall needs K >= 1");
  SplitMix64 rng(seed);
  Scene scene;
  scene.slots_per_cell = k;
  const double pitch = 2.0 * opt.half_extent / opt.cells_per_side;
  detail::add_layer(scene, rng, 0.0, opt.half_extent, pitch, opt.front_opacity, layer_color(0), k);
  for (int layer = 1; layer < layers; ++layer)
    detail::add_layer(scene, rng, layer * opt.layer_spacing, opt.half_extent + opt.rear_margin, pitch,
                      opt.rear_opacity, layer_color(layer), k);
  return scene;
}

/// Head-on view of the wall; the wall spans about 90% of the image width.
inline Camera opaque_wall_camera(const OpaqueWallOptions& opt, int width, int height) {
  const double focal = 0.45 * width * opt.camera_distance / opt.half_extent;
  return Camera::look_at(Vec3(0.0, 0.0, -opt.camera_distance), Vec3::Zero(), Vec3::UnitY(), width,
                         height, focal);
}

/// Pixels looking at the wall interior, one cell pitch away from its edges.
inline PixelRect opaque_wall_region(const OpaqueWallOptions& opt, const Camera& cam) {
  const double inner = opt.half_extent - 2.0 * opt.half_extent / opt.cells_per_side;
  double lo_x = INFINITY, hi_x = -INFINITY, lo_y = INFINITY, hi_y = -INFINITY;
  for (double sx : {-1.0, 1.0})
    for (double sy : {-1.0, 1.0}) {
      const Vec2 p = cam.project(cam.to_camera(Vec3(sx * inner, sy * inner, 0.0)));
      lo_x = std::min(lo_x, p.x());
      hi_x = std::max(hi_x, p.x());
      lo_y = std::min(lo_y, p.y());
      hi_y = std::max(hi_y, p.y());
    }
  return pixel_rect(lo_x, hi_x, lo_y, hi_y, cam.width, cam.height);
}

struct PoppingPairOptions {
  double separation = 0.03;
  double opacity = 0.9;
  double orbit_radius = 6.0;
};

/// One cell holding two vertical, elongated Gaussians that interpenetrate.
/// Their centers differ by a short horizontal vector, so the order of their
/// center depths flips twice along any horizontal orbit around the origin.
inline Scene gen_popping_pair(std::uint64_t seed, const PoppingPairOptions& opt = {}) {
  SplitMix64 rng(seed);
  const double heading = (10.0 + 20.0 * rng.uniform()) * std::numbers::pi / 180.0;
  const Vec3 half = 0.5 * opt.separation * Vec3(std::cos(heading), 0.0, std::sin(heading));

  CellProxy c;
  c.structure_scales = Vec3(0.8, 2.0, 0.8);
  const std::array<Vec3, 2> scales{Vec3(0.5, 1.6, 0.5), Vec3(0.42, 1.4, 0.42)};
  const std::array<Vec3, 2> colors{Vec3(0.95, 0.15, 0.1), Vec3(0.1, 0.25, 0.95)};
  for (int i = 0; i < 2; ++i) {
    SlotAttributes s;
    s.pos_offset = quantize(Vec3((i == 0 ? half : Vec3(-half)).cwiseQuotient(c.structure_scales)));
    s.scale_ratio = quantize(Vec3(scales[i].cwiseQuotient(c.structure_scales)));
    s.opacity = quantize(opt.opacity);
    s.color = quantize(colors[i]);
    c.slots.push_back(s);
  }
  Scene scene;
  scene.slots_per_cell = 2;
  scene.cells.push_back(std::move(c));
  return scene;
}

}  // namespace duplex
