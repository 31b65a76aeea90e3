// Copyright Contributors to the duplex-splat Project
// SPDX-License-Identifier: Apache-2.0
//
// Per-pixel compositing kernels:
//   * reference front-to-back alpha blending over depth-sorted Gaussians,
//   * linear-correction weighted sum (order free),
//   * cell-ordered physical weighted sum with cell transmittance and early
//     termination,
//   * the brute-force oracle used as ground truth.
//
// Every kernel sums in a fixed order (traversal order, then slot order), so a
// pixel's value never depends on how tiles are scheduled.

#pragma once

#include "duplex/config.hpp"
#include "duplex/projection.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

namespace duplex {

/// Upper clamp on any single alpha.
inline constexpr double kMaxAlpha = 0.99;

/// A projected Gaussian together with the attributes the kernels need.
struct SplatPrimitive {
  Splat2D splat;
  double opacity = 0.0;
  Vec3 color = Vec3::Zero();
};

/// A visible cell's contiguous block of projected slots in a primitive array.
struct CellSlots {
  std::uint32_t first = 0;
  std::uint32_t count = 0;
  double blend_weight = 1.0;
};

struct PixelTrace {
  std::uint32_t n_valid = 0;
  std::uint32_t n_rendered = 0;
  double final_T = 1.0;
};

struct PixelResult {
  Vec3 color = Vec3::Zero();
  PixelTrace trace;
};

/// Whether kernels keep scanning after termination to complete n_valid.
enum class TraceMode { Full, Off };

/// σ · G'(pixel center), clamped to kMaxAlpha. No footprint or threshold test.
inline double kernel_alpha(const Splat2D& s, double opacity, int px, int py) {
  const double dx = px + 0.5 - s.mean2d.x();
  const double dy = py + 0.5 - s.mean2d.y();
  const double power = -0.5 * (s.conic[0] * dx * dx + s.conic[2] * dy * dy) - s.conic[1] * dx * dy;
  if (power > 0.0) return 0.0;
  return std::min(kMaxAlpha, opacity * std::exp(power));
}

/// Kernel alpha with the AABB false-positive skip and the alpha_min cutoff.
inline double eval_alpha(const Splat2D& s, double opacity, int px, int py, double alpha_min) {
  if (!s.aabb.contains(px, py)) return 0.0;
  const double a = kernel_alpha(s, opacity, px, py);
  return a < alpha_min ? 0.0 : a;
}

/// Front-to-back blending of depth-ascending `order`; stops once T < ε.
inline PixelResult blend_alpha_reference(std::span<const std::uint32_t> order,
                                         std::span<const SplatPrimitive> prims, int px, int py,
                                         const RenderConfig& cfg, TraceMode mode = TraceMode::Full) {
  PixelResult r;
  double t = 1.0;
  bool done = false;
  for (std::uint32_t idx : order) {
    const SplatPrimitive& p = prims[idx];
    const double a = eval_alpha(p.splat, p.opacity, px, py, cfg.alpha_min);
    if (a <= 0.0) continue;
    ++r.trace.n_valid;
    if (done) continue;
    r.color += (t * a) * p.color;
    t *= 1.0 - a;
    ++r.trace.n_rendered;
    if (t < cfg.et_epsilon) {
      done = true;
      if (mode == TraceMode::Off) break;
    }
  }
  r.color += t * cfg.background;
  r.trace.final_T = t;
  return r;
}

/// w(d) = v · max(0, 1 - d/τ) with v = 1.
inline double lc_weight(double depth, double tau) { return std::max(0.0, 1.0 - depth / tau); }

/// Order-free weighted sum; the background enters with weight w_B.
inline PixelResult blend_lcwsr(std::span<const std::uint32_t> entries,
                               std::span<const SplatPrimitive> prims, int px, int py,
                               const RenderConfig& cfg) {
  PixelResult r;
  Vec3 num = cfg.lc_background_weight * cfg.background;
  double den = cfg.lc_background_weight;
  for (std::uint32_t idx : entries) {
    const SplatPrimitive& p = prims[idx];
    const double a = eval_alpha(p.splat, p.opacity, px, py, cfg.alpha_min);
    if (a <= 0.0) continue;
    ++r.trace.n_valid;
    ++r.trace.n_rendered;
    const double w = a * lc_weight(p.splat.depth, cfg.lc_tau);
    num += w * p.color;
    den += w;
  }
  r.color = den < cfg.denom_floor ? cfg.background : Vec3(num / den);
  return r;
}

/// Cell-level physical weighted sum. Cells are visited in depth order; cell n
/// gets weight w_n = v_n · T_n, with T_n the product of (1 - v_i α_{i,k}) over
/// all slots of earlier cells. Stops once T < ε. A pixel whose denominator
/// stays under denom_floor shows the background.
inline PixelResult blend_duplex(std::span<const std::uint32_t> cell_order,
                                std::span<const CellSlots> cells,
                                std::span<const SplatPrimitive> prims, int px, int py,
                                const RenderConfig& cfg, TraceMode mode = TraceMode::Full) {
  PixelResult r;
  Vec3 num = Vec3::Zero();
  double den = 0.0;
  double t = 1.0;
  bool done = false;
  for (std::uint32_t ci : cell_order) {
    const CellSlots& cell = cells[ci];
    const double v = cell.blend_weight;
    const double w = v * t;
    double cell_t = 1.0;
    for (std::uint32_t k = 0; k < cell.count; ++k) {
      const SplatPrimitive& p = prims[cell.first + k];
      const double a = eval_alpha(p.splat, p.opacity, px, py, cfg.alpha_min);
      if (a <= 0.0) continue;
      ++r.trace.n_valid;
      if (done) continue;
      ++r.trace.n_rendered;
      num += (w * a) * p.color;
      den += w * a;
      cell_t *= 1.0 - v * a;
    }
    if (done) continue;
    t *= cell_t;
    if (t < cfg.et_epsilon) {
      done = true;
      if (mode == TraceMode::Off) break;
    }
  }
  r.color = den < cfg.denom_floor ? cfg.background : Vec3(num / den);
  r.trace.final_T = t;
  return r;
}

/// Depth-ordered primitive list for the oracle. Depth is the exact (double)
/// view-space z of the Gaussian center; ties keep definition order.
inline std::vector<SplatPrimitive> oracle_order(std::vector<SplatPrimitive> prims) {
  std::stable_sort(prims.begin(), prims.end(), [](const SplatPrimitive& a, const SplatPrimitive& b) {
    return a.splat.depth < b.splat.depth;
  });
  return prims;
}

/// Brute-force composite of one pixel over every primitive in `sorted`: no
/// tiles, no AABB skip, no early termination.
inline PixelResult oracle_pixel(std::span<const SplatPrimitive> sorted, int px, int py,
                                const RenderConfig& cfg) {
  PixelResult r;
  double t = 1.0;
  for (const SplatPrimitive& p : sorted) {
    const double a = kernel_alpha(p.splat, p.opacity, px, py);
    if (a < cfg.alpha_min || a <= 0.0) continue;
    ++r.trace.n_valid;
    ++r.trace.n_rendered;
    r.color += (t * a) * p.color;
    t *= 1.0 - a;
  }
  r.color += t * cfg.background;
  r.trace.final_T = t;
  return r;
}

}  // namespace duplex
