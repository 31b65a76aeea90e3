// Copyright Contributors to the duplex-splat Project
// SPDX-License-Identifier: Apache-2.0
//
// Expansion of cells into their constrained Gaussians, plus the geometric
// maintenance passes (quaternion aggregation, recentering, offset reset).

#pragma once

#include "duplex/scene.hpp"

#include <vector>

namespace duplex {

/// Smallest scale ratio a decoded Gaussian may end up with. Only reachable for
/// offsets on the cell boundary, which a valid scene never stores.
inline constexpr double kMinScaleRatio = 1e-3;

/// Below this norm the opacity-weighted quaternion sum is considered cancelled.
inline constexpr double kDegenerateQuatSum = 1e-9;

class DegenerateSum : public Error {
 public:
  DegenerateSum() : Error("opacity-weighted quaternion sum vanishes") {}
};

struct DecodedCell {
  std::size_t cell_index = 0;
  std::vector<Gaussian3D> gaussians;
};

/// Scale ratio after the offset clamp: min(ratio, 1 - |offset|) per component.
inline Vec3 effective_scale_ratio(const SlotAttributes& slot) {
  const double bound = std::max(scale_ratio_bound(slot.pos_offset), kMinScaleRatio);
  return slot.scale_ratio.cwiseMin(bound);
}

/// World-space center of a slot: x_n + R(Q_n) (offset ⊙ S_n).
inline Vec3 slot_center(const CellProxy& cell, const SlotAttributes& slot) {
  return cell.center +
         cell.quaternion.to_matrix() * slot.pos_offset.cwiseProduct(cell.structure_scales);
}

inline Gaussian3D decode_slot(const CellProxy& cell, const SlotAttributes& slot) {
  Gaussian3D g;
  g.center = slot_center(cell, slot);
  g.scale = effective_scale_ratio(slot).cwiseProduct(cell.structure_scales);
  g.rotation = slot.rotation;
  g.opacity = slot.opacity;
  g.color = slot.color;
  return g;
}

inline DecodedCell decode_cell(const CellProxy& cell, std::size_t cell_index = 0) {
  DecodedCell out{cell_index, {}};
  out.gaussians.reserve(cell.slots.size());
  for (const SlotAttributes& slot : cell.slots) out.gaussians.push_back(decode_slot(cell, slot));
  return out;
}

inline std::vector<Gaussian3D> decode_scene(const Scene& scene) {
  std::vector<Gaussian3D> out;
  out.reserve(scene.cells.size() * scene.slots_per_cell);
  for (const CellProxy& c : scene.cells)
    for (const SlotAttributes& s : c.slots) out.push_back(decode_slot(c, s));
  return out;
}

/// Normalized opacity-weighted sum of the slot quaternions, sign fixed to w >= 0.
inline Quat aggregate_quaternion(const CellProxy& cell) {
  Quat sum{0.0, 0.0, 0.0, 0.0};
  for (const SlotAttributes& s : cell.slots) sum = sum + s.rotation * s.opacity;
  const double n = sum.norm();
  if (!(n >= kDegenerateQuatSum)) throw DegenerateSum();
  Quat q = sum * (1.0 / n);
  if (q.w < 0.0) q = -q;
  return q;
}

namespace detail {

/// Offsets are clamped to [-1,1] per component and then pulled inside the ball
/// that still leaves room for kMinScaleRatio; the scale ratios are re-clamped
/// against the new offsets.
inline bool reclamp_slot(SlotAttributes& slot) {
  const Vec3 before = slot.pos_offset;
  slot.pos_offset = slot.pos_offset.cwiseMax(-1.0).cwiseMin(1.0);
  const double limit = 1.0 - kMinScaleRatio;
  const double n = slot.pos_offset.norm();
  if (n > limit) slot.pos_offset *= limit / n;
  slot.scale_ratio = effective_scale_ratio(slot);
  return slot.pos_offset != before;
}

/// Re-expresses world-space slot centers as offsets of `cell`.
inline bool rebase_offsets(CellProxy& cell, const std::vector<Vec3>& centers) {
  const Mat3 inv = cell.quaternion.to_matrix().inverse();
  bool clamped = false;
  for (std::size_t k = 0; k < cell.slots.size(); ++k) {
    cell.slots[k].pos_offset = (inv * (centers[k] - cell.center)).cwiseQuotient(cell.structure_scales);
    clamped |= reclamp_slot(cell.slots[k]);
  }
  return clamped;
}

inline std::vector<Vec3> slot_centers(const CellProxy& cell) {
  std::vector<Vec3> out;
  out.reserve(cell.slots.size());
  for (const SlotAttributes& s : cell.slots) out.push_back(slot_center(cell, s));
  return out;
}

}  // namespace detail

/// Moves the cell center to the mean of its decoded Gaussian centers and
/// rewrites the offsets so those centers stay put (unless a clamp fires).
inline CellProxy recenter_cell(const CellProxy& cell) {
  if (cell.slots.empty()) return cell;
  const std::vector<Vec3> centers = detail::slot_centers(cell);
  Vec3 mean = Vec3::Zero();
  for (const Vec3& c : centers) mean += c;
  mean /= static_cast<double>(centers.size());

  CellProxy out = cell;
  out.center = mean;
  detail::rebase_offsets(out, centers);
  return out;
}

/// Sets Q_n to the aggregate of the slot quaternions, keeping Gaussian centers.
inline CellProxy realign_quaternion(const CellProxy& cell) {
  const std::vector<Vec3> centers = detail::slot_centers(cell);
  CellProxy out = cell;
  out.quaternion = aggregate_quaternion(cell);
  detail::rebase_offsets(out, centers);
  return out;
}

/// Quaternion realignment followed by recentering.
inline CellProxy maintain_cell(const CellProxy& cell) {
  return recenter_cell(realign_quaternion(cell));
}

inline CellProxy reset_offsets(const CellProxy& cell) {
  CellProxy out = cell;
  for (SlotAttributes& s : out.slots) s.pos_offset = Vec3::Zero();
  return out;
}

}  // namespace duplex
