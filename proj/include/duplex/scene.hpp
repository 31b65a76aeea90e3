// Copyright Contributors to the duplex-splat Project
// SPDX-License-Identifier: Apache-2.0
//
// Scene model: Gaussians, cell proxies with their per-slot attribute tables,
// and the validator that every loaded or generated scene must pass.

#pragma once

#include "duplex/core.hpp"

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace duplex {

/// Tolerance used for unit-norm checks on stored quaternions.
inline constexpr double kUnitNormTolerance = 1e-6;

/// Slack on the offset/scale bound so that float32-stored scenes stay valid.
inline constexpr double kBoundTolerance = 1e-6;

/// One anisotropic primitive with view-independent RGB color.
struct Gaussian3D {
  Vec3 center = Vec3::Zero();
  Vec3 scale = Vec3::Ones();
  Quat rotation;
  double opacity = 1.0;
  Vec3 color = Vec3::Zero();
};

/// Explicit attribute table entry for one of the K Gaussians a cell emits.
///
/// `pos_offset` is expressed in cell-normalized coordinates (units of the
/// cell's structure scales, in the cell frame); `scale_ratio` multiplies the
/// structure scales componentwise. `rotation` is a world-frame orientation.
struct SlotAttributes {
  Vec3 pos_offset = Vec3::Zero();
  Vec3 scale_ratio = Vec3::Constant(0.5);
  Quat rotation;
  double opacity = 1.0;
  Vec3 color = Vec3::Zero();
};

/// Ellipsoidal proxy that owns K constrained Gaussians.
struct CellProxy {
  Vec3 center = Vec3::Zero();
  Vec3 structure_scales = Vec3::Ones();
  Quat quaternion;
  std::vector<SlotAttributes> slots;
  double blend_weight = 1.0;
};

struct Scene {
  std::uint32_t slots_per_cell = 0;
  std::vector<CellProxy> cells;

  bool empty() const { return cells.empty(); }
  std::size_t size() const { return cells.size(); }
};

/// Upper bound on a slot's scale ratio given its offset; zero once the offset
/// reaches the cell boundary.
inline double scale_ratio_bound(const Vec3& pos_offset) {
  return std::max(0.0, 1.0 - pos_offset.norm());
}

enum class ValidationRule {
  EmptyScene,
  SlotCount,
  NonFinite,
  StructureScale,
  CellQuaternion,
  BlendWeight,
  OffsetRange,
  ScaleRatioRange,
  OffsetScaleBound,
  SlotQuaternion,
  SlotOpacity,
  SlotColor,
};

inline std::string_view to_string(ValidationRule rule) {
  switch (rule) {
    case ValidationRule::EmptyScene: return "empty scene";
    case ValidationRule::SlotCount: return "slot count differs from K";
    case ValidationRule::NonFinite: return "non-finite value";
    case ValidationRule::StructureScale: return "structure scale not positive";
    case ValidationRule::CellQuaternion: return "cell quaternion not unit";
    case ValidationRule::BlendWeight: return "blend weight outside (0,1]";
    case ValidationRule::OffsetRange: return "offset outside [-1,1]";
    case ValidationRule::ScaleRatioRange: return "scale ratio outside (0,1]";
    case ValidationRule::OffsetScaleBound: return "scale ratio exceeds 1 - |offset|";
    case ValidationRule::SlotQuaternion: return "slot rotation not unit";
    case ValidationRule::SlotOpacity: return "slot opacity outside [0,1]";
    case ValidationRule::SlotColor: return "slot color outside [0,1]";
  }
  return "unknown";
}

/// First invariant violation found by `validate_scene`.
struct Violation {
  std::size_t cell_index = 0;
  std::optional<std::size_t> slot_index;
  ValidationRule rule = ValidationRule::EmptyScene;

  std::string message() const {
    std::string m = "cell " + std::to_string(cell_index);
    if (slot_index) m += " slot " + std::to_string(*slot_index);
    m += ": ";
    m += to_string(rule);
    return m;
  }
};

/// Raised when a scene that must be valid (e.g. a loaded file) is not.
class InvalidScene : public Error {
 public:
  explicit InvalidScene(Violation v) : Error(v.message()), violation_(v) {}
  const Violation& violation() const noexcept { return violation_; }

 private:
  Violation violation_;
};

namespace detail {

inline bool in_unit_interval(double v) { return v >= 0.0 && v <= 1.0; }

inline bool unit_quat(const Quat& q) {
  return std::abs(q.norm() - 1.0) <= kUnitNormTolerance;
}

inline bool finite_quat(const Quat& q) {
  return std::isfinite(q.w) && std::isfinite(q.x) && std::isfinite(q.y) && std::isfinite(q.z);
}

inline std::optional<ValidationRule> check_slot(const SlotAttributes& s) {
  if (!s.pos_offset.allFinite() || !s.scale_ratio.allFinite() || !finite_quat(s.rotation) ||
      !std::isfinite(s.opacity) || !s.color.allFinite())
    return ValidationRule::NonFinite;
  if ((s.pos_offset.array().abs() > 1.0).any()) return ValidationRule::OffsetRange;
  if ((s.scale_ratio.array() <= 0.0).any() || (s.scale_ratio.array() > 1.0).any())
    return ValidationRule::ScaleRatioRange;
  if (s.scale_ratio.maxCoeff() > scale_ratio_bound(s.pos_offset) + kBoundTolerance)
    return ValidationRule::OffsetScaleBound;
  if (!unit_quat(s.rotation)) return ValidationRule::SlotQuaternion;
  if (!in_unit_interval(s.opacity)) return ValidationRule::SlotOpacity;
  if (!in_unit_interval(s.color.minCoeff()) || !in_unit_interval(s.color.maxCoeff()))
    return ValidationRule::SlotColor;
  return std::nullopt;
}

}  // namespace detail

/// Checks every cell against the scene-model invariants, in cell order then
/// slot order. Returns the first violation, or nullopt when the scene passes.
inline std::optional<Violation> validate_scene(std::span<const CellProxy> cells, std::size_t k) {
  if (cells.empty()) return Violation{0, std::nullopt, ValidationRule::EmptyScene};
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const CellProxy& c = cells[i];
    auto fail = [&](ValidationRule r) { return Violation{i, std::nullopt, r}; };
    if (k == 0 || c.slots.size() != k) return fail(ValidationRule::SlotCount);
    if (!c.center.allFinite() || !c.structure_scales.allFinite() ||
        !detail::finite_quat(c.quaternion) || !std::isfinite(c.blend_weight))
      return fail(ValidationRule::NonFinite);
    if ((c.structure_scales.array() <= 0.0).any()) return fail(ValidationRule::StructureScale);
    if (!detail::unit_quat(c.quaternion)) return fail(ValidationRule::CellQuaternion);
    if (!(c.blend_weight > 0.0 && c.blend_weight <= 1.0)) return fail(ValidationRule::BlendWeight);
    for (std::size_t j = 0; j < c.slots.size(); ++j) {
      if (auto rule = detail::check_slot(c.slots[j])) return Violation{i, j, *rule};
    }
  }
  return std::nullopt;
}

inline std::optional<Violation> validate_scene(const Scene& scene) {
  return validate_scene(scene.cells, scene.slots_per_cell);
}

/// Throwing form used at I/O boundaries.
inline void require_valid(const Scene& scene) {
  if (auto v = validate_scene(scene)) throw InvalidScene(*v);
}

}  // namespace duplex
