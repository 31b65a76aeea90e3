// Copyright Contributors to the duplex-splat Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "duplex/core.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace duplex {

enum class Kernel {
  AlphaRef,   ///< tiled, depth-sorted front-to-back alpha blending
  LcWsr,      ///< linear-correction weighted sum, order free
  DuplexWsr,  ///< cell-sorted physical weighted sum with early termination
  Oracle,     ///< brute-force per-pixel composite, no tiling
};

inline std::string_view to_string(Kernel k) {
  switch (k) {
    case Kernel::AlphaRef: return "alpharef";
    case Kernel::LcWsr: return "lcwsr";
    case Kernel::DuplexWsr: return "duplex";
    case Kernel::Oracle: return "oracle";
  }
  return "unknown";
}

inline std::optional<Kernel> parse_kernel(std::string_view name) {
  if (name == "alpharef") return Kernel::AlphaRef;
  if (name == "lcwsr") return Kernel::LcWsr;
  if (name == "duplex") return Kernel::DuplexWsr;
  if (name == "oracle") return Kernel::Oracle;
  return std::nullopt;
}

/// Kernel choice and every numeric knob of the blending stage.
struct RenderConfig {
  Kernel kernel = Kernel::DuplexWsr;
  int tile_size = 16;
  double et_epsilon = 1e-4;
  double alpha_min = 1.0 / 255.0;
  Vec3 background = Vec3::Zero();
  double lc_tau = 100.0;
  /// Background weight of the linear-correction kernel.
  double lc_background_weight = 0.0;
  double denom_floor = 1e-6;

  /// Empty string when valid, otherwise a description of the first problem.
  std::string check() const {
    if (tile_size != 8 && tile_size != 16 && tile_size != 32) return "tile_size must be 8, 16 or 32";
    if (!(et_epsilon >= 0.0 && et_epsilon < 1.0)) return "et_epsilon must lie in [0,1)";
    if (!(alpha_min >= 0.0)) return "alpha_min must be >= 0";
    if (!(lc_tau > 0.0)) return "lc_tau must be > 0";
    if (!(lc_background_weight >= 0.0)) return "lc_background_weight must be >= 0";
    if (!(denom_floor > 0.0)) return "denom_floor must be > 0";
    if (!background.allFinite()) return "background must be finite";
    return {};
  }
};

}  // namespace duplex
