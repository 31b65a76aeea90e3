// Copyright Contributors to the duplex-splat Project
// SPDX-License-Identifier: Apache-2.0
//
// Frame pipeline: cull -> decode -> project -> bin -> sort -> blend.
//
// The cell kernel bins and sorts visible cells; the Gaussian-level kernels
// decode visible cells first and bin and sort every projected Gaussian. The
// oracle skips tiling entirely.

#pragma once

#include "duplex/blend.hpp"
#include "duplex/camera.hpp"
#include "duplex/config.hpp"
#include "duplex/decoder.hpp"
#include "duplex/image.hpp"
#include "duplex/projection.hpp"
#include "duplex/raster.hpp"
#include "duplex/scene.hpp"

#include <algorithm>
#include <atomic>
#include <span>
#include <chrono>
#include <functional>
#include <stdexcept>
#include <thread>
#include <vector>

namespace duplex {

struct StageTimings {
  double cull_ms = 0.0;
  double decode_ms = 0.0;
  double project_ms = 0.0;
  double bin_ms = 0.0;
  double sort_ms = 0.0;
  double blend_ms = 0.0;
  double total_ms = 0.0;

  double stage_sum() const { return cull_ms + decode_ms + project_ms + bin_ms + sort_ms + blend_ms; }
};

namespace detail {

class StageClock {
 public:
  StageClock() : start_(std::chrono::steady_clock::now()), last_(start_) {}
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double ms = std::chrono::duration<double, std::milli>(now - last_).count();
    last_ = now;
    return ms;
  }
  /// Milliseconds from construction to the most recent lap.
  double total() const { return std::chrono::duration<double, std::milli>(last_ - start_).count(); }

 private:
  std::chrono::steady_clock::time_point start_;
  std::chrono::steady_clock::time_point last_;
};

/// Runs `fn(i)` for i in [0, n) on up to `threads` workers. Work items must
/// write disjoint outputs.
inline void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(std::max(threads, 1), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
}

inline void check_inputs(const Camera& cam, const RenderConfig& cfg) {
  if (!cam.valid()) throw std::invalid_argument("invalid camera");
  if (const std::string msg = cfg.check(); !msg.empty()) throw std::invalid_argument(msg);
}

}  // namespace detail

/// Everything the blend stage needs for one view.
struct PreparedFrame {
  Kernel kernel = Kernel::DuplexWsr;
  Camera camera;
  std::vector<SplatPrimitive> prims;
  /// Visible cells (cell kernel only), parallel to `cell_splats`.
  std::vector<CellSlots> cells;
  std::vector<CellSplat> cell_splats;
  /// Tile lists index `cells` for the cell kernel and `prims` otherwise.
  FrameWorkload workload;
  StageTimings timings;
};

namespace detail {

inline void append_projected(const CellProxy& cell, const Camera& cam, double det_floor,
                             std::vector<SplatPrimitive>& out) {
  for (const SlotAttributes& slot : cell.slots) {
    const Gaussian3D g = decode_slot(cell, slot);
    if (auto s = project_gaussian(g, cam, det_floor)) out.push_back({*s, g.opacity, g.color});
  }
}

}  // namespace detail

/// Culls, decodes, projects, bins and sorts one view. The oracle kernel gets
/// every projectable Gaussian in exact depth order and no tile lists.
inline PreparedFrame build_tile_workloads(const Scene& scene, const Camera& cam,
                                          const RenderConfig& cfg) {
  detail::check_inputs(cam, cfg);
  PreparedFrame f;
  f.kernel = cfg.kernel;
  f.camera = cam;
  detail::StageClock clock;

  if (cfg.kernel == Kernel::Oracle) {
    std::vector<Gaussian3D> gaussians = decode_scene(scene);
    f.timings.decode_ms = clock.lap();
    for (const Gaussian3D& g : gaussians)
      if (auto s = project_gaussian(g, cam, cfg.denom_floor)) f.prims.push_back({*s, g.opacity, g.color});
    f.prims = oracle_order(std::move(f.prims));
    f.timings.project_ms = clock.lap();
    f.workload.grid = TileGrid(cam.width, cam.height, cfg.tile_size);
    f.timings.total_ms = clock.total();
    return f;
  }

  f.cell_splats = frustum_cull(scene.cells, cam);
  f.timings.cull_ms = clock.lap();

  std::vector<Gaussian3D> decoded;
  decoded.reserve(f.cell_splats.size() * scene.slots_per_cell);
  std::vector<std::uint32_t> first_of_cell(f.cell_splats.size() + 1, 0);
  for (std::size_t i = 0; i < f.cell_splats.size(); ++i) {
    const CellProxy& cell = scene.cells[f.cell_splats[i].cell_index];
    first_of_cell[i] = static_cast<std::uint32_t>(decoded.size());
    for (const SlotAttributes& slot : cell.slots) decoded.push_back(decode_slot(cell, slot));
  }
  first_of_cell.back() = static_cast<std::uint32_t>(decoded.size());
  f.timings.decode_ms = clock.lap();

  f.prims.reserve(decoded.size());
  f.cells.reserve(f.cell_splats.size());
  for (std::size_t i = 0; i < f.cell_splats.size(); ++i) {
    CellSlots slots;
    slots.first = static_cast<std::uint32_t>(f.prims.size());
    slots.blend_weight = scene.cells[f.cell_splats[i].cell_index].blend_weight;
    for (std::uint32_t g = first_of_cell[i]; g < first_of_cell[i + 1]; ++g) {
      const Gaussian3D& gauss = decoded[g];
      if (auto s = project_gaussian(gauss, cam, cfg.denom_floor))
        f.prims.push_back({*s, gauss.opacity, gauss.color});
    }
    slots.count = static_cast<std::uint32_t>(f.prims.size()) - slots.first;
    f.cells.push_back(slots);
  }
  f.timings.project_ms = clock.lap();

  std::vector<BinInput> inputs;
  if (cfg.kernel == Kernel::DuplexWsr) {
    inputs.reserve(f.cell_splats.size());
    for (const CellSplat& c : f.cell_splats) inputs.push_back({c.aabb, c.depth});
  } else {
    inputs.reserve(f.prims.size());
    for (const SplatPrimitive& p : f.prims) inputs.push_back({p.splat.aabb, p.splat.depth});
  }
  const std::vector<BinEntry> binned = bin_splats(inputs, cam.width, cam.height, cfg.tile_size);
  f.timings.bin_ms = clock.lap();

  f.workload = sort_into_tiles(binned, TileGrid(cam.width, cam.height, cfg.tile_size));
  f.timings.sort_ms = clock.lap();
  f.timings.total_ms = clock.total();
  return f;
}

struct RenderOptions {
  int threads = 1;
  TraceMode trace_mode = TraceMode::Full;
};

struct RenderResult {
  Image image;
  /// One trace per pixel, row-major.
  std::vector<PixelTrace> traces;
  SortStats sort_stats;
  StageTimings timings;
  std::size_t visible_cells = 0;
  std::size_t primitives = 0;
};

/// Blends a prepared frame into an image.
inline RenderResult blend_frame(const PreparedFrame& f, const RenderConfig& cfg,
                                const RenderOptions& opt = {}) {
  const Camera& cam = f.camera;
  RenderResult r;
  r.image = Image(cam.width, cam.height);
  r.traces.assign(static_cast<std::size_t>(cam.width) * cam.height, PixelTrace{});
  for (int y = 0; y < cam.height; ++y)
    for (int x = 0; x < cam.width; ++x) r.image.set(x, y, cfg.background);

  detail::StageClock clock;
  auto store = [&](int x, int y, const PixelResult& p) {
    r.image.set(x, y, p.color);
    r.traces[static_cast<std::size_t>(y) * cam.width + x] = p.trace;
  };

  if (f.kernel == Kernel::Oracle) {
    detail::parallel_for(static_cast<std::size_t>(cam.height), opt.threads, [&](std::size_t row) {
      const int y = static_cast<int>(row);
      for (int x = 0; x < cam.width; ++x) store(x, y, oracle_pixel(f.prims, x, y, cfg));
    });
  } else {
    detail::parallel_for(f.workload.tiles.size(), opt.threads, [&](std::size_t i) {
      const TileWorkload& tile = f.workload.tiles[i];
      const std::span<const std::uint32_t> entries = f.workload.entries(tile);
      const PixelRect px = f.workload.grid.pixels(tile.tile_id, cam.width, cam.height);
      for (int y = px.y0; y < px.y1; ++y)
        for (int x = px.x0; x < px.x1; ++x) {
          switch (f.kernel) {
            case Kernel::AlphaRef:
              store(x, y, blend_alpha_reference(entries, f.prims, x, y, cfg, opt.trace_mode));
              break;
            case Kernel::LcWsr:
              store(x, y, blend_lcwsr(entries, f.prims, x, y, cfg));
              break;
            case Kernel::DuplexWsr:
              store(x, y, blend_duplex(entries, f.cells, f.prims, x, y, cfg, opt.trace_mode));
              break;
            case Kernel::Oracle:
              break;
          }
        }
    });
  }
  r.timings = f.timings;
  r.timings.blend_ms = clock.lap();
  r.timings.total_ms += r.timings.blend_ms;
  r.sort_stats = f.workload.stats;
  r.visible_cells = f.cell_splats.size();
  r.primitives = f.prims.size();
  return r;
}

inline RenderResult render_frame(const Scene& scene, const Camera& cam, const RenderConfig& cfg,
                                 const RenderOptions& opt = {}) {
  return blend_frame(build_tile_workloads(scene, cam, cfg), cfg, opt);
}

/// Single-pixel ground truth straight from decoded Gaussians.
inline PixelResult oracle_pixel(std::span<const Gaussian3D> gaussians, int px, int py,
                                const Camera& cam, const RenderConfig& cfg) {
  std::vector<SplatPrimitive> prims;
  for (const Gaussian3D& g : gaussians)
    if (auto s = project_gaussian(g, cam, cfg.denom_floor)) prims.push_back({*s, g.opacity, g.color});
  const std::vector<SplatPrimitive> sorted = oracle_order(std::move(prims));
  return oracle_pixel(sorted, px, py, cfg);
}

}  // namespace duplex
