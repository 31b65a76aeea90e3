// Copyright Contributors to the duplex-splat Project
// SPDX-License-Identifier: Apache-2.0
//
// Tile binning, (tile, depth) key packing and the instrumented LSD radix sort.

#pragma once

#include "duplex/core.hpp"
#include "duplex/projection.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace duplex {

class NonFiniteDepth : public Error {
 public:
  NonFiniteDepth() : Error("sort depth is not finite") {}
};

struct TileGrid {
  int tile_size = 16;
  int tiles_x = 0;
  int tiles_y = 0;

  TileGrid() = default;
  TileGrid(int width, int height, int tile)
      : tile_size(tile),
        tiles_x((width + tile - 1) / tile),
        tiles_y((height + tile - 1) / tile) {}

  std::uint32_t count() const { return static_cast<std::uint32_t>(tiles_x * tiles_y); }
  std::uint32_t id(int tx, int ty) const { return static_cast<std::uint32_t>(ty * tiles_x + tx); }
  int tile_x(std::uint32_t id) const { return static_cast<int>(id) % tiles_x; }
  int tile_y(std::uint32_t id) const { return static_cast<int>(id) / tiles_x; }

  /// Pixel rectangle of a tile, clipped to the image.
  PixelRect pixels(std::uint32_t id, int width, int height) const {
    const int x0 = tile_x(id) * tile_size;
    const int y0 = tile_y(id) * tile_size;
    return {x0, y0, std::min(x0 + tile_size, width), std::min(y0 + tile_size, height)};
  }
};

/// Anything with a clipped pixel AABB and a sort depth.
struct BinInput {
  PixelRect aabb;
  double depth = 0.0;
};

struct BinEntry {
  std::uint32_t tile_id = 0;
  std::uint32_t index = 0;
  double depth = 0.0;
};

/// One entry per (tile, primitive) overlap; primitives in input order, tiles
/// row-major within a primitive.
inline std::vector<BinEntry> bin_splats(std::span<const BinInput> inputs, int width, int height,
                                        int tile_size) {
  const TileGrid grid(width, height, tile_size);
  std::size_t total = 0;
  for (const BinInput& in : inputs) {
    if (in.aabb.empty()) continue;
    const long long nx = (in.aabb.x1 - 1) / tile_size - in.aabb.x0 / tile_size + 1;
    const long long ny = (in.aabb.y1 - 1) / tile_size - in.aabb.y0 / tile_size + 1;
    total += static_cast<std::size_t>(nx * ny);
  }
  std::vector<BinEntry> out;
  out.reserve(total);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const PixelRect& r = inputs[i].aabb;
    if (r.empty()) continue;
    for (int ty = r.y0 / tile_size; ty <= (r.y1 - 1) / tile_size; ++ty)
      for (int tx = r.x0 / tile_size; tx <= (r.x1 - 1) / tile_size; ++tx)
        out.push_back({grid.id(tx, ty), static_cast<std::uint32_t>(i), inputs[i].depth});
  }
  return out;
}

/// Order-preserving map from a positive float depth to an unsigned integer.
inline std::uint32_t depth_bits(double depth) {
  if (!std::isfinite(depth)) throw NonFiniteDepth();
  if (!(depth > 0.0)) throw std::domain_error("sort depth must be positive");
  return std::bit_cast<std::uint32_t>(static_cast<float>(depth));
}

/// High 32 bits: tile id. Low 32 bits: depth bit pattern.
inline std::uint64_t pack_key(std::uint32_t tile_id, double depth) {
  return (static_cast<std::uint64_t>(tile_id) << 32) | depth_bits(depth);
}

inline std::uint32_t key_tile(std::uint64_t key) { return static_cast<std::uint32_t>(key >> 32); }

/// Byte accounting of one radix sort invocation.
struct SortStats {
  std::uint64_t entries = 0;
  std::uint64_t key_bytes = sizeof(std::uint64_t);
  std::uint64_t payload_bytes = sizeof(std::uint32_t);
  std::uint64_t buffer_count = 2;
  std::uint64_t passes = 0;
  std::uint64_t histogram_bytes = 0;

  std::uint64_t memory_bytes() const {
    return entries * (key_bytes + payload_bytes) * buffer_count + histogram_bytes;
  }
};

inline constexpr int kRadixBits = 8;
inline constexpr int kRadixBuckets = 1 << kRadixBits;
inline constexpr int kRadixPasses = 64 / kRadixBits;

/// Stable LSD radix sort of `keys`, carrying `payloads` along. Eight passes of
/// 8-bit digits over a key/payload buffer pair; histograms for all passes are
/// built in one read of the input.
inline SortStats radix_sort(std::vector<std::uint64_t>& keys, std::vector<std::uint32_t>& payloads) {
  if (keys.size() != payloads.size()) throw std::invalid_argument("radix_sort: size mismatch");
  SortStats stats;
  stats.entries = keys.size();
  if (keys.empty()) return stats;

  std::vector<std::array<std::size_t, kRadixBuckets>> hist(kRadixPasses);
  for (auto& h : hist) h.fill(0);
  for (std::uint64_t k : keys)
    for (int p = 0; p < kRadixPasses; ++p) ++hist[p][(k >> (p * kRadixBits)) & (kRadixBuckets - 1)];

  std::vector<std::uint64_t> key_tmp(keys.size());
  std::vector<std::uint32_t> pay_tmp(payloads.size());
  for (int p = 0; p < kRadixPasses; ++p) {
    std::size_t running = 0;
    for (std::size_t& c : hist[p]) {
      const std::size_t n = c;
      c = running;
      running += n;
    }
    const int shift = p * kRadixBits;
    for (std::size_t i = 0; i < keys.size(); ++i) {
      const std::size_t dst = hist[p][(keys[i] >> shift) & (kRadixBuckets - 1)]++;
      key_tmp[dst] = keys[i];
      pay_tmp[dst] = payloads[i];
    }
    keys.swap(key_tmp);
    payloads.swap(pay_tmp);
  }

  stats.passes = kRadixPasses;
  stats.histogram_bytes = static_cast<std::uint64_t>(kRadixPasses) * kRadixBuckets * sizeof(std::size_t);
  return stats;
}

/// Contiguous, depth-ascending run of one tile inside the sorted payload array.
struct TileWorkload {
  std::uint32_t tile_id = 0;
  std::uint32_t begin = 0;
  std::uint32_t end = 0;

  std::uint32_t size() const { return end - begin; }
};

/// Sorted (tile, depth) order of all binned entries, cut into per-tile runs.
struct FrameWorkload {
  TileGrid grid;
  std::vector<std::uint64_t> keys;
  std::vector<std::uint32_t> order;
  std::vector<TileWorkload> tiles;
  SortStats stats;

  std::span<const std::uint32_t> entries(const TileWorkload& t) const {
    return std::span<const std::uint32_t>(order).subspan(t.begin, t.size());
  }
};

/// Packs, sorts and splits binned entries. Only non-empty tiles are listed.
inline FrameWorkload sort_into_tiles(std::span<const BinEntry> binned, const TileGrid& grid) {
  FrameWorkload w;
  w.grid = grid;
  w.keys.reserve(binned.size());
  w.order.reserve(binned.size());
  for (const BinEntry& e : binned) {
    w.keys.push_back(pack_key(e.tile_id, e.depth));
    w.order.push_back(e.index);
  }
  w.stats = radix_sort(w.keys, w.order);
  for (std::uint32_t i = 0; i < w.keys.size();) {
    const std::uint32_t tile = key_tile(w.keys[i]);
    std::uint32_t j = i + 1;
    while (j < w.keys.size() && key_tile(w.keys[j]) == tile) ++j;
    w.tiles.push_back({tile, i, j});
    i = j;
  }
  return w;
}

}  // namespace duplex
