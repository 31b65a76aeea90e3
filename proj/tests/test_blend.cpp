// Copyright Contributors to the duplex-splat Project
// SPDX-License-Identifier: Apache-2.0

#include "duplex/blend.hpp"
#include "duplex/render.hpp"
#include "duplex/scene_gen.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

namespace duplex {
namespace {

constexpr double kTol = 1e-9;

/// Splat centered on pixel (0,0) with an identity conic and a generous box.
SplatPrimitive flat_splat(double opacity, const Vec3& color, double depth = 1.0) {
  SplatPrimitive p;
  p.splat.mean2d = Vec2(0.5, 0.5);
  p.splat.conic = {1.0, 0.0, 1.0};
  p.splat.cov2d = Mat2::Identity();
  p.splat.depth = depth;
  p.splat.aabb = {0, 0, 8, 8};
  p.opacity = opacity;
  p.color = color;
  return p;
}

std::vector<std::uint32_t> iota_order(std::size_t n) {
  std::vector<std::uint32_t> v(n);
  std::iota(v.begin(), v.end(), 0u);
  return v;
}

TEST(EvalAlpha, PeakEqualsOpacity) {
  EXPECT_NEAR(eval_alpha(flat_splat(0.8, Vec3::Zero()).splat, 0.8, 0, 0, 0.0), 0.8, kTol);
}

TEST(EvalAlpha, UnitConicOnePixelAway) {
  const SplatPrimitive p = flat_splat(1.0, Vec3::Zero());
  EXPECT_NEAR(eval_alpha(p.splat, 1.0, 1, 0, 0.0), std::exp(-0.5), kTol);
}

TEST(EvalAlpha, OutsideBoxIsZero) {
  SplatPrimitive p = flat_splat(1.0, Vec3::Zero());
  p.splat.aabb = {2, 2, 4, 4};
  EXPECT_EQ(eval_alpha(p.splat, 1.0, 0, 0, 0.0), 0.0);
  EXPECT_GT(kernel_alpha(p.splat, 1.0, 0, 0), 0.9);
}

TEST(EvalAlpha, ClampedAndThresholded) {
  const SplatPrimitive p = flat_splat(1.0, Vec3::Zero());
  EXPECT_EQ(eval_alpha(p.splat, 1.0, 0, 0, 0.0), kMaxAlpha);
  // exp(-0.5 * 16) ~ 3.4e-4 < 1/255
  EXPECT_EQ(eval_alpha(p.splat, 1.0, 4, 0, 1.0 / 255.0), 0.0);
}

TEST(AlphaReference, SingleOpaqueGaussian) {
  const std::vector<SplatPrimitive> prims{flat_splat(1.0, Vec3(1, 0, 0))};
  const PixelResult r = blend_alpha_reference(iota_order(1), prims, 0, 0, RenderConfig{});
  EXPECT_LT((r.color - Vec3(0.99, 0, 0)).norm(), kTol);
  EXPECT_EQ(r.trace.n_rendered, 1u);
}

TEST(AlphaReference, TwoHalfTransparentLayers) {
  const std::vector<SplatPrimitive> prims{flat_splat(0.5, Vec3(1, 0, 0), 1.0),
                                          flat_splat(0.5, Vec3(0, 1, 0), 2.0)};
  const PixelResult r = blend_alpha_reference(iota_order(2), prims, 0, 0, RenderConfig{});
  EXPECT_LT((r.color - Vec3(0.5, 0.25, 0)).norm(), kTol);
  EXPECT_NEAR(r.trace.final_T, 0.25, kTol);
}

TEST(AlphaReference, EmptyListShowsBackground) {
  RenderConfig cfg;
  cfg.background = Vec3(0.2, 0.3, 0.4);
  const PixelResult r = blend_alpha_reference({}, {}, 0, 0, cfg);
  EXPECT_EQ(r.color, cfg.background);
  EXPECT_EQ(r.trace.n_valid, 0u);
}

TEST(AlphaReference, TerminationStopsBlendingButKeepsCounting) {
  std::vector<SplatPrimitive> prims;
  for (int i = 0; i < 6; ++i) prims.push_back(flat_splat(0.9, Vec3(1, 1, 1), 1.0 + i));
  RenderConfig cfg;
  cfg.et_epsilon = 2e-3;
  const PixelResult full = blend_alpha_reference(iota_order(6), prims, 0, 0, cfg, TraceMode::Full);
  EXPECT_EQ(full.trace.n_rendered, 3u);
  EXPECT_EQ(full.trace.n_valid, 6u);
  const PixelResult off = blend_alpha_reference(iota_order(6), prims, 0, 0, cfg, TraceMode::Off);
  EXPECT_EQ(off.color, full.color);
  EXPECT_EQ(off.trace.n_rendered, 3u);
}

TEST(LcWsr, WeightVanishesAtTau) {
  RenderConfig cfg;
  cfg.lc_tau = 5.0;
  cfg.background = Vec3(0.1, 0.1, 0.1);
  const std::vector<SplatPrimitive> prims{flat_splat(0.8, Vec3(1, 0, 0), 5.0)};
  EXPECT_EQ(blend_lcwsr(iota_order(1), prims, 0, 0, cfg).color, cfg.background);
  EXPECT_EQ(lc_weight(5.0, 5.0), 0.0);
  EXPECT_EQ(lc_weight(7.0, 5.0), 0.0);
  EXPECT_NEAR(lc_weight(1.0, 4.0), 0.75, kTol);
}

TEST(LcWsr, SinglePrimitiveGivesItsColor) {
  const std::vector<SplatPrimitive> prims{flat_splat(1.0, Vec3(0.3, 0.6, 0.9), 1e-9)};
  EXPECT_LT((blend_lcwsr(iota_order(1), prims, 0, 0, RenderConfig{}).color - Vec3(0.3, 0.6, 0.9)).norm(),
            kTol);
}

TEST(LcWsr, BackgroundWeightEntersNormalization) {
  RenderConfig cfg;
  cfg.lc_tau = 10.0;
  cfg.lc_background_weight = 0.5;
  cfg.background = Vec3(0, 0, 1);
  const std::vector<SplatPrimitive> prims{flat_splat(0.5, Vec3(1, 0, 0), 5.0)};
  // w = 0.5 * (1 - 0.5) = 0.25
  const Vec3 expected = (0.5 * Vec3(0, 0, 1) + 0.25 * Vec3(1, 0, 0)) / 0.75;
  EXPECT_LT((blend_lcwsr(iota_order(1), prims, 0, 0, cfg).color - expected).norm(), kTol);
}

TEST(LcWsr, PermutationInvariant) {
  SplitMix64 rng(6);
  std::vector<SplatPrimitive> prims;
  for (int i = 0; i < 12; ++i)
    prims.push_back(flat_splat(rng.uniform(0.1, 1), Vec3(rng.uniform(), rng.uniform(), rng.uniform()),
                               rng.uniform(0.5, 20)));
  std::vector<std::uint32_t> order = iota_order(prims.size());
  const Vec3 ref = blend_lcwsr(order, prims, 0, 0, RenderConfig{}).color;
  for (int t = 0; t < 20; ++t) {
    std::shuffle(order.begin(), order.end(), rng);
    EXPECT_LT((blend_lcwsr(order, prims, 0, 0, RenderConfig{}).color - ref).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Duplex, TwoCellsHalfAlpha) {
  const Vec3 c1(1, 0, 0), c2(0, 0, 1);
  const std::vector<SplatPrimitive> prims{flat_splat(0.5, c1, 1.0), flat_splat(0.5, c2, 2.0)};
  const std::vector<CellSlots> cells{{0, 1, 1.0}, {1, 1, 1.0}};
  const PixelResult r = blend_duplex(iota_order(2), cells, prims, 0, 0, RenderConfig{});
  const Vec3 expected = (0.5 * c1 + 0.25 * c2) / 0.75;
  EXPECT_LT((r.color - expected).norm(), kTol);
  EXPECT_NEAR(r.trace.final_T, 0.25, kTol);
}

TEST(Duplex, NoCoverageShowsBackground) {
  RenderConfig cfg;
  cfg.background = Vec3(0.5, 0.5, 0.5);
  std::vector<SplatPrimitive> prims{flat_splat(0.5, Vec3(1, 0, 0))};
  prims[0].splat.aabb = {4, 4, 8, 8};
  const std::vector<CellSlots> cells{{0, 1, 1.0}};
  EXPECT_EQ(blend_duplex(iota_order(1), cells, prims, 0, 0, cfg).color, cfg.background);
}

TEST(Duplex, OpaqueFrontCellHidesRearCells) {
  std::vector<SplatPrimitive> prims;
  for (int k = 0; k < 3; ++k) prims.push_back(flat_splat(0.99, Vec3(1, 0, 0), 1.0));
  for (int k = 0; k < 3; ++k) prims.push_back(flat_splat(0.9, Vec3(0, 1, 0), 2.0));
  const std::vector<CellSlots> cells{{0, 3, 1.0}, {3, 3, 1.0}};
  const PixelResult r = blend_duplex(iota_order(2), cells, prims, 0, 0, RenderConfig{});
  EXPECT_LT((r.color - Vec3(1, 0, 0)).cwiseAbs().maxCoeff(), 1e-3);
  EXPECT_EQ(r.trace.n_rendered, 3u);
  EXPECT_EQ(r.trace.n_valid, 6u);
}

TEST(Duplex, BlendWeightScalesCellContribution) {
  const Vec3 c1(1, 0, 0), c2(0, 1, 0);
  const std::vector<SplatPrimitive> prims{flat_splat(0.5, c1, 1.0), flat_splat(0.5, c2, 2.0)};
  const std::vector<CellSlots> cells{{0, 1, 0.5}, {1, 1, 1.0}};
  // w1 = 0.5, T2 = 1 - 0.5 * 0.5 = 0.75, w2 = 0.75
  const Vec3 expected = (0.5 * 0.5 * c1 + 0.75 * 0.5 * c2) / (0.25 + 0.375);
  EXPECT_LT((blend_duplex(iota_order(2), cells, prims, 0, 0, RenderConfig{}).color - expected).norm(), kTol);
}

std::vector<SplatPrimitive> random_cells(SplitMix64& rng, int n_cells, int k,
                                         std::vector<CellSlots>& cells) {
  std::vector<SplatPrimitive> prims;
  for (int c = 0; c < n_cells; ++c) {
    cells.push_back({static_cast<std::uint32_t>(prims.size()), static_cast<std::uint32_t>(k),
                     rng.uniform(0.2, 1.0)});
    for (int j = 0; j < k; ++j) {
      SplatPrimitive p = flat_splat(rng.uniform(0.0, 1.0), Vec3(rng.uniform(), rng.uniform(), rng.uniform()),
                                    1.0 + c);
      p.splat.mean2d = Vec2(rng.uniform(-1, 2), rng.uniform(-1, 2));
      prims.push_back(p);
    }
  }
  return prims;
}

TEST(Duplex, SlotPermutationInvariance) {
  SplitMix64 rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<CellSlots> cells;
    std::vector<SplatPrimitive> prims = random_cells(rng, 6, 5, cells);
    const RenderConfig cfg;
    const PixelResult ref = blend_duplex(iota_order(cells.size()), cells, prims, 0, 0, cfg);
    for (const CellSlots& c : cells)
      std::shuffle(prims.begin() + c.first, prims.begin() + c.first + c.count, rng);
    const PixelResult perm = blend_duplex(iota_order(cells.size()), cells, prims, 0, 0, cfg);
    EXPECT_LT((perm.color - ref.color).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(Duplex, TransmittanceIsMonotone) {
  SplitMix64 rng(22);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<CellSlots> cells;
    const std::vector<SplatPrimitive> prims = random_cells(rng, 8, 4, cells);
    RenderConfig cfg;
    cfg.et_epsilon = 0.0;
    double prev = 1.0;
    for (std::size_t n = 1; n <= cells.size(); ++n) {
      const double t = blend_duplex(iota_order(n), cells, prims, 0, 0, cfg).trace.final_T;
      EXPECT_LE(t, prev);
      EXPECT_GE(t, 0.0);
      prev = t;
    }
  }
}

TEST(Duplex, EpsilonOnlyAffectsTerminatedPixels) {
  SplitMix64 rng(23);
  int terminated = 0;
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<CellSlots> cells;
    const std::vector<SplatPrimitive> prims = random_cells(rng, 12, 1, cells);
    for (CellSlots& c : cells) c.blend_weight = 1.0;
    RenderConfig exact;
    exact.et_epsilon = 0.0;
    RenderConfig early;
    early.et_epsilon = 1e-2;
    const PixelResult a = blend_duplex(iota_order(cells.size()), cells, prims, 0, 0, exact);
    const PixelResult b = blend_duplex(iota_order(cells.size()), cells, prims, 0, 0, early);
    if (b.trace.final_T >= early.et_epsilon) {
      EXPECT_EQ(a.color, b.color);
    } else {
      // One slot per cell: the skipped weight mass telescopes to at most ε.
      ++terminated;
      const double eps = early.et_epsilon;
      EXPECT_LE((a.color - b.color).cwiseAbs().maxCoeff(), eps / (1.0 - eps));
    }
  }
  EXPECT_GT(terminated, 0);
}

TEST(Duplex, AgreesWithAlphaBlendingInOpaqueLimit) {
  SplitMix64 rng(24);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<SplatPrimitive> prims;
    std::vector<CellSlots> cells;
    for (int i = 0; i < 8; ++i) {
      prims.push_back(flat_splat(rng.uniform(0.95, 1.0), Vec3(rng.uniform(), rng.uniform(), rng.uniform()),
                                 1.0 + i));
      cells.push_back({static_cast<std::uint32_t>(i), 1, 1.0});
    }
    RenderConfig cfg;
    const PixelResult ref = blend_alpha_reference(iota_order(8), prims, 0, 0, cfg);
    ASSERT_LE(ref.trace.final_T, 1e-3);
    const PixelResult dup = blend_duplex(iota_order(8), cells, prims, 0, 0, cfg);
    EXPECT_LT((dup.color - ref.color).cwiseAbs().maxCoeff(), 1e-2);
  }
}

TEST(Oracle, SingleGaussianMatchesTiledReference) {
  Scene s;
  s.slots_per_cell = 1;
  CellProxy c;
  c.center = Vec3(0.2, -0.1, 0);
  c.structure_scales = Vec3(0.8, 0.5, 0.4);
  c.slots.resize(1);
  c.slots[0].scale_ratio = Vec3(0.7, 0.9, 0.5);
  c.slots[0].opacity = 0.7;
  c.slots[0].color = Vec3(0.2, 0.9, 0.4);
  s.cells.push_back(c);
  const Camera cam = gen_orbit(Vec3::Zero(), 4.0, 1, 48, 40)[0];
  RenderConfig ref;
  ref.kernel = Kernel::AlphaRef;
  RenderConfig orc;
  orc.kernel = Kernel::Oracle;
  const RenderResult a = render_frame(s, cam, ref);
  const RenderResult o = render_frame(s, cam, orc);
  for (int y = 0; y < cam.height; ++y)
    for (int x = 0; x < cam.width; ++x) {
      const auto& t = a.traces[static_cast<std::size_t>(y) * cam.width + x];
      if (t.n_valid == 1) EXPECT_EQ(a.image.pixel(x, y), o.image.pixel(x, y));
    }
}

TEST(Oracle, DefinitionOrderIrrelevantForSeparatedGaussians) {
  std::vector<Gaussian3D> gs(2);
  gs[0].center = Vec3(-1, 0, 3);
  gs[0].scale = Vec3::Constant(0.1);
  gs[0].opacity = 0.8;
  gs[0].color = Vec3(1, 0, 0);
  gs[1].center = Vec3(1, 0, 6);
  gs[1].scale = Vec3::Constant(0.1);
  gs[1].opacity = 0.6;
  gs[1].color = Vec3(0, 1, 0);
  std::vector<Gaussian3D> swapped{gs[1], gs[0]};
  Camera cam;
  cam.width = cam.height = 32;
  cam.focal = Vec2(30, 30);
  cam.principal_point = Vec2(16, 16);
  const RenderConfig cfg;
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x)
      EXPECT_EQ(oracle_pixel(gs, x, y, cam, cfg).color, oracle_pixel(swapped, x, y, cam, cfg).color);
}

}  // namespace
}  // namespace duplex
