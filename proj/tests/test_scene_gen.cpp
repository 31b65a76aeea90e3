// Copyright Contributors to the duplex-splat Project
// SPDX-License-Identifier: Apache-2.0

#include "duplex/metrics.hpp"
#include "duplex/render.hpp"
#include "duplex/scene_gen.hpp"
#include "duplex/scene_io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

namespace duplex {
namespace {

bool same_bytes(const Scene& a, const Scene& b) { return encode_scene(a) == encode_scene(b); }

TEST(SplitMix, ReferenceOutputsForSeedZero) {
  SplitMix64 rng(0);
  EXPECT_EQ(rng(), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(rng(), 0x6e789e6aa1b965f4ULL);
  EXPECT_EQ(rng(), 0x06c45d188009454fULL);
}

TEST(SplitMix, CounterAccessMatchesStream) {
  SplitMix64 rng(123456789);
  for (std::uint64_t i = 0; i < 100; ++i) EXPECT_EQ(rng(), SplitMix64::at(123456789, i));
}

TEST(SplitMix, UniformInUnitInterval) {
  SplitMix64 rng(1);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000, 0.5, 0.01);
}

TEST(RandomRotation, UnitAndCanonical) {
  SplitMix64 rng(2);
  for (int i = 0; i < 1000; ++i) {
    const Quat q = random_rotation(rng);
    EXPECT_NEAR(q.norm(), 1.0, 1e-12);
    EXPECT_GE(q.w, 0.0);
  }
}

TEST(RandomCells, LargeSceneIsValid) {
  const Scene s = gen_random_cells(1, 1000, 10, 20.0);
  EXPECT_EQ(s.cells.size(), 1000u);
  EXPECT_EQ(s.slots_per_cell, 10u);
  EXPECT_FALSE(validate_scene(s).has_value());
  for (const CellProxy& c : s.cells) EXPECT_LE(c.center.cwiseAbs().maxCoeff(), 10.0);
}

TEST(RandomCells, ZeroExtentIsCoCenteredAndValid) {
  const Scene s = gen_random_cells(2, 50, 3, 0.0);
  EXPECT_FALSE(validate_scene(s).has_value());
  for (const CellProxy& c : s.cells) EXPECT_EQ(c.center, Vec3::Zero());
}

TEST(RandomCells, DeterministicUnderSeed) {
  EXPECT_TRUE(same_bytes(gen_random_cells(9, 40, 4, 3.0), gen_random_cells(9, 40, 4, 3.0)));
  EXPECT_FALSE(same_bytes(gen_random_cells(9, 40, 4, 3.0), gen_random_cells(10, 40, 4, 3.0)));
}

TEST(RandomCells, ValidAcrossManySeeds) {
  for (std::uint64_t seed = 0; seed < 50; ++seed)
    EXPECT_FALSE(validate_scene(gen_random_cells(seed, 20, 1 + seed % 7, 5.0)).has_value());
}

TEST(Orbit, QuarterTurns) {
  const std::vector<Camera> cams = gen_orbit(Vec3(1, 2, 3), 5.0, 4, 64, 64);
  ASSERT_EQ(cams.size(), 4u);
  const std::vector<Vec3> expected{Vec3(6, 2, 3), Vec3(1, 2, 8), Vec3(-4, 2, 3), Vec3(1, 2, -2)};
  for (int i = 0; i < 4; ++i) EXPECT_LT((cams[i].position() - expected[i]).norm(), 1e-9);
}

TEST(Orbit, DistanceAndLookDirection) {
  const Vec3 center(0.5, -1, 2);
  const std::vector<Camera> cams = gen_orbit(center, 7.5, 120, 64, 48);
  for (const Camera& cam : cams) {
    EXPECT_TRUE(cam.valid());
    EXPECT_NEAR((cam.position() - center).norm(), 7.5, 1e-9);
    EXPECT_LT((cam.project(cam.to_camera(center)) - Vec2(32, 24)).norm(), 1e-9);
  }
  for (std::size_t i = 1; i < cams.size(); ++i)
    EXPECT_GT((cams[i].position() - cams[0].position()).norm(), 1e-3);
}

TEST(Orbit, RejectsBadArguments) {
  EXPECT_THROW(gen_orbit(Vec3::Zero(), 0.0, 4, 8, 8), std::invalid_argument);
  EXPECT_THROW(gen_orbit(Vec3::Zero(), 1.0, 0, 8, 8), std::invalid_argument);
}

TEST(OpaqueWall, LayersColorsAndValidity) {
  const OpaqueWallOptions opt;
  const Scene s = gen_opaque_wall(3, 3, 4, opt);
  EXPECT_FALSE(validate_scene(s).has_value());
  int front = 0;
  for (const CellProxy& c : s.cells) {
    if (c.center.z() == 0.0) {
      ++front;
      for (const SlotAttributes& sl : c.slots) {
        EXPECT_EQ(sl.color, Vec3(1, 0, 0));
        EXPECT_NEAR(sl.opacity, 0.95, 1e-7);
      }
    } else {
      EXPECT_GT(c.center.z(), 0.0);
      for (const SlotAttributes& sl : c.slots) EXPECT_NE(sl.color, Vec3(1, 0, 0));
    }
  }
  EXPECT_EQ(front, opt.cells_per_side * opt.cells_per_side);
  EXPECT_TRUE(same_bytes(s, gen_opaque_wall(3, 3, 4, opt)));
  EXPECT_THROW(gen_opaque_wall(3, 1, 4, opt), std::invalid_argument);
}

TEST(OpaqueWall, RegionLiesInsideImage) {
  const OpaqueWallOptions opt;
  const Camera cam = opaque_wall_camera(opt, 128, 96);
  const PixelRect r = opaque_wall_region(opt, cam);
  EXPECT_FALSE(r.empty());
  EXPECT_TRUE(PixelRect({0, 0, 128, 96}).contains(r));
  EXPECT_GT(r.area(), 128 * 96 / 4);
}

double wall_leak(Kernel kernel, int layers, double front_opacity) {
  OpaqueWallOptions opt;
  opt.front_opacity = front_opacity;
  const Scene s = gen_opaque_wall(5, layers, 4, opt);
  const Camera cam = opaque_wall_camera(opt, 96, 96);
  RenderConfig cfg;
  cfg.kernel = kernel;
  const Image img = render_frame(s, cam, cfg).image;
  return region_leakage(img, opaque_wall_region(opt, cam), layer_color(0));
}

TEST(OpaqueWall, TransparentFrontRevealsRearLayer) {
  EXPECT_GT(wall_leak(Kernel::DuplexWsr, 2, 0.0), 0.5);
  EXPECT_GT(wall_leak(Kernel::AlphaRef, 2, 0.0), 0.5);
}

TEST(OpaqueWall, OrderFreeBlendLeaksWhileCellOrderDoesNot) {
  EXPECT_GT(wall_leak(Kernel::LcWsr, 2, 0.95), 0.05);
  EXPECT_LT(wall_leak(Kernel::DuplexWsr, 2, 0.95), 0.005);
  EXPECT_LT(wall_leak(Kernel::DuplexWsr, 3, 0.95), 0.005);
}

TEST(PoppingPair, TwoElongatedGaussiansInOneCell) {
  const Scene s = gen_popping_pair(4);
  EXPECT_FALSE(validate_scene(s).has_value());
  ASSERT_EQ(s.cells.size(), 1u);
  ASSERT_EQ(s.slots_per_cell, 2u);
  for (const SlotAttributes& sl : s.cells[0].slots) {
    const Vec3 scale = sl.scale_ratio.cwiseProduct(s.cells[0].structure_scales);
    EXPECT_GT(scale.y(), 2.5 * scale.x());
  }
  EXPECT_TRUE(same_bytes(s, gen_popping_pair(4)));
}

TEST(PoppingPair, CenterDepthOrderFlipsAlongOrbit) {
  const Scene s = gen_popping_pair(4);
  const Gaussian3D a = decode_slot(s.cells[0], s.cells[0].slots[0]);
  const Gaussian3D b = decode_slot(s.cells[0], s.cells[0].slots[1]);
  int flips = 0;
  const std::vector<Camera> cams = gen_orbit(Vec3::Zero(), 6.0, 120, 64, 64);
  bool prev = cams[0].to_camera(a.center).z() < cams[0].to_camera(b.center).z();
  for (const Camera& cam : cams) {
    const bool now = cam.to_camera(a.center).z() < cam.to_camera(b.center).z();
    flips += now != prev;
    prev = now;
  }
  EXPECT_EQ(flips, 2);
}

}  // namespace
}  // namespace duplex
