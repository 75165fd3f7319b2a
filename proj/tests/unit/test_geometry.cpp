#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "pnsr/error.hpp"
#include "pnsr/geometry.hpp"
#include "test_util.hpp"

using namespace pnsr;

namespace {

Intrinsics cam(double f, double cx, double cy, int w, int h) { return {f, f, cx, cy, w, h}; }

bool within_ulps(double a, double b, int ulps) {
  double x = a;
  for (int i = 0; i < ulps; ++i) x = std::nextafter(x, b);
  return x == b;
}

}  // namespace

TEST(RescaleIntrinsics, IdentityScaleLeavesIntrinsicsUnchanged) {
  const Intrinsics in = cam(500, 160, 120, 320, 240);
  EXPECT_EQ(rescale_intrinsics(in, 320, 240), in);
}

TEST(RescaleIntrinsics, QuarterWidthScalesFocalAndCentre) {
  const Intrinsics out = rescale_intrinsics(cam(500, 160, 120, 320, 240), 80, 60);
  EXPECT_DOUBLE_EQ(out.fx, 125.0);
  EXPECT_DOUBLE_EQ(out.cx, 40.0);
  EXPECT_DOUBLE_EQ(out.fy, 125.0);
  EXPECT_DOUBLE_EQ(out.cy, 30.0);
  EXPECT_EQ(out.width, 80);
  EXPECT_EQ(out.height, 60);
}

TEST(RescaleIntrinsics, UpThenDownRoundTripsWithinOneUlp) {
  Rng rng(11);
  for (int i = 0; i < 100; ++i) {
    const int w = 4 * (1 + static_cast<int>(rng.below(200)));
    const int h = 4 * (1 + static_cast<int>(rng.below(200)));
    const Intrinsics in = testutil::random_intrinsics(rng, w, h);
    const Intrinsics back = rescale_intrinsics(rescale_intrinsics(in, w * 4, h * 4), w, h);
    EXPECT_TRUE(within_ulps(back.fx, in.fx, 1));
    EXPECT_TRUE(within_ulps(back.fy, in.fy, 1));
    EXPECT_TRUE(within_ulps(back.cx, in.cx, 1));
    EXPECT_TRUE(within_ulps(back.cy, in.cy, 1));
  }
}

TEST(RescaleIntrinsics, ComposesMultiplicativelyWithinTwoUlps) {
  Rng rng(12);
  for (int i = 0; i < 100; ++i) {
    const int w = 16 * (1 + static_cast<int>(rng.below(40)));
    const int h = 16 * (1 + static_cast<int>(rng.below(40)));
    const Intrinsics in = testutil::random_intrinsics(rng, w, h);
    const Intrinsics two_step = rescale_intrinsics(rescale_intrinsics(in, w / 2, h / 2), w / 8, h / 8);
    const Intrinsics direct = rescale_intrinsics(in, w / 8, h / 8);
    EXPECT_TRUE(within_ulps(two_step.fx, direct.fx, 2));
    EXPECT_TRUE(within_ulps(two_step.fy, direct.fy, 2));
    EXPECT_TRUE(within_ulps(two_step.cx, direct.cx, 2));
    EXPECT_TRUE(within_ulps(two_step.cy, direct.cy, 2));
  }
}

TEST(RescaleIntrinsics, RejectsEmptyTarget) {
  EXPECT_THROW(rescale_intrinsics(cam(500, 160, 120, 320, 240), 0, 60), ArgumentError);
}

TEST(Intrinsics, ValidateRejectsNonPositiveFocalLength) {
  EXPECT_THROW(cam(0, 1, 1, 4, 4).validate(), ArgumentError);
  EXPECT_THROW(cam(-1, 1, 1, 4, 4).validate(), ArgumentError);
  EXPECT_NO_THROW(cam(1, 1, 1, 4, 4).validate());
}

TEST(Backproject, PrincipalPointRayLiesOnOpticalAxis) {
  DepthMap d(5, 5);
  d.set(2, 2, 2.0);
  const PointCloud pc = backproject(d, cam(100, 2, 2, 5, 5));
  ASSERT_EQ(pc.size(), 1u);
  EXPECT_EQ(pc.points[0], (Point3{0.0, 0.0, 2.0}));
}

TEST(Backproject, AllInvalidMapGivesEmptyCloud) {
  EXPECT_TRUE(backproject(DepthMap(7, 3), cam(10, 3, 1, 7, 3)).empty());
}

TEST(Backproject, SlantedPlaneMatchesScalarFormula) {
  const Intrinsics intr = cam(300, 31.5, 23.5, 64, 48);
  DepthMap d(64, 48);
  for (int v = 0; v < 48; ++v)
    for (int u = 0; u < 64; ++u) d.set(u, v, 1.0 + 0.001 * u);
  const PointCloud pc = backproject(d, intr);
  ASSERT_EQ(pc.size(), 64u * 48u);
  for (int v = 0; v < 48; ++v) {
    for (int u = 0; u < 64; ++u) {
      const double z = 1.0 + 0.001 * u;
      const Point3& p = pc.points[static_cast<std::size_t>(v) * 64 + u];
      EXPECT_NEAR(p.x, (u - 31.5) / 300.0 * z, 1e-9);
      EXPECT_NEAR(p.y, (v - 23.5) / 300.0 * z, 1e-9);
      EXPECT_NEAR(p.z, z, 1e-9);
    }
  }
}

TEST(Backproject, PointCountEqualsValidCount) {
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const DepthMap d = testutil::random_depth(rng, 13, 9, rng.uniform());
    EXPECT_EQ(backproject(d, testutil::random_intrinsics(rng, 13, 9)).size(), d.valid_count());
  }
}

TEST(Backproject, IgnoresSentinelValuesAtInvalidPixels) {
  Rng rng(4);
  const Intrinsics intr = testutil::random_intrinsics(rng, 16, 12);
  DepthMap d = testutil::random_depth(rng, 16, 12, 0.5);
  const PointCloud before = backproject(d, intr);
  for (std::size_t i = 0; i < d.pixel_count(); ++i)
    if (!d.valid[i]) d.depth[i] = rng.uniform(-5.0, 5.0);
  EXPECT_EQ(backproject(d, intr).points, before.points);
}

TEST(Backproject, RejectsResolutionMismatch) {
  EXPECT_THROW(backproject(DepthMap(4, 4), cam(1, 1, 1, 5, 4)), ArgumentError);
}

TEST(DepthMap, ValidateRejectsNonPositiveValidDepth) {
  DepthMap d(2, 2);
  d.set(0, 0, 1.0);
  EXPECT_NO_THROW(d.validate());
  d.depth[0] = 0.0;
  EXPECT_THROW(d.validate(), ArgumentError);
  d.depth[0] = std::nan("");
  EXPECT_THROW(d.validate(), ArgumentError);
}

TEST(CropIntrinsics, ShiftsPrincipalPoint) {
  const Intrinsics c = crop_intrinsics(cam(100, 50, 40, 100, 80), 10, 20, 30, 20);
  EXPECT_DOUBLE_EQ(c.cx, 40.0);
  EXPECT_DOUBLE_EQ(c.cy, 20.0);
  EXPECT_EQ(c.width, 30);
  EXPECT_EQ(c.height, 20);
  EXPECT_THROW(crop_intrinsics(cam(100, 50, 40, 100, 80), 90, 0, 30, 20), ArgumentError);
}
