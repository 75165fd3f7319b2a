#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "pnsr/error.hpp"
#include "pnsr/pncc.hpp"
#include "test_util.hpp"

using namespace pnsr;

TEST(Encode, SingleValidPixelIsDegenerate) {
  DepthMap d(4, 3);
  d.set(1, 2, 2.5);
  const PnccImage p = encode(d, {100, 100, 2, 1, 4, 3});
  ASSERT_TRUE(p.norm.has_value());
  EXPECT_TRUE(p.norm->degenerate);
  EXPECT_EQ(p.norm->scale, 1.0);
  // Every pixel, valid or filled, holds the origin triple.
  for (double c : p.channels) EXPECT_EQ(c, 0.0);
  EXPECT_EQ(decode_depth(p).at(1, 2), 2.5);
}

TEST(Encode, EmptyMaskIsAnError) {
  EXPECT_THROW(encode(DepthMap(3, 3), {10, 10, 1, 1, 3, 3}), EmptyInputError);
}

TEST(Encode, ChannelsStayInUnitRange) {
  Rng rng(21);
  for (int i = 0; i < 40; ++i) {
    const int w = 3 + static_cast<int>(rng.below(30)), h = 3 + static_cast<int>(rng.below(30));
    const PnccImage p = encode(testutil::random_depth(rng, w, h, rng.uniform(0.05, 1.0)),
                               testutil::random_intrinsics(rng, w, h), rng.uniform(1.0, 20.0));
    for (double c : p.channels) {
      EXPECT_GE(c, 0.0);
      EXPECT_LE(c, 1.0);
    }
  }
}

TEST(Encode, LargestAxisSpansUnitInterval) {
  Rng rng(22);
  const PnccImage p = encode(testutil::random_depth(rng, 20, 15, 1.0), testutil::random_intrinsics(rng, 20, 15));
  double widest = 0.0;
  for (std::size_t c = 0; c < 3; ++c) {
    const auto plane = p.plane(c);
    const auto [lo, hi] = std::minmax_element(plane.begin(), plane.end());
    EXPECT_EQ(*lo, 0.0);
    widest = std::max(widest, *hi);
  }
  EXPECT_DOUBLE_EQ(widest, 1.0);
}

TEST(Encode, PreservesAspectRatioOfXAndY) {
  Rng rng(23);
  for (int i = 0; i < 30; ++i) {
    const int w = 8 + static_cast<int>(rng.below(20)), h = 8 + static_cast<int>(rng.below(20));
    const Intrinsics intr = testutil::random_intrinsics(rng, w, h);
    const DepthMap d = testutil::random_depth(rng, w, h, 0.7);
    const PointCloud raw = backproject(d, intr);
    const PointCloud dec = decode_pointcloud(encode(d, intr));
    const auto extent = [](const PointCloud& pc, double Point3::*m) {
      double lo = 1e300, hi = -1e300;
      for (const auto& p : pc.points) {
        lo = std::min(lo, p.*m);
        hi = std::max(hi, p.*m);
      }
      return hi - lo;
    };
    const double raw_ratio = extent(raw, &Point3::x) / extent(raw, &Point3::y);
    const double dec_ratio = extent(dec, &Point3::x) / extent(dec, &Point3::y);
    EXPECT_LT(oracle::rel_err(raw_ratio, dec_ratio), 1e-6);
  }
}

TEST(EncodeWith, OutOfRangeNormalizationIsRejected) {
  DepthMap d(2, 1);
  d.set(0, 0, 1.0);
  d.set(1, 0, 3.0);
  NormalizationParams norm;
  norm.scale = 0.01;
  EXPECT_THROW(encode_with(d, {10, 10, 0, 0, 2, 1}, norm), RangeError);
}

TEST(DecodeDepth, HandBuiltImage) {
  PnccImage p(2, 2);
  std::fill(p.channels.begin(), p.channels.end(), 0.5);
  p.valid = {1, 0, 1, 1};
  NormalizationParams norm;
  norm.scale = 2.0;
  norm.offset = {0.0, 0.0, 1.0};
  norm.s = 3.0;
  p.norm = norm;
  const DepthMap d = decode_depth(p);
  // (0.5 * 2 + 1) * 3
  EXPECT_EQ(d.at(0, 0), 6.0);
  EXPECT_EQ(d.at(0, 1), 6.0);
  EXPECT_FALSE(d.is_valid(1, 0));
  EXPECT_EQ(d.at(1, 0), 0.0);
}

TEST(DecodeDepth, RequiresNormalization) {
  PnccImage p(2, 2);
  EXPECT_THROW(decode_depth(p), StateError);
  EXPECT_THROW(decode_pointcloud(p), StateError);
}

TEST(DecodeDepth, RoundTripWithinRelativeTolerance) {
  Rng rng(24);
  for (int i = 0; i < 100; ++i) {
    const int w = 2 + static_cast<int>(rng.below(40)), h = 2 + static_cast<int>(rng.below(40));
    const DepthMap d = testutil::random_depth(rng, w, h, rng.uniform(0.01, 1.0), 0.1, 20.0);
    const DepthMap back = decode_depth(encode(d, testutil::random_intrinsics(rng, w, h), rng.uniform(0.5, 30.0)));
    ASSERT_EQ(back.valid, d.valid);
    for (std::size_t k = 0; k < d.pixel_count(); ++k)
      if (d.valid[k]) { EXPECT_LT(oracle::rel_err(back.depth[k], d.depth[k]), 1e-6); }
  }
}

TEST(DecodePointcloud, MatchesBackprojection) {
  Rng rng(25);
  for (int i = 0; i < 50; ++i) {
    const int w = 2 + static_cast<int>(rng.below(40)), h = 2 + static_cast<int>(rng.below(40));
    const Intrinsics intr = testutil::random_intrinsics(rng, w, h);
    const DepthMap d = testutil::random_depth(rng, w, h, rng.uniform(0.01, 1.0));
    const PointCloud a = decode_pointcloud(encode(d, intr));
    const PointCloud b = backproject(d, intr);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
      EXPECT_NEAR(a.points[k].x, b.points[k].x, 1e-9);
      EXPECT_NEAR(a.points[k].y, b.points[k].y, 1e-9);
      EXPECT_NEAR(a.points[k].z, b.points[k].z, 1e-9);
    }
  }
}

TEST(DecodePointcloud, ZeroValidMaskGivesEmptyCloud) {
  PnccImage p(3, 3);
  std::fill(p.channels.begin(), p.channels.end(), 0.25);
  p.norm = NormalizationParams{};
  EXPECT_TRUE(decode_pointcloud(p).empty());
}

TEST(FillInvalid, FullyValidInputIsUnchanged) {
  Rng rng(26);
  std::vector<double> ch(3 * 20);
  for (double& x : ch) x = rng.uniform();
  const auto before = ch;
  const std::vector<std::uint8_t> valid(20, 1);
  fill_invalid(ch, 3, valid, 5, 4);
  EXPECT_EQ(ch, before);
}

TEST(FillInvalid, SingleValidPixelFloodsImage) {
  std::vector<double> ch(2 * 12, -1.0);
  std::vector<std::uint8_t> valid(12, 0);
  valid[7] = 1;
  ch[7] = 0.25;
  ch[12 + 7] = 0.75;
  fill_invalid(ch, 2, valid, 4, 3);
  for (int i = 0; i < 12; ++i) {
    EXPECT_EQ(ch[i], 0.25);
    EXPECT_EQ(ch[12 + i], 0.75);
  }
}

TEST(FillInvalid, TieGoesToFirstValidPixelInRowMajorOrder) {
  // Pixel (1, 0) is equidistant from (0, 0) and (2, 0).
  std::vector<double> ch = {10.0, 0.0, 20.0};
  fill_invalid(ch, 1, std::vector<std::uint8_t>{1, 0, 1}, 3, 1);
  EXPECT_EQ(ch[1], 10.0);
  // Vertical tie: (0, 1) between (0, 0) and (0, 2).
  std::vector<double> col = {5.0, 0.0, 7.0};
  fill_invalid(col, 1, std::vector<std::uint8_t>{1, 0, 1}, 1, 3);
  EXPECT_EQ(col[1], 5.0);
}

TEST(FillInvalid, MatchesAllPairsOracle) {
  Rng rng(27);
  for (int i = 0; i < 60; ++i) {
    const int w = 1 + static_cast<int>(rng.below(40)), h = 1 + static_cast<int>(rng.below(40));
    const std::size_t n = static_cast<std::size_t>(w) * h;
    auto valid = testutil::random_mask(rng, n, rng.uniform(0.0, 0.6));
    valid[rng.below(n)] = 1;
    EXPECT_EQ(nearest_valid_index(valid, w, h), oracle::nearest_valid(valid, w, h));
  }
}

TEST(FillInvalid, NeverTouchesValidPixels) {
  Rng rng(28);
  const int w = 17, h = 11;
  const std::size_t n = static_cast<std::size_t>(w) * h;
  auto valid = testutil::random_mask(rng, n, 0.3);
  valid[0] = 1;
  std::vector<double> ch(3 * n);
  for (double& x : ch) x = rng.uniform();
  const auto before = ch;
  fill_invalid(ch, 3, valid, w, h);
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t k = 0; k < n; ++k)
      if (valid[k]) { EXPECT_EQ(ch[c * n + k], before[c * n + k]); }
}

TEST(FillInvalid, AllInvalidIsAnError) {
  std::vector<double> ch(4, 0.0);
  EXPECT_THROW(fill_invalid(ch, 1, std::vector<std::uint8_t>(4, 0), 2, 2), EmptyInputError);
}

TEST(Normalization, DenormalizeInvertsNormalize) {
  NormalizationParams n;
  n.offset = {-0.3, 0.1, 0.2};
  n.scale = 0.7;
  n.s = 10.0;
  for (double p : {-0.3, 0.0, 0.4}) EXPECT_NEAR(n.denormalize(0, n.normalize(0, p)), p * n.s, 1e-12);
}
