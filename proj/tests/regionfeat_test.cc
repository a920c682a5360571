#include "rgbdgeo/regionfeat.h"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "rgbdgeo/geocentric.h"
#include "rgbdgeo/pipeline.h"
#include "support/oracles.h"
#include "support/synthetic.h"

namespace rgbdgeo {
namespace {

// One row of pixels with explicit per-pixel values.
struct Pixel {
  double disparity = 30.0;
  double height = 0.0;
  double angle = 0.0;
  Eigen::Vector3d world = Eigen::Vector3d::Zero();
  bool valid = true;
};

RegionFeatureInputs Inputs(const std::vector<Pixel>& pixels) {
  const int n = static_cast<int>(pixels.size());
  RegionFeatureInputs in{ScalarMap(n, 1), ScalarMap(n, 1), ScalarMap(n, 1),
                         PointCloud(n, 1)};
  for (int i = 0; i < n; ++i) {
    const uint8_t v = pixels[i].valid;
    in.disparity.values[i] = pixels[i].disparity;
    in.height.values[i] = pixels[i].height;
    in.angle.values[i] = pixels[i].angle;
    in.world.points[i] = pixels[i].world;
    in.disparity.valid[i] = in.height.valid[i] = in.angle.valid[i] =
        in.world.valid[i] = v;
  }
  return in;
}

SuperpixelMap Labels(const std::vector<int32_t>& ids) {
  Image<int32_t> labels(static_cast<int>(ids.size()), 1);
  for (size_t i = 0; i < ids.size(); ++i) labels[i] = ids[i];
  return SuperpixelMap::FromLabels(std::move(labels));
}

TEST(SuperpixelMap, Validation) {
  EXPECT_EQ(Labels({0, 1, 1, 2}).count, 3);
  EXPECT_THROW(Labels({0, 2}), FormatError);
  EXPECT_THROW(Labels({0, -1}), FormatError);
  EXPECT_EQ(Labels({0, 1, 1, 2}).Areas(), (std::vector<int64_t>{1, 2, 1}));
}

TEST(Accumulate, DirectSums) {
  std::vector<Pixel> px(4);
  px[0].height = px[1].height = 1.0;
  px[2].height = px[3].height = 2.0;
  const auto agg = Accumulate(Inputs(px), Labels({0, 0, 0, 0}));
  const auto& m = agg.superpixels[0];
  const auto& h = m.channels[static_cast<int>(MomentChannel::kHeight)];
  EXPECT_EQ(m.count, 4);
  EXPECT_DOUBLE_EQ(h.sum, 6.0);
  EXPECT_DOUBLE_EQ(h.sum_sq, 10.0);
  EXPECT_DOUBLE_EQ(h.min, 1.0);
  EXPECT_DOUBLE_EQ(h.max, 2.0);
  EXPECT_DOUBLE_EQ(h.mean, 1.5);
  EXPECT_DOUBLE_EQ(h.m2, 1.0);
}

TEST(Accumulate, AllInvalidIsNeutral) {
  std::vector<Pixel> px(3);
  for (auto& p : px) p.valid = false;
  px[2].valid = true;
  const auto agg = Accumulate(Inputs(px), Labels({0, 0, 1}));
  EXPECT_EQ(agg.superpixels[0].count, 0);
  EXPECT_EQ(agg.superpixels[0].channels[0].sum, 0.0);
  EXPECT_EQ(agg.superpixels[1].count, 1);
  EXPECT_THROW(RegionFeatures({0}, agg), EstimationError);
}

TEST(Accumulate, DisjointSuperpixelsAreIndependent) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<Pixel> px(10);
  for (auto& p : px) {
    p.height = u(rng);
    p.angle = 90.0 + 40.0 * u(rng);
    p.world = {u(rng), u(rng), u(rng)};
  }
  const auto both = Accumulate(Inputs(px), Labels({0, 0, 0, 0, 0, 1, 1, 1, 1, 1}));
  const std::vector<Pixel> first(px.begin(), px.begin() + 5);
  const std::vector<Pixel> second(px.begin() + 5, px.end());
  const auto a = Accumulate(Inputs(first), Labels({0, 0, 0, 0, 0}));
  const auto b = Accumulate(Inputs(second), Labels({0, 0, 0, 0, 0}));
  for (int c = 0; c < kMomentChannels; ++c) {
    EXPECT_EQ(both.superpixels[0].channels[c].sum, a.superpixels[0].channels[c].sum);
    EXPECT_EQ(both.superpixels[1].channels[c].sum, b.superpixels[0].channels[c].sum);
    EXPECT_EQ(both.superpixels[1].channels[c].m2, b.superpixels[0].channels[c].m2);
  }
  EXPECT_EQ(both.superpixels[0].vertical, a.superpixels[0].vertical);
}

TEST(RegionFeatures, MergingIsAdditive) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  std::vector<Pixel> px(12);
  for (auto& p : px) {
    p.height = u(rng);
    p.world = {u(rng), p.height, u(rng)};
  }
  const auto agg = Accumulate(Inputs(px), Labels({0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1}));
  const auto f0 = RegionFeatures({0}, agg);
  const auto f1 = RegionFeatures({1}, agg);
  const auto both = RegionFeatures({0, 1}, agg);
  EXPECT_EQ(both.valid_count, f0.valid_count + f1.valid_count);
  const double lo = std::min(f0.Get("height_mean"), f1.Get("height_mean"));
  const double hi = std::max(f0.Get("height_mean"), f1.Get("height_mean"));
  EXPECT_GE(both.Get("height_mean"), lo);
  EXPECT_LE(both.Get("height_mean"), hi);
  EXPECT_DOUBLE_EQ(both.Get("height_min"),
                   std::min(f0.Get("height_min"), f1.Get("height_min")));
  EXPECT_DOUBLE_EQ(both.Get("height_max"),
                   std::max(f0.Get("height_max"), f1.Get("height_max")));
}

TEST(RegionFeatures, FloorFractions) {
  std::vector<Pixel> px(6);
  for (int i = 0; i < 6; ++i) {
    px[i].angle = 0.0;
    px[i].world = {0.1 * i, 0.0, 2.0 + 0.2 * i};
  }
  const auto f = RegionFeatures({0}, Accumulate(Inputs(px), Labels({0, 0, 0, 0, 0, 0})));
  EXPECT_EQ(f.Get("frac_up"), 1.0);
  EXPECT_EQ(f.Get("frac_vertical"), 0.0);
  EXPECT_EQ(f.Get("frac_down"), 0.0);
  EXPECT_EQ(f.Get("angle_mean"), 0.0);
  EXPECT_EQ(f.Get("angle_std"), 0.0);
}

TEST(RegionFeatures, FacingThresholdsSplit) {
  std::vector<Pixel> px(5);
  const double angles[5] = {10.0, 60.0, 100.0, 140.0, 170.0};
  for (int i = 0; i < 5; ++i) px[i].angle = angles[i];
  const auto f = RegionFeatures({0}, Accumulate(Inputs(px), Labels({0, 0, 0, 0, 0})));
  EXPECT_DOUBLE_EQ(f.Get("frac_up"), 0.2);
  EXPECT_DOUBLE_EQ(f.Get("frac_vertical"), 0.4);
  EXPECT_DOUBLE_EQ(f.Get("frac_down"), 0.2);
}

TEST(RegionFeatures, TopViewLine) {
  const Eigen::Vector2d dir = Eigen::Vector2d(3.0, 4.0).normalized();
  std::vector<Pixel> px(9);
  std::vector<double> t(9);
  double mean = 0.0;
  for (int i = 0; i < 9; ++i) {
    t[i] = 0.25 * i * i;
    mean += t[i] / 9.0;
    px[i].world = {1.0 + t[i] * dir.x(), 0.5, 2.0 + t[i] * dir.y()};
  }
  double var = 0.0;
  for (double v : t) var += (v - mean) * (v - mean) / 9.0;
  const auto f = RegionFeatures({0}, Accumulate(Inputs(px), Labels(std::vector<int32_t>(9, 0))));
  EXPECT_NEAR(f.Get("topview_std_min"), 0.0, 1e-9);
  EXPECT_NEAR(f.Get("topview_std_max"), std::sqrt(var), 1e-9);
}

TEST(RegionFeatures, TopViewRotationInvariant) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Pixel> px(40), turned(40);
  const double c = std::cos(0.9), s = std::sin(0.9);
  for (int i = 0; i < 40; ++i) {
    px[i].world = {2.0 * g(rng), g(rng), 0.5 * g(rng)};
    turned[i] = px[i];
    turned[i].world.x() = c * px[i].world.x() - s * px[i].world.z();
    turned[i].world.z() = s * px[i].world.x() + c * px[i].world.z();
  }
  const std::vector<int32_t> ids(40, 0);
  const auto a = RegionFeatures({0}, Accumulate(Inputs(px), Labels(ids)));
  const auto b = RegionFeatures({0}, Accumulate(Inputs(turned), Labels(ids)));
  EXPECT_NEAR(a.Get("topview_std_min"), b.Get("topview_std_min"), 1e-9);
  EXPECT_NEAR(a.Get("topview_std_max"), b.Get("topview_std_max"), 1e-9);
}

TEST(RegionFeatures, Errors) {
  const auto agg = Accumulate(Inputs(std::vector<Pixel>(2)), Labels({0, 1}));
  EXPECT_THROW(RegionFeatures({}, agg), InvalidArgument);
  EXPECT_THROW(RegionFeatures({2}, agg), InvalidArgument);
  EXPECT_THROW(RegionFeatures({0}, agg).Get("nope"), InvalidArgument);
  const Image<int32_t> bad(3, 1, 0);
  EXPECT_THROW(Accumulate(Inputs(std::vector<Pixel>(2)),
                          SuperpixelMap::FromLabels(bad)),
               DimensionError);
}

TEST(RegionFeatures, Invariants) {
  const auto scene = testing::RandomScene(11, 160, 120);
  const auto geo = ComputeGeocentric(scene.depth, scene.k);
  const auto inputs = MakeRegionFeatureInputs(geo);
  const SuperpixelMap sp = testing::GridSuperpixels(scene, 8);
  const auto agg = Accumulate(inputs, sp);
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int32_t> pick(0, sp.count - 1);
  for (int t = 0; t < 30; ++t) {
    Region r;
    for (int i = 0; i < 5; ++i) r.push_back(pick(rng));
    const auto f = RegionFeatures(r, agg);
    for (const char* name : {"disparity_std", "height_std", "angle_std",
                             "x_std", "y_std", "z_std", "x_extent", "y_extent",
                             "z_extent"}) {
      EXPECT_GE(f.Get(name), 0.0) << name;
    }
    EXPECT_LE(f.Get("height_min"), f.Get("height_max"));
    EXPECT_LE(f.Get("topview_std_min"), f.Get("topview_std_max"));
    const double fractions =
        f.Get("frac_up") + f.Get("frac_vertical") + f.Get("frac_down");
    EXPECT_LE(fractions, 1.0 + 1e-12);
  }
}

TEST(RegionFeatures, RelabelingSuperpixels) {
  const auto scene = testing::RandomScene(13, 120, 90);
  const auto inputs = MakeRegionFeatureInputs(ComputeGeocentric(scene.depth, scene.k));
  const SuperpixelMap sp = testing::GridSuperpixels(scene, 10);
  std::vector<int32_t> perm(sp.count);
  for (int i = 0; i < sp.count; ++i) perm[i] = sp.count - 1 - i;
  Image<int32_t> relabeled = sp.labels;
  for (auto& l : relabeled.pixels()) l = perm[l];
  const auto a = Accumulate(inputs, sp);
  const auto b = Accumulate(inputs, SuperpixelMap::FromLabels(relabeled));
  const Region r = {0, 3, 7, 12};
  Region rp;
  for (int32_t id : r) rp.push_back(perm[id]);
  const auto fa = RegionFeatures(r, a);
  const auto fb = RegionFeatures(rp, b);
  for (int i = 0; i < kGeometricFeatureCount; ++i) {
    EXPECT_NEAR(fa[i], fb[i], 1e-9 * std::max(1.0, std::abs(fa[i])));
  }
}

TEST(RegionFeatures, MatchesPixelOracle) {
  const auto scene = testing::RandomScene(14, 160, 120);
  const auto inputs = MakeRegionFeatureInputs(ComputeGeocentric(scene.depth, scene.k));
  const SuperpixelMap sp = testing::GridSuperpixels(scene, 6);
  const auto agg = Accumulate(inputs, sp);
  const Region r = {1, 4, 9, 16, 25, 36};
  const auto f = RegionFeatures(r, agg);
  const auto oracle = testing::RegionFeatureOracle(r, sp, inputs, FacingThresholds{});
  for (int i = 0; i < kGeometricFeatureCount; ++i) {
    EXPECT_LE(std::abs(f[i] - oracle[i]), 1e-6 * std::abs(oracle[i]) + 1e-9)
        << GeometricFeatureNames()[i];
  }
}

TEST(SymmetricEigenvalues2, Ascending) {
  const auto e = SymmetricEigenvalues2(2.0, 1.0, 2.0);
  EXPECT_NEAR(e[0], 1.0, 1e-12);
  EXPECT_NEAR(e[1], 3.0, 1e-12);
  const auto d = SymmetricEigenvalues2(5.0, 0.0, 5.0);
  EXPECT_EQ(d[0], 5.0);
  EXPECT_EQ(d[1], 5.0);
}

}  // namespace
}  // namespace rgbdgeo
