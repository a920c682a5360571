#include "rgbdgeo/geomcore.h"

#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Geometry>
#include <gtest/gtest.h>

namespace rgbdgeo {
namespace {

CameraIntrinsics Kinect() {
  CameraIntrinsics k;
  k.fx = 570.0;
  k.fy = 570.0;
  k.cx = 319.5;
  k.cy = 239.5;
  k.baseline = 0.075;
  return k;
}

DepthImage RandomDepth(int w, int h, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> z(0.5, 8.0);
  std::bernoulli_distribution hole(0.1);
  DepthImage d(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) d.Set(x, y, hole(rng) ? 0.0 : z(rng));
  }
  return d;
}

TEST(Disparity, KinectExample) {
  DepthImage d(1, 1);
  d.Set(0, 0, 1.425);
  const DisparityMap disp = DepthToDisparity(d, Kinect());
  ASSERT_TRUE(disp.IsValid(0, 0));
  EXPECT_NEAR(disp.values(0, 0), 30.0, 1e-12);
}

TEST(Disparity, DoublingDepthHalvesDisparity) {
  DepthImage d(2, 1);
  d.Set(0, 0, 1.7);
  d.Set(1, 0, 3.4);
  const DisparityMap disp = DepthToDisparity(d, Kinect());
  EXPECT_DOUBLE_EQ(disp.values(0, 0), 2.0 * disp.values(1, 0));
}

TEST(Disparity, InvalidPixelStaysInvalid) {
  DepthImage d(2, 1);
  d.Set(0, 0, 2.0);
  d.Set(1, 0, 0.0);
  const DisparityMap disp = DepthToDisparity(d, Kinect());
  EXPECT_TRUE(disp.IsValid(0, 0));
  EXPECT_FALSE(disp.IsValid(1, 0));
}

TEST(DepthImage, SetRejectsNonFinite) {
  DepthImage d(3, 1);
  d.Set(0, 0, std::nan(""));
  d.Set(1, 0, -1.0);
  d.Set(2, 0, std::numeric_limits<double>::infinity());
  for (int x = 0; x < 3; ++x) EXPECT_EQ(d.valid(x, 0), 0);
}

TEST(Intrinsics, Validation) {
  CameraIntrinsics k = Kinect();
  EXPECT_NO_THROW(k.Validate());
  k.fx = 0.0;
  EXPECT_THROW(k.Validate(), InvalidArgument);
  k = Kinect();
  k.baseline = -1.0;
  EXPECT_THROW(k.Validate(), InvalidArgument);
  k = Kinect();
  EXPECT_THROW(k.ValidateFor(100, 100), InvalidArgument);
  EXPECT_NO_THROW(k.ValidateFor(640, 480));
}

TEST(Backproject, ProjectRoundTrip) {
  const CameraIntrinsics k = Kinect();
  const DepthImage d = RandomDepth(64, 48, 1);
  const PointCloud cloud = Backproject(d, k);
  EXPECT_EQ(cloud.valid, d.valid);
  for (int y = 0; y < d.height(); ++y) {
    for (int x = 0; x < d.width(); ++x) {
      if (!cloud.IsValid(x, y)) continue;
      const Eigen::Vector2d uv = Project(cloud.points(x, y), k);
      EXPECT_NEAR(uv.x(), x, 1e-9);
      EXPECT_NEAR(uv.y(), y, 1e-9);
      EXPECT_DOUBLE_EQ(cloud.points(x, y).z(), d.depth(x, y));
    }
  }
}

TEST(Disparity, DepthRoundTrip) {
  const CameraIntrinsics k = Kinect();
  const DepthImage d = RandomDepth(40, 30, 2);
  const DepthImage back = DisparityToDepth(DepthToDisparity(d, k), k);
  EXPECT_EQ(back.valid, d.valid);
  for (size_t i = 0; i < d.depth.size(); ++i) {
    if (!d.valid[i]) continue;
    EXPECT_NEAR(back.depth[i], d.depth[i], 1e-9 * d.depth[i]);
  }
}

TEST(Disparity, NonPositiveDisparityIsInvalidDepth) {
  DisparityMap disp(2, 1);
  disp.values(0, 0) = -3.0;
  disp.valid(0, 0) = 1;
  disp.values(1, 0) = 0.0;
  disp.valid(1, 0) = 1;
  const DepthImage d = DisparityToDepth(disp, Kinect());
  EXPECT_EQ(d.valid(0, 0), 0);
  EXPECT_EQ(d.valid(1, 0), 0);
}

TEST(Disparity, DimensionMismatchThrows) {
  DepthImage d(4, 4);
  d.valid = Mask(3, 4);
  EXPECT_THROW(DepthToDisparity(d, Kinect()), DimensionError);
}

TEST(RotateCloud, KeepsLayoutAndMask) {
  const PointCloud cloud = Backproject(RandomDepth(8, 6, 3), Kinect());
  const Eigen::Matrix3d r =
      Eigen::AngleAxisd(0.3, Eigen::Vector3d(1, 2, 3).normalized())
          .toRotationMatrix();
  const PointCloud rotated = RotateCloud(cloud, r);
  EXPECT_EQ(rotated.valid, cloud.valid);
  for (size_t i = 0; i < cloud.points.size(); ++i) {
    if (!cloud.valid[i]) continue;
    EXPECT_LT((rotated.points[i] - r * cloud.points[i]).norm(), 1e-12);
  }
}

}  // namespace
}  // namespace rgbdgeo
