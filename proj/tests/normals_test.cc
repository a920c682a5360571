#include "rgbdgeo/normals.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include <Eigen/Geometry>
#include <gtest/gtest.h>

#include "support/synthetic.h"

namespace rgbdgeo {
namespace {

double AngleDeg(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  return std::acos(std::clamp(a.normalized().dot(b.normalized()), -1.0, 1.0)) *
         180.0 / std::numbers::pi;
}

CameraIntrinsics Camera(int w, int h) {
  CameraIntrinsics k;
  k.fx = k.fy = 570.0;
  k.cx = (w - 1) / 2.0;
  k.cy = (h - 1) / 2.0;
  return k;
}

// Casts a ray per pixel and keeps z = depth_along(ray) where positive.
DepthImage RayCast(int w, int h, const CameraIntrinsics& k,
                   const std::function<double(const Eigen::Vector3d&)>& t) {
  DepthImage d(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Eigen::Vector3d ray((x - k.cx) / k.fx, (y - k.cy) / k.fy, 1.0);
      d.Set(x, y, t(ray));
    }
  }
  return d;
}

// Plane n . p = c intersected with the ray; depth is the ray parameter
// because the ray has unit z.
double PlaneHit(const Eigen::Vector3d& n, double c, const Eigen::Vector3d& ray) {
  const double denom = n.dot(ray);
  return denom == 0.0 ? 0.0 : c / denom;
}

TEST(FitPlane, Underdetermined) {
  std::vector<Eigen::Vector3d> two = {{0, 0, 1}, {1, 0, 1}};
  EXPECT_FALSE(FitPlane(two).has_value());
  std::vector<Eigen::Vector3d> line = {{0, 0, 1}, {1, 0, 1}, {2, 0, 1},
                                       {3, 0, 1}};
  EXPECT_FALSE(FitPlane(line).has_value());
}

TEST(FitPlane, OrderDoesNotMatter) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Eigen::Vector3d> pts;
  for (int i = 0; i < 30; ++i) pts.emplace_back(g(rng), g(rng), 0.1 * g(rng));
  const auto a = FitPlane(pts);
  std::shuffle(pts.begin(), pts.end(), rng);
  const auto b = FitPlane(pts);
  ASSERT_TRUE(a && b);
  EXPECT_LT(std::abs(std::abs(a->normal.dot(b->normal)) - 1.0), 1e-12);
  EXPECT_LT((a->centroid - b->centroid).norm(), 1e-12);
}

TEST(DiskOffsets, Radius) {
  EXPECT_EQ(DiskOffsets(1).size(), 5u);
  for (const auto& o : DiskOffsets(5)) EXPECT_LE(o.squaredNorm(), 25);
  EXPECT_EQ(DiskOffsets(5).size(), 81u);
}

TEST(EstimateNormals, AnalyticPlane) {
  const int w = 48, h = 40;
  const CameraIntrinsics k = Camera(w, h);
  const Eigen::Vector3d n(1.0, 0.0, 2.0);
  const DepthImage d = RayCast(
      w, h, k, [&](const Eigen::Vector3d& r) { return PlaneHit(n, 4.0, r); });
  const NormalMap normals = EstimateNormals(Backproject(d, k), 3);
  const Eigen::Vector3d expected = -n.normalized();  // toward the camera
  ASSERT_EQ(normals.ValidCount(), static_cast<size_t>(w * h));
  for (size_t i = 0; i < normals.normals.size(); ++i) {
    EXPECT_LT((normals.normals[i] - expected).norm(), 1e-9);
  }
}

TEST(EstimateNormals, UnitLengthAndFacingCamera) {
  const auto scene = testing::RenderRoom(testing::Room::Default(), {}, 80, 60);
  const PointCloud cloud = Backproject(scene.depth, scene.k);
  const NormalMap normals = EstimateNormals(cloud, 2);
  for (size_t i = 0; i < normals.normals.size(); ++i) {
    if (!normals.valid[i]) continue;
    EXPECT_NEAR(normals.normals[i].norm(), 1.0, 1e-6);
    EXPECT_LE(normals.normals[i].dot(cloud.points[i]), 0.0);
  }
}

TEST(EstimateNormals, TwoValidPointsAreInvalid) {
  const int w = 9, h = 9;
  PointCloud cloud(w, h);
  cloud.points(4, 4) = {0, 0, 2};
  cloud.valid(4, 4) = 1;
  cloud.points(5, 4) = {0.01, 0, 2};
  cloud.valid(5, 4) = 1;
  EXPECT_EQ(EstimateNormals(cloud, 3).ValidCount(), 0u);
}

TEST(EstimateNormals, RadiusMustBePositive) {
  EXPECT_THROW(EstimateNormals(PointCloud(4, 4), 0), InvalidArgument);
}

TEST(EstimateNormals, DepthNoiseMonteCarlo) {
  const int w = 140, h = 100, r = 5;
  const CameraIntrinsics k = Camera(w, h);
  const Eigen::Vector3d n(1.0, 0.0, 2.0);
  std::mt19937_64 rng(17);
  std::normal_distribution<double> noise(0.0, 0.002);
  const DepthImage d = RayCast(w, h, k, [&](const Eigen::Vector3d& ray) {
    return PlaneHit(n, 4.0, ray) + noise(rng);
  });
  const NormalMap normals = EstimateNormals(Backproject(d, k), r);
  double sum = 0.0;
  int count = 0;
  for (int y = r; y < h - r; ++y) {
    for (int x = r; x < w - r; ++x) {
      ASSERT_TRUE(normals.valid(x, y));
      sum += AngleDeg(normals.normals(x, y), -n);
      ++count;
    }
  }
  ASSERT_GE(count, 10000);
  EXPECT_LT(sum / count, 3.0);
}

TEST(EstimateNormals, RotationEquivariance) {
  const auto scene = testing::RenderRoom(testing::Room::Default(), {}, 64, 48);
  const PointCloud cloud = Backproject(scene.depth, scene.k);
  const Eigen::Matrix3d rot =
      Eigen::AngleAxisd(0.4, Eigen::Vector3d(0.3, -1.0, 0.2).normalized())
          .toRotationMatrix();
  const NormalMap a = EstimateNormals(cloud, 3);
  const NormalMap b = EstimateNormals(RotateCloud(cloud, rot), 3);
  EXPECT_EQ(a.valid, b.valid);
  double worst = 0.0;
  for (size_t i = 0; i < a.normals.size(); ++i) {
    if (!a.valid[i]) continue;
    worst = std::max(worst, AngleDeg(rot * a.normals[i], b.normals[i]));
  }
  EXPECT_LT(worst * std::numbers::pi / 180.0, 1e-6);
}

// z = 3 + s |x|: s = +1 is a crease pointing toward the camera (a box edge),
// s = -1 a corner pointing away (a room corner). Both are 90 degree dihedrals.
DepthImage Crease(int w, int h, const CameraIntrinsics& k, double s) {
  return RayCast(w, h, k, [&](const Eigen::Vector3d& ray) {
    return 3.0 / (1.0 - s * std::abs(ray.x()));
  });
}

TEST(NormalGradients, DihedralAngleOnCrease) {
  const int w = 41, h = 31;
  const CameraIntrinsics k = Camera(w, h);
  const int cx = static_cast<int>(k.cx), cy = static_cast<int>(k.cy);
  for (const double s : {1.0, -1.0}) {
    const GradientMaps g = NormalGradients(Backproject(Crease(w, h, k, s), k), 3);
    ASSERT_EQ(g.orientations, kDefaultGradientOrientations);
    ASSERT_TRUE(g.valid[0](cx, cy));
    const double inward = g.ng_plus[0](cx, cy);
    const double outward = g.ng_minus[0](cx, cy);
    if (s < 0) {
      EXPECT_NEAR(inward, 90.0, 1.0);
      EXPECT_EQ(outward, 0.0);
    } else {
      EXPECT_NEAR(outward, 90.0, 1.0);
      EXPECT_EQ(inward, 0.0);
    }
  }
}

TEST(NormalGradients, PlaneInteriorIsFlat) {
  const int w = 41, h = 31;
  const CameraIntrinsics k = Camera(w, h);
  const DepthImage tilted = RayCast(w, h, k, [](const Eigen::Vector3d& r) {
    return PlaneHit({0.3, -0.5, 1.0}, 2.5, r);
  });
  const GradientMaps g = NormalGradients(Backproject(tilted, k), 3);
  for (int o = 0; o < g.orientations; ++o) {
    for (int y = 3; y < h - 3; ++y) {
      for (int x = 3; x < w - 3; ++x) {
        ASSERT_TRUE(g.valid[o](x, y));
        EXPECT_LT(g.ng_plus[o](x, y) + g.ng_minus[o](x, y), 1.0);
        EXPECT_GE(g.dg[o](x, y), 0.0);
      }
    }
  }
  const DepthImage flat =
      RayCast(w, h, k, [](const Eigen::Vector3d&) { return 2.0; });
  const GradientMaps f = NormalGradients(Backproject(flat, k), 3);
  for (int o = 0; o < f.orientations; ++o) {
    EXPECT_LT(f.dg[o](20, 15), 1e-3);
    EXPECT_LT(f.ng_plus[o](20, 15) + f.ng_minus[o](20, 15), 1.0);
  }
}

TEST(NormalGradients, DepthStep) {
  const int w = 41, h = 31;
  const CameraIntrinsics k = Camera(w, h);
  const DepthImage step = RayCast(w, h, k, [](const Eigen::Vector3d& r) {
    return r.x() > 0.0 ? 2.5 : 2.0;
  });
  const GradientMaps g = NormalGradients(Backproject(step, k), 3);
  const int cx = static_cast<int>(k.cx), cy = static_cast<int>(k.cy);
  ASSERT_TRUE(g.valid[0](cx, cy));
  EXPECT_NEAR(g.dg[0](cx, cy), 0.5, 1e-3);
}

TEST(NormalGradients, AtMostOneSignedChannel) {
  const auto scene = testing::RenderRoom(testing::Room::Default(), {}, 80, 60);
  const std::vector<int> radii = {3, 5};
  const auto maps = NormalGradients(Backproject(scene.depth, scene.k), radii);
  ASSERT_EQ(maps.size(), 2u);
  for (const auto& g : maps) {
    for (int o = 0; o < g.orientations; ++o) {
      for (size_t i = 0; i < g.dg[o].size(); ++i) {
        const double p = g.ng_plus[o][i], m = g.ng_minus[o][i];
        EXPECT_TRUE(p == 0.0 || m == 0.0);
        EXPECT_LE(std::max(p, m), 180.0);
        EXPECT_GE(std::min(p, m), 0.0);
      }
    }
  }
}

TEST(NormalGradients, BadArguments) {
  EXPECT_THROW(NormalGradients(PointCloud(4, 4), 0), InvalidArgument);
  EXPECT_THROW(NormalGradients(PointCloud(4, 4), 3, 1), InvalidArgument);
}

}  // namespace
}  // namespace rgbdgeo
