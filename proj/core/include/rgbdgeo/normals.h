#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "rgbdgeo/geomcore.h"
#include "rgbdgeo/image.h"

namespace rgbdgeo {

inline constexpr int kDefaultGradientOrientations = 8;

// Unit surface normals in the camera frame, oriented toward the camera
// (n . p <= 0 for the pixel's own 3D point p).
struct NormalMap {
  Image<Eigen::Vector3d> normals;
  Mask valid;
  int radius = 0;

  NormalMap() = default;
  NormalMap(int width, int height, int fit_radius)
      : normals(width, height, Eigen::Vector3d::Zero()),
        valid(width, height, 0),
        radius(fit_radius) {}

  int width() const { return normals.width(); }
  int height() const { return normals.height(); }
  size_t ValidCount() const;
};

// Least-squares plane through a point set.
struct PlaneFit {
  Eigen::Vector3d normal;    // unit, sign arbitrary
  Eigen::Vector3d centroid;
  Eigen::Vector3d eigenvalues;  // ascending, of the centered scatter / n
};

// Normal = eigenvector of the smallest eigenvalue of the centered 3x3
// covariance. Returns nullopt for fewer than three points or when the two
// smallest eigenvalues tie (collinear or coincident points).
std::optional<PlaneFit> FitPlane(std::span<const Eigen::Vector3d> points);

// Plane fit from accumulated moments. `sum` and `outer` are the sums of p and
// p p^T over `count` points; callers should shift points by a nearby origin
// before accumulating to limit cancellation.
std::optional<PlaneFit> FitPlaneFromMoments(const Eigen::Vector3d& sum,
                                            const Eigen::Matrix3d& outer,
                                            int count);

// Per-pixel normals from a full pixel-grid disk of the given radius.
NormalMap EstimateNormals(const PointCloud& cloud, int radius);

// Normal-gradient and depth-gradient channels for one half-disk radius.
// Orientation o splits the disk along the line at angle o * pi / O: one
// half-disk collects offsets with positive projection on (cos, sin) of that
// angle, the other negative.
//
// ng_plus holds the angle (degrees) where each half-disk centroid lies on the
// camera side of the other half's plane, which is an inward (concave) crease
// such as a room corner. ng_minus holds the outward case (a box edge).
// Exactly one of the two is nonzero at any pixel. dg is the absolute
// difference of mean point-to-camera distance between the halves (meters).
struct GradientMaps {
  int radius = 0;
  int orientations = 0;
  std::vector<Image<double>> ng_plus;
  std::vector<Image<double>> ng_minus;
  std::vector<Image<double>> dg;
  std::vector<Mask> valid;
};

GradientMaps NormalGradients(const PointCloud& cloud, int radius,
                             int orientations = kDefaultGradientOrientations);

// One GradientMaps per radius (3 and 5 px in the usual configuration).
std::vector<GradientMaps> NormalGradients(
    const PointCloud& cloud, std::span<const int> radii,
    int orientations = kDefaultGradientOrientations);

// Pixel offsets (dx, dy) with dx^2 + dy^2 <= radius^2, row-major.
std::vector<Eigen::Vector2i> DiskOffsets(int radius);

}  // namespace rgbdgeo
