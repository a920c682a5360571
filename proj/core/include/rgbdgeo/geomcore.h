#pragma once

#include <Eigen/Core>

#include "rgbdgeo/image.h"

namespace rgbdgeo {

// Default stereo baseline in meters. Only used to put disparity in a
// Kinect-like pixel range; HHA channels are rescaled by calibration anyway.
inline constexpr double kDefaultBaseline = 0.075;

// Pinhole camera without distortion.
struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  double baseline = kDefaultBaseline;

  // Throws InvalidArgument unless fx, fy, baseline are finite and positive.
  void Validate() const;
  // Additionally requires the principal point to lie inside the image.
  void ValidateFor(int width, int height) const;

  bool operator==(const CameraIntrinsics&) const = default;
};

// Range along the optical axis in meters.
struct DepthImage {
  Image<double> depth;
  Mask valid;

  DepthImage() = default;
  DepthImage(int width, int height)
      : depth(width, height, 0.0), valid(width, height, 0) {}

  int width() const { return depth.width(); }
  int height() const { return depth.height(); }

  // Sets depth and marks the pixel valid when z is finite and positive,
  // invalid otherwise.
  void Set(int x, int y, double z);
};

// Camera frame: X right, Y down, Z forward.
struct PointCloud {
  Image<Eigen::Vector3d> points;
  Mask valid;

  PointCloud() = default;
  PointCloud(int width, int height)
      : points(width, height, Eigen::Vector3d::Zero()),
        valid(width, height, 0) {}

  int width() const { return points.width(); }
  int height() const { return points.height(); }
  bool IsValid(int x, int y) const { return valid(x, y) != 0; }
};

using DisparityMap = ScalarMap;

PointCloud Backproject(const DepthImage& depth, const CameraIntrinsics& k);

// Pixel coordinate of a camera-frame point with Z > 0.
Eigen::Vector2d Project(const Eigen::Vector3d& point,
                        const CameraIntrinsics& k);

// d = baseline * fx / Z at valid pixels.
DisparityMap DepthToDisparity(const DepthImage& depth,
                              const CameraIntrinsics& k);

// Z = baseline * fx / d at pixels with positive disparity.
DepthImage DisparityToDepth(const DisparityMap& disparity,
                            const CameraIntrinsics& k);

// Applies a rigid rotation to every valid point (pixel layout unchanged).
PointCloud RotateCloud(const PointCloud& cloud, const Eigen::Matrix3d& r);

}  // namespace rgbdgeo
