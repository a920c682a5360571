#include "rgbdgeo/geomcore.h"

#include <cmath>
#include <string>

namespace rgbdgeo {

void CameraIntrinsics::Validate() const {
  const auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(fx) || !positive(fy)) {
    throw InvalidArgument("intrinsics: focal lengths must be positive");
  }
  if (!positive(baseline)) {
    throw InvalidArgument("intrinsics: baseline must be positive");
  }
  if (!std::isfinite(cx) || !std::isfinite(cy)) {
    throw InvalidArgument("intrinsics: principal point must be finite");
  }
}

void CameraIntrinsics::ValidateFor(int width, int height) const {
  Validate();
  if (cx < 0.0 || cy < 0.0 || cx > width || cy > height) {
    throw InvalidArgument("intrinsics: principal point (" +
                          std::to_string(cx) + ", " + std::to_string(cy) +
                          ") outside " + std::to_string(width) + "x" +
                          std::to_string(height) + " image");
  }
}

void DepthImage::Set(int x, int y, double z) {
  if (std::isfinite(z) && z > 0.0) {
    depth(x, y) = z;
    valid(x, y) = 1;
  } else {
    depth(x, y) = 0.0;
    valid(x, y) = 0;
  }
}

PointCloud Backproject(const DepthImage& depth, const CameraIntrinsics& k) {
  if (depth.width() == 0 || depth.height() == 0) {
    throw DimensionError("backproject: empty depth image");
  }
  RequireSameShape(depth.depth, depth.valid, "backproject");
  k.Validate();

  PointCloud cloud(depth.width(), depth.height());
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) {
      if (!depth.valid(x, y)) continue;
      const double z = depth.depth(x, y);
      cloud.points(x, y) =
          Eigen::Vector3d((x - k.cx) * z / k.fx, (y - k.cy) * z / k.fy, z);
      cloud.valid(x, y) = 1;
    }
  }
  return cloud;
}

Eigen::Vector2d Project(const Eigen::Vector3d& point,
                        const CameraIntrinsics& k) {
  return Eigen::Vector2d(k.fx * point.x() / point.z() + k.cx,
                         k.fy * point.y() / point.z() + k.cy);
}

DisparityMap DepthToDisparity(const DepthImage& depth,
                              const CameraIntrinsics& k) {
  RequireSameShape(depth.depth, depth.valid, "depth_to_disparity");
  k.Validate();
  const double scale = k.baseline * k.fx;
  DisparityMap out(depth.width(), depth.height());
  for (size_t i = 0; i < depth.depth.size(); ++i) {
    if (!depth.valid[i]) continue;
    out.values[i] = scale / depth.depth[i];
    out.valid[i] = 1;
  }
  return out;
}

DepthImage DisparityToDepth(const DisparityMap& disparity,
                            const CameraIntrinsics& k) {
  RequireSameShape(disparity.values, disparity.valid, "disparity_to_depth");
  k.Validate();
  const double scale = k.baseline * k.fx;
  DepthImage out(disparity.width(), disparity.height());
  for (size_t i = 0; i < disparity.values.size(); ++i) {
    const double d = disparity.values[i];
    if (!disparity.valid[i] || !(d > 0.0)) continue;
    out.depth[i] = scale / d;
    out.valid[i] = 1;
  }
  return out;
}

PointCloud RotateCloud(const PointCloud& cloud, const Eigen::Matrix3d& r) {
  PointCloud out = cloud;
  for (size_t i = 0; i < out.points.size(); ++i) {
    if (out.valid[i]) out.points[i] = r * cloud.points[i];
  }
  return out;
}

}  // namespace rgbdgeo
