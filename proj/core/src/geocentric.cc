#include "rgbdgeo/geocentric.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>

namespace rgbdgeo {
namespace {

double DegToRad(double deg) { return deg * std::numbers::pi / 180.0; }
double RadToDeg(double rad) { return rad * 180.0 / std::numbers::pi; }

struct BandCounts {
  size_t parallel = 0;
  size_t perpendicular = 0;
  size_t either = 0;
};

BandCounts CountBands(const std::vector<Eigen::Vector3d>& normals,
                      const Eigen::Vector3d& g, double theta_deg) {
  const double cos_t = std::cos(DegToRad(theta_deg));
  const double sin_t = std::sin(DegToRad(theta_deg));
  BandCounts counts;
  for (const auto& n : normals) {
    const double c = std::abs(n.dot(g));
    const bool par = c > cos_t;
    const bool perp = c < sin_t;
    counts.parallel += par;
    counts.perpendicular += perp;
    counts.either += par || perp;
  }
  return counts;
}

}  // namespace

GravityEstimate EstimateGravity(const NormalMap& normals,
                                const GravityOptions& options) {
  if (options.schedule_deg.empty()) {
    throw InvalidArgument("estimate_gravity: empty iteration schedule");
  }
  std::vector<Eigen::Vector3d> samples;
  samples.reserve(normals.normals.size());
  for (size_t i = 0; i < normals.normals.size(); ++i) {
    if (normals.valid[i]) samples.push_back(normals.normals[i]);
  }
  if (samples.size() < static_cast<size_t>(options.min_normals)) {
    throw EstimationError("estimate_gravity: " +
                          std::to_string(samples.size()) +
                          " valid normals, need at least " +
                          std::to_string(options.min_normals));
  }

  Eigen::Vector3d g = Eigen::Vector3d::UnitY();
  GravityEstimate estimate;
  for (double theta : options.schedule_deg) {
    const double cos_t = std::cos(DegToRad(theta));
    const double sin_t = std::sin(DegToRad(theta));
    Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
    size_t selected = 0;
    for (const auto& n : samples) {
      const double c = std::abs(n.dot(g));
      const bool par = c > cos_t;
      const bool perp = c < sin_t;
      if (perp) m.noalias() += n * n.transpose();
      if (par) m.noalias() -= n * n.transpose();
      selected += par || perp;
    }
    if (selected == 0) {
      throw EstimationError("estimate_gravity: no normals within " +
                            std::to_string(theta) + " deg bands");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(m);
    g = solver.eigenvectors().col(0).normalized();
    if (g.y() < 0.0) g = -g;
    ++estimate.iterations_run;
  }

  const BandCounts final_counts =
      CountBands(samples, g, options.schedule_deg.back());
  estimate.down = g;
  estimate.aligned_fraction =
      static_cast<double>(final_counts.either) / samples.size();
  return estimate;
}

ScalarMap AngleWithGravity(const NormalMap& normals, const GravityEstimate& g) {
  RequireSameShape(normals.normals, normals.valid, "angle_with_gravity");
  const Eigen::Vector3d up = g.up();
  ScalarMap out(normals.width(), normals.height());
  for (size_t i = 0; i < normals.normals.size(); ++i) {
    if (!normals.valid[i]) continue;
    const double c = std::clamp(normals.normals[i].dot(up), -1.0, 1.0);
    out.values[i] = RadToDeg(std::acos(c));
    out.valid[i] = 1;
  }
  return out;
}

double Percentile(std::vector<double>& values, double percent) {
  if (values.empty()) throw InvalidArgument("percentile of empty set");
  if (!(percent >= 0.0 && percent <= 100.0)) {
    throw InvalidArgument("percentile outside [0, 100]");
  }
  const double n = static_cast<double>(values.size());
  const double rank = percent * n / 100.0;
  // Guard against rank landing a hair above an integer from rounding.
  auto k = static_cast<long long>(std::ceil(rank - 1e-9 * std::max(1.0, rank)));
  k = std::clamp<long long>(k - 1, 0, static_cast<long long>(values.size()) - 1);
  auto nth = values.begin() + k;
  std::nth_element(values.begin(), nth, values.end());
  return *nth;
}

ScalarMap Elevation(const PointCloud& cloud, const GravityEstimate& g) {
  RequireSameShape(cloud.points, cloud.valid, "elevation");
  const Eigen::Vector3d up = g.up();
  ScalarMap out(cloud.width(), cloud.height());
  for (size_t i = 0; i < cloud.points.size(); ++i) {
    if (!cloud.valid[i]) continue;
    out.values[i] = up.dot(cloud.points[i]);
    out.valid[i] = 1;
  }
  return out;
}

double FloorReference(const ScalarMap& elevation, double percentile) {
  std::vector<double> values;
  for (size_t i = 0; i < elevation.values.size(); ++i) {
    if (elevation.valid[i]) values.push_back(elevation.values[i]);
  }
  if (values.empty()) {
    throw EstimationError("floor reference: no valid points");
  }
  return Percentile(values, percentile);
}

ScalarMap HeightAboveGround(const PointCloud& cloud, const GravityEstimate& g,
                            double floor_percentile) {
  ScalarMap height = Elevation(cloud, g);
  const double floor = FloorReference(height, floor_percentile);
  for (size_t i = 0; i < height.values.size(); ++i) {
    if (height.valid[i]) height.values[i] -= floor;
  }
  return height;
}

Eigen::Matrix3d GravityAlignedRotation(const GravityEstimate& g) {
  const Eigen::Vector3d up = g.up().normalized();
  Eigen::Vector3d x_axis = Eigen::Vector3d::UnitX() - up.x() * up;
  if (x_axis.norm() < 1e-6) {
    x_axis = Eigen::Vector3d::UnitZ() - up.z() * up;
  }
  x_axis.normalize();
  Eigen::Matrix3d r;
  r.row(0) = x_axis.transpose();
  r.row(1) = up.transpose();
  r.row(2) = x_axis.cross(up).transpose();
  return r;
}

PointCloud GravityAlignedCloud(const PointCloud& cloud,
                               const GravityEstimate& g) {
  return RotateCloud(cloud, GravityAlignedRotation(g));
}

void Calibration::Validate() const {
  for (int c = 0; c < 3; ++c) {
    if (!std::isfinite(low[c]) || !std::isfinite(high[c]) ||
        !(low[c] < high[c])) {
      throw InvalidArgument("calibration: channel " +
                            std::string(kHhaChannelNames[c]) +
                            " needs finite low < high");
    }
  }
}

Calibration FitCalibration(std::span<const GeocentricChannels> images,
                           const CalibrationOptions& options) {
  if (images.empty()) throw InvalidArgument("fit_calibration: no images");
  if (!(options.low_percentile < options.high_percentile)) {
    throw InvalidArgument("fit_calibration: low percentile >= high percentile");
  }
  Calibration cal;
  for (int c = 0; c < 3; ++c) {
    std::vector<double> pooled;
    for (const auto& image : images) {
      const ScalarMap& map = c == 0   ? image.disparity
                             : c == 1 ? image.height
                                      : image.angle;
      for (size_t i = 0; i < map.values.size(); ++i) {
        if (map.valid[i]) pooled.push_back(map.values[i]);
      }
    }
    if (pooled.empty()) {
      throw EstimationError("fit_calibration: no valid " +
                            std::string(kHhaChannelNames[c]) + " values");
    }
    cal.low[c] = Percentile(pooled, options.low_percentile);
    cal.high[c] = Percentile(pooled, options.high_percentile);
    if (!(cal.low[c] < cal.high[c])) {
      throw EstimationError("fit_calibration: degenerate " +
                            std::string(kHhaChannelNames[c]) + " range");
    }
  }
  return cal;
}

uint8_t EncodeChannelValue(double value, double low, double high) {
  const double t = (std::clamp(value, low, high) - low) / (high - low);
  const double scaled = std::floor(255.0 * t + 0.5);
  return static_cast<uint8_t>(std::clamp(scaled, 0.0, 255.0));
}

HhaImage EncodeHha(const ScalarMap& disparity, const ScalarMap& height,
                   const ScalarMap& angle, const Calibration& calibration) {
  RequireSameShape(disparity.values, height.values, "encode_hha");
  RequireSameShape(disparity.values, angle.values, "encode_hha");
  RequireSameShape(disparity.values, disparity.valid, "encode_hha");
  RequireSameShape(height.values, height.valid, "encode_hha");
  RequireSameShape(angle.values, angle.valid, "encode_hha");
  calibration.Validate();

  HhaImage out(disparity.width(), disparity.height());
  const ScalarMap* maps[3] = {&disparity, &height, &angle};
  for (size_t i = 0; i < disparity.values.size(); ++i) {
    if (!disparity.valid[i] || !height.valid[i] || !angle.valid[i]) continue;
    for (int c = 0; c < 3; ++c) {
      out.data[i * 3 + c] = EncodeChannelValue(
          maps[c]->values[i], calibration.low[c], calibration.high[c]);
    }
  }
  return out;
}

}  // namespace rgbdgeo
