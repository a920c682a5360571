#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "rgbdgeo/geomcore.h"
#include "rgbdgeo/image.h"
#include "rgbdgeo/normals.h"

namespace rgbdgeo {

struct GravityOptions {
  // Band half-width in degrees for each iteration.
  std::vector<double> schedule_deg = {45.0, 45.0, 45.0, 15.0, 15.0, 15.0};
  int min_normals = 100;
};

struct GravityEstimate {
  // Unit gravity ("down") in the camera frame, with down.y() >= 0.
  Eigen::Vector3d down = Eigen::Vector3d::UnitY();
  int iterations_run = 0;
  // Fraction of valid normals inside the final parallel or perpendicular band.
  double aligned_fraction = 0.0;

  Eigen::Vector3d up() const { return -down; }
};

// Iteratively re-estimates gravity as the direction most parallel to the
// normals near +-g and most perpendicular to the normals near the horizontal
// band, starting from the image-down axis. Throws EstimationError when fewer
// than `min_normals` normals are valid or a band selection comes up empty.
GravityEstimate EstimateGravity(const NormalMap& normals,
                                const GravityOptions& options = {});

// Degrees in [0, 180] between each normal and up = -g.
ScalarMap AngleWithGravity(const NormalMap& normals, const GravityEstimate& g);

inline constexpr double kDefaultFloorPercentile = 1.0;

// (-g) . p over valid points, i.e. signed elevation along "up" relative to the
// camera center.
ScalarMap Elevation(const PointCloud& cloud, const GravityEstimate& g);

// Floor reference: the given percentile of the valid elevations.
double FloorReference(const ScalarMap& elevation,
                      double percentile = kDefaultFloorPercentile);

// Height above the floor reference. Negative values are kept.
ScalarMap HeightAboveGround(const PointCloud& cloud, const GravityEstimate& g,
                            double floor_percentile = kDefaultFloorPercentile);

// Rotation taking camera coordinates into a gravity-aligned frame whose Y
// axis is up and whose X axis is the camera X axis made horizontal.
Eigen::Matrix3d GravityAlignedRotation(const GravityEstimate& g);

// Applies GravityAlignedRotation to every valid point.
PointCloud GravityAlignedCloud(const PointCloud& cloud,
                               const GravityEstimate& g);

// Nearest-rank percentile (smallest value whose empirical CDF reaches p/100).
// Depends only on the empirical distribution, so pooling identical data sets
// does not change it. `values` is reordered. Throws on empty input.
double Percentile(std::vector<double>& values, double percent);

enum class HhaChannel : int { kDisparity = 0, kHeight = 1, kAngle = 2 };
inline constexpr std::array<std::string_view, 3> kHhaChannelNames = {
    "disparity", "height", "angle"};

// Per-channel clipping range in native units (px, m, degrees).
struct Calibration {
  std::array<double, 3> low{};
  std::array<double, 3> high{};

  void Validate() const;
  bool operator==(const Calibration&) const = default;
};

struct CalibrationOptions {
  double low_percentile = 0.5;
  double high_percentile = 99.5;
};

// The three geocentric channels of one image.
struct GeocentricChannels {
  ScalarMap disparity;
  ScalarMap height;
  ScalarMap angle;
};

// Percentile ranges of valid values pooled over all images.
Calibration FitCalibration(std::span<const GeocentricChannels> images,
                           const CalibrationOptions& options = {});

// 8-bit, 3-channel, interleaved (disparity, height, angle).
struct HhaImage {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> data;

  HhaImage() = default;
  HhaImage(int w, int h)
      : width(w), height(h), data(static_cast<size_t>(w) * h * 3, 0) {}

  static constexpr int channels() { return 3; }
  uint8_t& at(int x, int y, int c) {
    return data[(static_cast<size_t>(y) * width + x) * 3 + c];
  }
  uint8_t at(int x, int y, int c) const {
    return data[(static_cast<size_t>(y) * width + x) * 3 + c];
  }
  bool operator==(const HhaImage&) const = default;
};

// round-half-up(255 * (clamp(v, low, high) - low) / (high - low)).
uint8_t EncodeChannelValue(double value, double low, double high);

// A pixel is encoded only when all three channels are valid there; other
// pixels are 0 in every channel.
HhaImage EncodeHha(const ScalarMap& disparity, const ScalarMap& height,
                   const ScalarMap& angle, const Calibration& calibration);

inline HhaImage EncodeHha(const GeocentricChannels& channels,
                          const Calibration& calibration) {
  return EncodeHha(channels.disparity, channels.height, channels.angle,
                   calibration);
}

}  // namespace rgbdgeo
