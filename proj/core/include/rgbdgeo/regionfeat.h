#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rgbdgeo/geomcore.h"
#include "rgbdgeo/image.h"

namespace rgbdgeo {

// Dense superpixel labels in [0, count).
struct SuperpixelMap {
  Image<int32_t> labels;
  int count = 0;

  int width() const { return labels.width(); }
  int height() const { return labels.height(); }

  // Builds a map and checks that every label is in [0, max + 1) and that
  // each id in that range occurs at least once.
  static SuperpixelMap FromLabels(Image<int32_t> labels);
  // Pixel count of each superpixel.
  std::vector<int64_t> Areas() const;
};

// A region proposal: a set of superpixel ids.
using Region = std::vector<int32_t>;

// Surface-facing classification by angle with gravity (degrees).
struct FacingThresholds {
  double up_below = 30.0;        // angle < up_below            -> facing up
  double down_above = 150.0;     // angle > down_above          -> facing down
  double vertical_within = 30.0;  // |angle - 90| <= vertical_within -> vertical
};

enum class MomentChannel : int {
  kDisparity = 0,
  kHeight,
  kAngle,
  kX,
  kY,
  kZ,
};
inline constexpr int kMomentChannels = 6;

// Raw sums plus running centered moments (mean, m2). Features are combined
// from the centered form, which keeps zero spreads at exactly zero.
struct ChannelMoments {
  double sum = 0.0;
  double sum_sq = 0.0;
  double mean = 0.0;
  double m2 = 0.0;  // sum of squared deviations from `mean`
  double min = std::numeric_limits<double>::infinity();
  double max = -std::numeric_limits<double>::infinity();
};

// First and second order moments of one superpixel over its valid pixels.
struct SuperpixelMoments {
  int64_t count = 0;
  std::array<ChannelMoments, kMomentChannels> channels{};
  double comoment_xz = 0.0;  // sum of (x - mean_x)(z - mean_z)
  int64_t vertical = 0;
  int64_t up = 0;
  int64_t down = 0;

  // Adds one pixel; `values` is ordered as MomentChannel.
  void Add(const std::array<double, kMomentChannels>& values);
  void Merge(const SuperpixelMoments& o);
};

struct SuperpixelAggregates {
  std::vector<SuperpixelMoments> superpixels;
  FacingThresholds thresholds;

  int count() const { return static_cast<int>(superpixels.size()); }
};

// Per-pixel inputs. `world` is the cloud in the gravity-aligned frame
// (Y up, X and Z horizontal). A pixel contributes only where disparity,
// height, angle and world are all valid.
struct RegionFeatureInputs {
  ScalarMap disparity;
  ScalarMap height;
  ScalarMap angle;
  PointCloud world;
};

SuperpixelAggregates Accumulate(const RegionFeatureInputs& inputs,
                                const SuperpixelMap& superpixels,
                                const FacingThresholds& thresholds = {});

inline constexpr int kGeometricFeatureCount = 22;

// Feature names in vector order.
std::span<const std::string_view> GeometricFeatureNames();

struct GeometricFeatureVector {
  std::array<double, kGeometricFeatureCount> values{};
  int64_t valid_count = 0;

  double operator[](size_t i) const { return values[i]; }
  // Throws InvalidArgument for an unknown name.
  double Get(std::string_view name) const;
};

// Combines superpixel moments into the region's geometric features:
// mean/std of disparity, height, angle, X, Y, Z; X/Y/Z extent; min/max height;
// vertical/up/down fractions; min/max top-view std. Std uses 1/N.
// Throws InvalidArgument for an empty region or out-of-range ids and
// EstimationError when the region has no valid pixel.
GeometricFeatureVector RegionFeatures(const Region& region,
                                      const SuperpixelAggregates& aggregates);

// Eigenvalues (ascending) of the symmetric 2x2 matrix [[a, b], [b, c]].
std::array<double, 2> SymmetricEigenvalues2(double a, double b, double c);

}  // namespace rgbdgeo
