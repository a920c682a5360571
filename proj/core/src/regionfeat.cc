#include "rgbdgeo/regionfeat.h"

#include <algorithm>
#include <cmath>

namespace rgbdgeo {
namespace {

constexpr std::array<std::string_view, kGeometricFeatureCount> kFeatureNames =
    {
        "disparity_mean", "disparity_std",  "height_mean",   "height_std",
        "angle_mean",     "angle_std",      "x_mean",        "x_std",
        "y_mean",         "y_std",          "z_mean",        "z_std",
        "x_extent",       "y_extent",       "z_extent",      "height_min",
        "height_max",     "frac_vertical",  "frac_up",       "frac_down",
        "topview_std_min", "topview_std_max",
};

}  // namespace

SuperpixelMap SuperpixelMap::FromLabels(Image<int32_t> labels) {
  if (labels.empty()) throw DimensionError("superpixel map: empty image");
  int32_t max_label = -1;
  for (int32_t l : labels.pixels()) {
    if (l < 0) throw FormatError("superpixel map: negative label");
    max_label = std::max(max_label, l);
  }
  std::vector<uint8_t> seen(static_cast<size_t>(max_label) + 1, 0);
  for (int32_t l : labels.pixels()) seen[l] = 1;
  for (size_t i = 0; i < seen.size(); ++i) {
    if (!seen[i]) {
      throw FormatError("superpixel map: ids not dense, missing " +
                        std::to_string(i));
    }
  }
  SuperpixelMap map;
  map.labels = std::move(labels);
  map.count = max_label + 1;
  return map;
}

std::vector<int64_t> SuperpixelMap::Areas() const {
  std::vector<int64_t> areas(count, 0);
  for (int32_t l : labels.pixels()) ++areas[l];
  return areas;
}

void SuperpixelMoments::Add(const std::array<double, kMomentChannels>& v) {
  ++count;
  const double n = static_cast<double>(count);
  const double dx = v[3] - channels[3].mean;
  for (int c = 0; c < kMomentChannels; ++c) {
    ChannelMoments& ch = channels[c];
    ch.sum += v[c];
    ch.sum_sq += v[c] * v[c];
    const double delta = v[c] - ch.mean;
    ch.mean += delta / n;
    ch.m2 += delta * (v[c] - ch.mean);
    ch.min = std::min(ch.min, v[c]);
    ch.max = std::max(ch.max, v[c]);
  }
  comoment_xz += dx * (v[5] - channels[5].mean);
}

// Pairwise combination of centered moments (Chan et al.).
void SuperpixelMoments::Merge(const SuperpixelMoments& o) {
  if (o.count == 0) return;
  if (count == 0) {
    *this = o;
    return;
  }
  const double na = static_cast<double>(count);
  const double nb = static_cast<double>(o.count);
  const double n = na + nb;
  const double weight = na * nb / n;
  const double dx = o.channels[3].mean - channels[3].mean;
  const double dz = o.channels[5].mean - channels[5].mean;
  for (int c = 0; c < kMomentChannels; ++c) {
    ChannelMoments& ch = channels[c];
    const ChannelMoments& oc = o.channels[c];
    const double delta = oc.mean - ch.mean;
    ch.sum += oc.sum;
    ch.sum_sq += oc.sum_sq;
    ch.m2 += oc.m2 + delta * delta * weight;
    ch.mean += delta * nb / n;
    ch.min = std::min(ch.min, oc.min);
    ch.max = std::max(ch.max, oc.max);
  }
  comoment_xz += o.comoment_xz + dx * dz * weight;
  count += o.count;
  vertical += o.vertical;
  up += o.up;
  down += o.down;
}

SuperpixelAggregates Accumulate(const RegionFeatureInputs& in,
                                const SuperpixelMap& sp,
                                const FacingThresholds& thresholds) {
  const auto& shape = sp.labels;
  RequireSameShape(shape, in.disparity.values, "accumulate");
  RequireSameShape(shape, in.height.values, "accumulate");
  RequireSameShape(shape, in.angle.values, "accumulate");
  RequireSameShape(shape, in.world.points, "accumulate");
  RequireSameShape(shape, in.disparity.valid, "accumulate");
  RequireSameShape(shape, in.height.valid, "accumulate");
  RequireSameShape(shape, in.angle.valid, "accumulate");
  RequireSameShape(shape, in.world.valid, "accumulate");

  SuperpixelAggregates agg;
  agg.thresholds = thresholds;
  agg.superpixels.resize(sp.count);
  for (size_t i = 0; i < shape.size(); ++i) {
    if (!in.disparity.valid[i] || !in.height.valid[i] || !in.angle.valid[i] ||
        !in.world.valid[i]) {
      continue;
    }
    const int32_t label = sp.labels[i];
    if (label < 0 || label >= sp.count) {
      throw FormatError("accumulate: superpixel label out of range");
    }
    SuperpixelMoments& m = agg.superpixels[label];
    const Eigen::Vector3d& p = in.world.points[i];
    const double angle = in.angle.values[i];
    m.Add({in.disparity.values[i], in.height.values[i], angle, p.x(), p.y(),
           p.z()});
    if (angle < thresholds.up_below) {
      ++m.up;
    } else if (angle > thresholds.down_above) {
      ++m.down;
    } else if (std::abs(angle - 90.0) <= thresholds.vertical_within) {
      ++m.vertical;
    }
  }
  return agg;
}

std::span<const std::string_view> GeometricFeatureNames() {
  return kFeatureNames;
}

double GeometricFeatureVector::Get(std::string_view name) const {
  const auto it = std::find(kFeatureNames.begin(), kFeatureNames.end(), name);
  if (it == kFeatureNames.end()) {
    throw InvalidArgument("unknown geometric feature: " + std::string(name));
  }
  return values[static_cast<size_t>(it - kFeatureNames.begin())];
}

std::array<double, 2> SymmetricEigenvalues2(double a, double b, double c) {
  const double mean = 0.5 * (a + c);
  const double radius = std::hypot(0.5 * (a - c), b);
  return {mean - radius, mean + radius};
}

GeometricFeatureVector RegionFeatures(const Region& region,
                                      const SuperpixelAggregates& agg) {
  if (region.empty()) throw InvalidArgument("region_features: empty region");
  SuperpixelMoments total;
  for (int32_t id : region) {
    if (id < 0 || id >= agg.count()) {
      throw InvalidArgument("region_features: superpixel id " +
                            std::to_string(id) + " out of range");
    }
    total.Merge(agg.superpixels[id]);
  }
  if (total.count == 0) {
    throw EstimationError("region_features: region has no valid pixels");
  }

  const double n = static_cast<double>(total.count);
  GeometricFeatureVector f;
  f.valid_count = total.count;
  std::array<double, kMomentChannels> mean{};
  std::array<double, kMomentChannels> var{};
  for (int c = 0; c < kMomentChannels; ++c) {
    mean[c] = total.channels[c].mean;
    var[c] = std::max(0.0, total.channels[c].m2 / n);
    f.values[2 * c] = mean[c];
    f.values[2 * c + 1] = std::sqrt(var[c]);
  }
  for (int axis = 0; axis < 3; ++axis) {
    const auto& ch = total.channels[3 + axis];
    f.values[12 + axis] = ch.max - ch.min;
  }
  f.values[15] = total.channels[1].min;
  f.values[16] = total.channels[1].max;
  f.values[17] = total.vertical / n;
  f.values[18] = total.up / n;
  f.values[19] = total.down / n;

  const double cov_xz = total.comoment_xz / n;
  const auto lambda = SymmetricEigenvalues2(var[3], cov_xz, var[5]);
  f.values[20] = std::sqrt(std::max(0.0, lambda[0]));
  f.values[21] = std::sqrt(std::max(0.0, lambda[1]));
  return f;
}

}  // namespace rgbdgeo
