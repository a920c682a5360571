#include "rgbdgeo/pipeline.h"

#include <Eigen/Core>

namespace rgbdgeo {

GeocentricResult ComputeGeocentric(const DepthImage& depth,
                                   const CameraIntrinsics& k,
                                   const GeocentricOptions& options) {
  GeocentricResult out;
  out.cloud = Backproject(depth, k);
  out.normals = EstimateNormals(out.cloud, options.normal_radius);
  try {
    out.gravity = EstimateGravity(out.normals, options.gravity);
  } catch (const EstimationError&) {
    if (!options.gravity_fallback) throw;
    out.gravity = GravityEstimate{};
    out.fallback_used = true;
  }
  out.channels.disparity = DepthToDisparity(depth, k);
  out.channels.angle = AngleWithGravity(out.normals, out.gravity);
  // A depth map with no valid pixel has no floor; leave height invalid.
  bool any_valid = false;
  for (const uint8_t v : out.cloud.valid.pixels()) any_valid |= v != 0;
  out.channels.height =
      any_valid ? HeightAboveGround(out.cloud, out.gravity,
                                    options.floor_percentile)
                : ScalarMap(depth.width(), depth.height());
  return out;
}

RegionFeatureInputs MakeRegionFeatureInputs(const GeocentricResult& geo) {
  return RegionFeatureInputs{geo.channels.disparity, geo.channels.height,
                             geo.channels.angle,
                             GravityAlignedCloud(geo.cloud, geo.gravity)};
}

const std::vector<std::string>& MaskFeatureChannelNames() {
  static const std::vector<std::string> names = {
      "disparity", "height", "angle",        "normal_x",   "normal_y",
      "normal_z",  "gray",   "hha_disparity", "hha_height", "hha_angle"};
  return names;
}

FeatureImage BuildFeatureImage(const GeocentricResult& geo,
                               const HhaImage& hha,
                               const Image<uint8_t>* gray) {
  const int w = geo.cloud.width();
  const int h = geo.cloud.height();
  if (hha.width != w || hha.height != h) {
    throw DimensionError("feature image: HHA size differs from depth");
  }
  if (gray != nullptr) RequireSameShape(*gray, geo.cloud.valid, "feature image");
  const auto& names = MaskFeatureChannelNames();
  std::vector<Image<float>> channels(names.size(), Image<float>(w, h, 0.0f));

  const ScalarMap* scalars[3] = {&geo.channels.disparity, &geo.channels.height,
                                 &geo.channels.angle};
  for (int c = 0; c < 3; ++c) {
    for (size_t i = 0; i < channels[c].size(); ++i) {
      if (scalars[c]->valid[i]) {
        channels[c][i] = static_cast<float>(scalars[c]->values[i]);
      }
    }
  }
  const Eigen::Matrix3d r = GravityAlignedRotation(geo.gravity);
  for (size_t i = 0; i < channels[3].size(); ++i) {
    if (!geo.normals.valid[i]) continue;
    const Eigen::Vector3d n = r * geo.normals.normals[i];
    for (int a = 0; a < 3; ++a) channels[3 + a][i] = static_cast<float>(n[a]);
  }
  if (gray != nullptr) {
    for (size_t i = 0; i < channels[6].size(); ++i) {
      channels[6][i] = static_cast<float>((*gray)[i]);
    }
  }
  for (size_t i = 0; i < channels[7].size(); ++i) {
    for (int c = 0; c < 3; ++c) {
      channels[7 + c][i] = static_cast<float>(hha.data[i * 3 + c]);
    }
  }
  FeatureImage image;
  image.width = w;
  image.height = h;
  for (size_t c = 0; c < names.size(); ++c) {
    image.AddChannel(names[c], std::move(channels[c]));
  }
  return image;
}

}  // namespace rgbdgeo
