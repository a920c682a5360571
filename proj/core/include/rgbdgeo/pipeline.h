#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rgbdgeo/geocentric.h"
#include "rgbdgeo/geomcore.h"
#include "rgbdgeo/maskforest.h"
#include "rgbdgeo/normals.h"
#include "rgbdgeo/regionfeat.h"

namespace rgbdgeo {

struct GeocentricOptions {
  int normal_radius = 5;
  GravityOptions gravity;
  double floor_percentile = kDefaultFloorPercentile;
  // On estimation failure use the image-down axis instead of throwing.
  bool gravity_fallback = true;
};

struct GeocentricResult {
  PointCloud cloud;
  NormalMap normals;
  GravityEstimate gravity;
  bool fallback_used = false;
  GeocentricChannels channels;
};

// Depth -> cloud -> normals -> gravity -> disparity, height, angle.
GeocentricResult ComputeGeocentric(const DepthImage& depth,
                                   const CameraIntrinsics& k,
                                   const GeocentricOptions& options = {});

RegionFeatureInputs MakeRegionFeatureInputs(const GeocentricResult& geo);

// Image channel names of the mask-forest feature stack, in order.
const std::vector<std::string>& MaskFeatureChannelNames();

// disparity, height, angle, normal x/y/z (gravity-aligned frame), gray,
// and the three HHA bytes. Invalid pixels read 0. Without a gray image the
// gray channel is 0.
FeatureImage BuildFeatureImage(const GeocentricResult& geo,
                               const HhaImage& hha,
                               const Image<uint8_t>* gray = nullptr);

}  // namespace rgbdgeo
