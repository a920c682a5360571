#pragma once

#include <cstdint>

#include "rgbdgeo/geomcore.h"
#include "rgbdgeo/image.h"

namespace rgbdgeo {

// Disparity-domain sensor model: Gaussian white noise drawn on a coarse grid
// and bilinearly upsampled, then quantization to multiples of `step`.
struct KinectModel {
  double step = 0.125;  // px
  double sigma = 0.5;   // px, per-pixel marginal std of the noise
  int downscale = 4;    // noise grid spacing in pixels

  // Throws InvalidArgument unless step > 0, sigma >= 0 and downscale >= 1.
  void Validate() const;
};

// Smooth noise field with per-pixel standard deviation `sigma`. Grid nodes sit
// every `downscale` pixels; the bilinear blend is renormalized so the
// marginal variance does not depend on the pixel's position between nodes.
Image<double> LowResolutionNoise(int width, int height, int downscale,
                                 double sigma, uint64_t seed);

// Nearest multiple of `step`, halves rounded up.
double QuantizeDisparity(double disparity, double step);

// Clean depth -> disparity -> noise -> quantization -> depth. Pixels whose
// noisy disparity is not positive become invalid.
DepthImage SimulateKinect(const DepthImage& clean, const CameraIntrinsics& k,
                          const KinectModel& model, uint64_t seed);

}  // namespace rgbdgeo
