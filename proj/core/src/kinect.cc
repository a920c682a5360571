#include "rgbdgeo/kinect.h"

#include <cmath>
#include <random>

namespace rgbdgeo {

void KinectModel::Validate() const {
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw InvalidArgument("kinect model: step must be positive");
  }
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw InvalidArgument("kinect model: sigma must be nonnegative");
  }
  if (downscale < 1) {
    throw InvalidArgument("kinect model: downscale must be at least 1");
  }
}

Image<double> LowResolutionNoise(int width, int height, int downscale,
                                 double sigma, uint64_t seed) {
  if (downscale < 1) throw InvalidArgument("noise: downscale must be >= 1");
  Image<double> noise(width, height, 0.0);
  if (sigma == 0.0 || noise.empty()) return noise;

  const int gw = (width - 1) / downscale + 2;
  const int gh = (height - 1) / downscale + 2;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Image<double> grid(gw, gh, 0.0);
  for (size_t i = 0; i < grid.size(); ++i) grid[i] = normal(rng);

  for (int y = 0; y < height; ++y) {
    const int gy = y / downscale;
    const double ty = static_cast<double>(y % downscale) / downscale;
    for (int x = 0; x < width; ++x) {
      const int gx = x / downscale;
      const double tx = static_cast<double>(x % downscale) / downscale;
      const double w00 = (1 - tx) * (1 - ty);
      const double w10 = tx * (1 - ty);
      const double w01 = (1 - tx) * ty;
      const double w11 = tx * ty;
      const double v = w00 * grid(gx, gy) + w10 * grid(gx + 1, gy) +
                       w01 * grid(gx, gy + 1) + w11 * grid(gx + 1, gy + 1);
      const double norm =
          std::sqrt(w00 * w00 + w10 * w10 + w01 * w01 + w11 * w11);
      noise(x, y) = sigma * v / norm;
    }
  }
  return noise;
}

double QuantizeDisparity(double disparity, double step) {
  return std::floor(disparity / step + 0.5) * step;
}

DepthImage SimulateKinect(const DepthImage& clean, const CameraIntrinsics& k,
                          const KinectModel& model, uint64_t seed) {
  k.Validate();
  model.Validate();
  const DisparityMap disparity = DepthToDisparity(clean, k);
  const Image<double> noise = LowResolutionNoise(
      clean.width(), clean.height(), model.downscale, model.sigma, seed);
  DepthImage out(clean.width(), clean.height());
  const double scale = k.baseline * k.fx;
  for (size_t i = 0; i < out.depth.size(); ++i) {
    if (!disparity.valid[i]) continue;
    const double d =
        QuantizeDisparity(disparity.values[i] + noise[i], model.step);
    if (d <= 0.0) continue;
    out.depth[i] = scale / d;
    out.valid[i] = 1;
  }
  return out;
}

}  // namespace rgbdgeo
