#include "rgbdgeo/normals.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

namespace rgbdgeo {
namespace {

// Relative gap below which the two smallest scatter eigenvalues count as tied.
constexpr double kEigenTieTolerance = 1e-10;
constexpr double kHalfDiskEpsilon = 1e-9;

double RadToDeg(double rad) { return rad * 180.0 / std::numbers::pi; }

Eigen::Vector3d OrientTowardCamera(const Eigen::Vector3d& n,
                                   const Eigen::Vector3d& p) {
  return n.dot(p) > 0.0 ? Eigen::Vector3d(-n) : n;
}

struct HalfDiskMoments {
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  Eigen::Matrix3d outer = Eigen::Matrix3d::Zero();
  double range_sum = 0.0;
  int count = 0;

  void Add(const Eigen::Vector3d& shifted, double range) {
    sum += shifted;
    outer.noalias() += shifted * shifted.transpose();
    range_sum += range;
    ++count;
  }
};

}  // namespace

size_t NormalMap::ValidCount() const {
  return static_cast<size_t>(
      std::count_if(valid.pixels().begin(), valid.pixels().end(),
                    [](uint8_t v) { return v != 0; }));
}

std::optional<PlaneFit> FitPlaneFromMoments(const Eigen::Vector3d& sum,
                                            const Eigen::Matrix3d& outer,
                                            int count) {
  if (count < 3) return std::nullopt;
  const Eigen::Vector3d mean = sum / count;
  const Eigen::Matrix3d cov = outer / count - mean * mean.transpose();

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver;
  solver.computeDirect(cov);
  const Eigen::Vector3d& lambda = solver.eigenvalues();
  if (!(lambda[2] > 0.0) ||
      lambda[1] - lambda[0] <= kEigenTieTolerance * lambda[2]) {
    return std::nullopt;
  }
  PlaneFit fit;
  fit.normal = solver.eigenvectors().col(0).normalized();
  fit.centroid = mean;
  fit.eigenvalues = lambda;
  return fit;
}

std::optional<PlaneFit> FitPlane(std::span<const Eigen::Vector3d> points) {
  if (points.size() < 3) return std::nullopt;
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();
  for (const auto& p : points) origin += p;
  origin /= static_cast<double>(points.size());

  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  Eigen::Matrix3d outer = Eigen::Matrix3d::Zero();
  for (const auto& p : points) {
    const Eigen::Vector3d q = p - origin;
    sum += q;
    outer.noalias() += q * q.transpose();
  }
  auto fit = FitPlaneFromMoments(sum, outer, static_cast<int>(points.size()));
  if (fit) fit->centroid += origin;
  return fit;
}

std::vector<Eigen::Vector2i> DiskOffsets(int radius) {
  std::vector<Eigen::Vector2i> offsets;
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      if (dx * dx + dy * dy <= radius * radius) offsets.emplace_back(dx, dy);
    }
  }
  return offsets;
}

NormalMap EstimateNormals(const PointCloud& cloud, int radius) {
  if (radius < 1) throw InvalidArgument("estimate_normals: radius must be >= 1");
  RequireSameShape(cloud.points, cloud.valid, "estimate_normals");

  const int w = cloud.width();
  const int h = cloud.height();
  const auto offsets = DiskOffsets(radius);
  NormalMap out(w, h, radius);

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!cloud.IsValid(x, y)) continue;
      const Eigen::Vector3d& center = cloud.points(x, y);
      Eigen::Vector3d sum = Eigen::Vector3d::Zero();
      Eigen::Matrix3d outer = Eigen::Matrix3d::Zero();
      int count = 0;
      for (const auto& o : offsets) {
        const int u = x + o.x();
        const int v = y + o.y();
        if (!cloud.valid.InBounds(u, v) || !cloud.IsValid(u, v)) continue;
        const Eigen::Vector3d q = cloud.points(u, v) - center;
        sum += q;
        outer.noalias() += q * q.transpose();
        ++count;
      }
      const auto fit = FitPlaneFromMoments(sum, outer, count);
      if (!fit) continue;
      out.normals(x, y) = OrientTowardCamera(fit->normal, center);
      out.valid(x, y) = 1;
    }
  }
  return out;
}

GradientMaps NormalGradients(const PointCloud& cloud, int radius,
                             int orientations) {
  if (radius < 1) throw InvalidArgument("normal_gradients: radius must be >= 1");
  if (orientations < 2) {
    throw InvalidArgument("normal_gradients: need at least 2 orientations");
  }
  RequireSameShape(cloud.points, cloud.valid, "normal_gradients");

  const int w = cloud.width();
  const int h = cloud.height();
  GradientMaps maps;
  maps.radius = radius;
  maps.orientations = orientations;
  maps.ng_plus.assign(orientations, Image<double>(w, h, 0.0));
  maps.ng_minus.assign(orientations, Image<double>(w, h, 0.0));
  maps.dg.assign(orientations, Image<double>(w, h, 0.0));
  maps.valid.assign(orientations, Mask(w, h, 0));

  const auto disk = DiskOffsets(radius);
  // side[o][i]: +1 / -1 / 0 membership of disk offset i for orientation o.
  std::vector<std::vector<int>> side(orientations);
  for (int o = 0; o < orientations; ++o) {
    const double theta = o * std::numbers::pi / orientations;
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    side[o].resize(disk.size());
    for (size_t i = 0; i < disk.size(); ++i) {
      const double proj = disk[i].x() * c + disk[i].y() * s;
      side[o][i] = proj > kHalfDiskEpsilon ? 1
                   : proj < -kHalfDiskEpsilon ? -1
                                              : 0;
    }
  }

  std::vector<Eigen::Vector3d> shifted(disk.size());
  std::vector<double> range(disk.size());
  std::vector<uint8_t> present(disk.size());

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!cloud.IsValid(x, y)) continue;
      const Eigen::Vector3d& center = cloud.points(x, y);
      for (size_t i = 0; i < disk.size(); ++i) {
        const int u = x + disk[i].x();
        const int v = y + disk[i].y();
        present[i] = cloud.valid.InBounds(u, v) && cloud.IsValid(u, v);
        if (!present[i]) continue;
        shifted[i] = cloud.points(u, v) - center;
        range[i] = cloud.points(u, v).norm();
      }

      for (int o = 0; o < orientations; ++o) {
        HalfDiskMoments pos;
        HalfDiskMoments neg;
        for (size_t i = 0; i < disk.size(); ++i) {
          if (!present[i] || side[o][i] == 0) continue;
          (side[o][i] > 0 ? pos : neg).Add(shifted[i], range[i]);
        }
        const auto fit_a = FitPlaneFromMoments(pos.sum, pos.outer, pos.count);
        const auto fit_b = FitPlaneFromMoments(neg.sum, neg.outer, neg.count);
        if (!fit_a || !fit_b) continue;

        const Eigen::Vector3d ca = fit_a->centroid + center;
        const Eigen::Vector3d cb = fit_b->centroid + center;
        const Eigen::Vector3d na = OrientTowardCamera(fit_a->normal, ca);
        const Eigen::Vector3d nb = OrientTowardCamera(fit_b->normal, cb);

        const double angle =
            RadToDeg(std::acos(std::clamp(na.dot(nb), -1.0, 1.0)));
        // Positive when each centroid sits in front of the other's plane.
        const double facing = na.dot(cb - ca) + nb.dot(ca - cb);
        if (facing > 0.0) {
          maps.ng_plus[o](x, y) = angle;
        } else {
          maps.ng_minus[o](x, y) = angle;
        }
        maps.dg[o](x, y) =
            std::abs(pos.range_sum / pos.count - neg.range_sum / neg.count);
        maps.valid[o](x, y) = 1;
      }
    }
  }
  return maps;
}

std::vector<GradientMaps> NormalGradients(const PointCloud& cloud,
                                          std::span<const int> radii,
                                          int orientations) {
  std::vector<GradientMaps> out;
  out.reserve(radii.size());
  for (int r : radii) out.push_back(NormalGradients(cloud, r, orientations));
  return out;
}

}  // namespace rgbdgeo
