#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rgbdgeo/box.h"
#include "rgbdgeo/image.h"
#include "rgbdgeo/regionfeat.h"

namespace rgbdgeo {

struct GroundTruthInstance {
  std::string image_id;
  int class_id = 0;
  int instance = 0;
  Box box;    // tight box of `mask`
  Mask mask;  // nonzero = inside

  // Builds an instance from its mask; throws InvalidArgument if empty.
  static GroundTruthInstance FromMask(std::string image_id, int class_id,
                                      int instance, Mask mask);
};

// Per-superpixel intersection counts of one instance mask, so the IoU with
// any superpixel region costs O(|region|).
class InstanceOverlap {
 public:
  InstanceOverlap(const Mask& mask, const SuperpixelMap& superpixels);

  // IoU between the union of the region's superpixels and the mask.
  // Duplicate ids are counted once.
  double IoU(const Region& region) const;

 private:
  std::vector<int64_t> intersection_;
  std::vector<int64_t> area_;
  int64_t mask_area_ = 0;
};

// Pixel mask covered by a region.
Mask RegionMask(const Region& region, const SuperpixelMap& superpixels);

// Ranked proposals for one image.
struct RankedRegions {
  SuperpixelMap superpixels;
  std::vector<Region> ranked;  // best first
};

struct CoverageCurve {
  std::vector<std::pair<int, double>> points;  // (K, coverage(K))
  int class_count = 0;
  std::map<int, int> instances_per_class;
  // Requested classes that have no ground-truth instance; left out of C.
  std::vector<int> empty_classes;
};

// Class-balanced mean over ground-truth instances of the best IoU among the
// top-K proposals of the instance's image:
//   (1/C) * sum_i (1/N_i) * sum_j max_{k <= K} IoU(R_k, I_ij).
// Classes are visited in ascending id order and instances in input order.
// Images without proposals contribute overlap 0. `classes` optionally lists
// the classes expected to be present.
CoverageCurve ComputeCoverage(
    std::span<const GroundTruthInstance> gt,
    const std::map<std::string, RankedRegions>& images,
    std::span<const int> ks, std::span<const int> classes = {});

double Coverage(std::span<const GroundTruthInstance> gt,
                const std::map<std::string, RankedRegions>& images, int k);

// Greedy suppression within each (image, class): detections are visited in
// ranking order and dropped when their IoU with an already kept detection
// exceeds `threshold`. Output is in ranking order.
std::vector<Detection> Nms(const std::vector<Detection>& detections,
                           double threshold);

enum class ApInterpolation { kContinuous, kElevenPoint };

struct ApOptions {
  double threshold = 0.5;
  ApInterpolation interpolation = ApInterpolation::kContinuous;
};

struct PrPoint {
  double recall = 0.0;
  double precision = 0.0;
  double score = 0.0;
};

struct ApResult {
  double ap = 0.0;
  double threshold = 0.0;
  int num_gt = 0;
  std::vector<PrPoint> curve;  // one point per ranked detection
  std::vector<uint8_t> true_positive;  // ranking order
};

// Overlap between detection `det` and ground truth `gt` (indices into the
// vectors handed to AveragePrecision).
using OverlapFn = std::function<double(size_t det, size_t gt)>;

OverlapFn BoxOverlap(const std::vector<Detection>& detections,
                     const std::vector<GroundTruthInstance>& gt);
// `masks[i]` is the predicted full-image mask of detection i.
OverlapFn MaskOverlap(const std::vector<Mask>& masks,
                      const std::vector<GroundTruthInstance>& gt);

// Detections are swept in ranking order. Each one is matched to the
// unmatched ground truth of the same image with the highest overlap, and is
// a true positive if that overlap reaches the threshold. Returns nullopt when
// there is no ground truth. All inputs are assumed to be a single class.
std::optional<ApResult> AveragePrecision(
    const std::vector<Detection>& detections,
    const std::vector<GroundTruthInstance>& gt, const OverlapFn& overlap,
    const ApOptions& options = {});

struct MeanApResult {
  std::map<int, ApResult> per_class;
  double mean_ap = 0.0;  // over classes with ground truth
};

// Splits by class and averages; classes without ground truth are absent.
// `masks`, when given, selects region overlap (AP^r) instead of box IoU.
MeanApResult MeanAveragePrecision(const std::vector<Detection>& detections,
                                  const std::vector<GroundTruthInstance>& gt,
                                  const ApOptions& options = {},
                                  const std::vector<Mask>* masks = nullptr);

struct SegmentationMetrics {
  double fwavacc = 0.0;
  double avacc = 0.0;
  double pixacc = 0.0;
  std::vector<std::optional<double>> class_iou;  // nullopt: absent in both
  std::vector<int64_t> gt_pixels;
};

// Pixel counts pooled over any number of images.
class SegmentationConfusion {
 public:
  SegmentationConfusion(int num_classes, int32_t ignore_label = 255);

  void Add(const Image<int32_t>& predicted, const Image<int32_t>& truth);
  // Throws EstimationError when every pixel seen so far was ignored.
  SegmentationMetrics Metrics() const;

 private:
  int num_classes_;
  int32_t ignore_label_;
  std::vector<int64_t> tp_, fp_, fn_, gt_pixels_;
  int64_t total_ = 0;
  int64_t correct_ = 0;
};

// Labels are class ids in [0, num_classes); `ignore_label` marks unlabeled
// ground truth (skipped) and "no prediction" in the prediction (a miss).
SegmentationMetrics ComputeSegmentationMetrics(const Image<int32_t>& predicted,
                                               const Image<int32_t>& truth,
                                               int num_classes,
                                               int32_t ignore_label = 255);

}  // namespace rgbdgeo
