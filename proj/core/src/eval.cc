#include "rgbdgeo/eval.h"

#include <algorithm>
#include <set>
#include <tuple>

namespace rgbdgeo {

GroundTruthInstance GroundTruthInstance::FromMask(std::string image_id,
                                                  int class_id, int instance,
                                                  Mask mask) {
  GroundTruthInstance gt;
  gt.box = TightBox(mask);
  if (!gt.box.IsValid()) {
    throw InvalidArgument("ground truth instance " + std::to_string(instance) +
                          " in image " + image_id + " has an empty mask");
  }
  gt.image_id = std::move(image_id);
  gt.class_id = class_id;
  gt.instance = instance;
  gt.mask = std::move(mask);
  return gt;
}

InstanceOverlap::InstanceOverlap(const Mask& mask,
                                 const SuperpixelMap& superpixels)
    : intersection_(superpixels.count, 0), area_(superpixels.count, 0) {
  RequireSameShape(mask, superpixels.labels, "instance_overlap");
  for (size_t i = 0; i < mask.size(); ++i) {
    const int32_t label = superpixels.labels[i];
    ++area_[label];
    if (mask[i]) {
      ++intersection_[label];
      ++mask_area_;
    }
  }
}

double InstanceOverlap::IoU(const Region& region) const {
  int64_t inter = 0;
  int64_t region_area = 0;
  std::vector<int32_t> ids = region;
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  for (int32_t id : ids) {
    if (id < 0 || id >= static_cast<int32_t>(area_.size())) {
      throw InvalidArgument("region references superpixel " +
                            std::to_string(id) + " out of range");
    }
    inter += intersection_[id];
    region_area += area_[id];
  }
  const int64_t uni = mask_area_ + region_area - inter;
  return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

Mask RegionMask(const Region& region, const SuperpixelMap& superpixels) {
  std::vector<uint8_t> member(superpixels.count, 0);
  for (int32_t id : region) {
    if (id < 0 || id >= superpixels.count) {
      throw InvalidArgument("region references superpixel " +
                            std::to_string(id) + " out of range");
    }
    member[id] = 1;
  }
  Mask mask(superpixels.width(), superpixels.height(), 0);
  for (size_t i = 0; i < mask.size(); ++i) {
    mask[i] = member[superpixels.labels[i]];
  }
  return mask;
}

CoverageCurve ComputeCoverage(
    std::span<const GroundTruthInstance> gt,
    const std::map<std::string, RankedRegions>& images,
    std::span<const int> ks, std::span<const int> classes) {
  for (int k : ks) {
    if (k < 1) throw InvalidArgument("coverage: K must be >= 1");
  }
  const int max_k = ks.empty() ? 0 : *std::max_element(ks.begin(), ks.end());

  // best[j][k-1]: max overlap of instance j over the top-k proposals.
  std::map<int, std::vector<std::vector<double>>> best_by_class;
  for (const auto& instance : gt) {
    std::vector<double> running(max_k, 0.0);
    const auto it = images.find(instance.image_id);
    if (it != images.end()) {
      const InstanceOverlap overlap(instance.mask, it->second.superpixels);
      double best = 0.0;
      const auto& ranked = it->second.ranked;
      for (int k = 0; k < max_k; ++k) {
        if (k < static_cast<int>(ranked.size())) {
          best = std::max(best, overlap.IoU(ranked[k]));
        }
        running[k] = best;
      }
    }
    best_by_class[instance.class_id].push_back(std::move(running));
  }

  CoverageCurve curve;
  for (int c : classes) {
    if (!best_by_class.contains(c)) curve.empty_classes.push_back(c);
  }
  for (const auto& [c, instances] : best_by_class) {
    curve.instances_per_class[c] = static_cast<int>(instances.size());
  }
  curve.class_count = static_cast<int>(best_by_class.size());
  if (curve.class_count == 0) {
    throw EstimationError("coverage: no ground-truth instances");
  }

  for (int k : ks) {
    double total = 0.0;
    for (const auto& [c, instances] : best_by_class) {
      double class_sum = 0.0;
      for (const auto& running : instances) class_sum += running[k - 1];
      total += (1.0 / static_cast<double>(instances.size())) * class_sum;
    }
    curve.points.emplace_back(k, (1.0 / curve.class_count) * total);
  }
  return curve;
}

double Coverage(std::span<const GroundTruthInstance> gt,
                const std::map<std::string, RankedRegions>& images, int k) {
  const int ks[] = {k};
  return ComputeCoverage(gt, images, ks).points.front().second;
}

std::vector<Detection> Nms(const std::vector<Detection>& detections,
                           double threshold) {
  const auto order = RankDetections(detections);
  std::map<std::pair<std::string, int>, std::vector<size_t>> kept_by_group;
  std::vector<Detection> out;
  for (size_t idx : order) {
    const Detection& d = detections[idx];
    auto& kept = kept_by_group[{d.image_id, d.class_id}];
    const bool suppressed =
        std::any_of(kept.begin(), kept.end(), [&](size_t k) {
          return BoxIoU(detections[k].box, d.box) > threshold;
        });
    if (suppressed) continue;
    kept.push_back(idx);
    out.push_back(d);
  }
  return out;
}

OverlapFn BoxOverlap(const std::vector<Detection>& detections,
                     const std::vector<GroundTruthInstance>& gt) {
  return [&detections, &gt](size_t d, size_t g) {
    return BoxIoU(detections[d].box, gt[g].box);
  };
}

OverlapFn MaskOverlap(const std::vector<Mask>& masks,
                      const std::vector<GroundTruthInstance>& gt) {
  return [&masks, &gt](size_t d, size_t g) {
    return MaskIoU(masks[d], gt[g].mask);
  };
}

std::optional<ApResult> AveragePrecision(
    const std::vector<Detection>& detections,
    const std::vector<GroundTruthInstance>& gt, const OverlapFn& overlap,
    const ApOptions& options) {
  if (gt.empty()) return std::nullopt;

  std::map<std::string, std::vector<size_t>> gt_by_image;
  for (size_t g = 0; g < gt.size(); ++g) {
    gt_by_image[gt[g].image_id].push_back(g);
  }

  ApResult result;
  result.threshold = options.threshold;
  result.num_gt = static_cast<int>(gt.size());

  std::vector<uint8_t> matched(gt.size(), 0);
  int tp = 0;
  int fp = 0;
  for (size_t idx : RankDetections(detections)) {
    const Detection& d = detections[idx];
    double best = -1.0;
    size_t best_gt = gt.size();
    const auto it = gt_by_image.find(d.image_id);
    if (it != gt_by_image.end()) {
      for (size_t g : it->second) {
        if (matched[g]) continue;
        const double o = overlap(idx, g);
        if (o > best) {
          best = o;
          best_gt = g;
        }
      }
    }
    const bool hit = best_gt < gt.size() && best >= options.threshold;
    if (hit) {
      matched[best_gt] = 1;
      ++tp;
    } else {
      ++fp;
    }
    result.true_positive.push_back(hit);
    result.curve.push_back(
        {static_cast<double>(tp) / static_cast<double>(result.num_gt),
         static_cast<double>(tp) / static_cast<double>(tp + fp), d.score});
  }

  const size_t n = result.curve.size();
  std::vector<double> envelope(n);
  for (size_t i = n; i-- > 0;) {
    envelope[i] = i + 1 < n ? std::max(result.curve[i].precision,
                                       envelope[i + 1])
                            : result.curve[i].precision;
  }
  if (options.interpolation == ApInterpolation::kContinuous) {
    double previous_recall = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const double r = result.curve[i].recall;
      if (r > previous_recall) {
        result.ap += (r - previous_recall) * envelope[i];
        previous_recall = r;
      }
    }
  } else {
    for (int t = 0; t <= 10; ++t) {
      const double level = t / 10.0;
      double p = 0.0;
      for (size_t i = 0; i < n; ++i) {
        if (result.curve[i].recall >= level) {
          p = envelope[i];
          break;
        }
      }
      result.ap += p / 11.0;
    }
  }
  return result;
}

MeanApResult MeanAveragePrecision(const std::vector<Detection>& detections,
                                  const std::vector<GroundTruthInstance>& gt,
                                  const ApOptions& options,
                                  const std::vector<Mask>* masks) {
  if (masks != nullptr && masks->size() != detections.size()) {
    throw DimensionError("mean_ap: one mask per detection required");
  }
  std::set<int> classes;
  for (const auto& g : gt) classes.insert(g.class_id);

  MeanApResult out;
  for (int c : classes) {
    std::vector<Detection> class_dets;
    std::vector<Mask> class_masks;
    for (size_t i = 0; i < detections.size(); ++i) {
      if (detections[i].class_id != c) continue;
      class_dets.push_back(detections[i]);
      if (masks != nullptr) class_masks.push_back((*masks)[i]);
    }
    std::vector<GroundTruthInstance> class_gt;
    for (const auto& g : gt) {
      if (g.class_id == c) class_gt.push_back(g);
    }
    const OverlapFn fn = masks != nullptr ? MaskOverlap(class_masks, class_gt)
                                          : BoxOverlap(class_dets, class_gt);
    auto result = AveragePrecision(class_dets, class_gt, fn, options);
    out.per_class.emplace(c, std::move(*result));
  }
  if (!out.per_class.empty()) {
    double sum = 0.0;
    for (const auto& [c, r] : out.per_class) sum += r.ap;
    out.mean_ap = sum / static_cast<double>(out.per_class.size());
  }
  return out;
}

SegmentationConfusion::SegmentationConfusion(int num_classes,
                                             int32_t ignore_label)
    : num_classes_(num_classes),
      ignore_label_(ignore_label),
      tp_(std::max(num_classes, 0), 0),
      fp_(std::max(num_classes, 0), 0),
      fn_(std::max(num_classes, 0), 0),
      gt_pixels_(std::max(num_classes, 0), 0) {
  if (num_classes < 1) {
    throw InvalidArgument("segmentation_metrics: need at least one class");
  }
  if (ignore_label >= 0 && ignore_label < num_classes) {
    throw InvalidArgument("segmentation_metrics: ignore label collides with a "
                          "class id");
  }
}

void SegmentationConfusion::Add(const Image<int32_t>& predicted,
                                const Image<int32_t>& truth) {
  RequireSameShape(predicted, truth, "segmentation_metrics");
  for (size_t i = 0; i < truth.size(); ++i) {
    const int32_t t = truth[i];
    const int32_t p = predicted[i];
    if (t == ignore_label_) continue;
    if (t < 0 || t >= num_classes_) {
      throw InvalidArgument("segmentation_metrics: ground-truth label " +
                            std::to_string(t) + " out of range");
    }
    if (p != ignore_label_ && (p < 0 || p >= num_classes_)) {
      throw InvalidArgument("segmentation_metrics: predicted label " +
                            std::to_string(p) + " out of range");
    }
    ++total_;
    ++gt_pixels_[t];
    if (p == t) {
      ++tp_[t];
      ++correct_;
    } else {
      ++fn_[t];
      if (p != ignore_label_) ++fp_[p];
    }
  }
}

SegmentationMetrics SegmentationConfusion::Metrics() const {
  if (total_ == 0) {
    throw EstimationError("segmentation_metrics: every pixel is ignored");
  }
  SegmentationMetrics m;
  m.gt_pixels = gt_pixels_;
  m.class_iou.resize(num_classes_);
  double iou_sum = 0.0;
  double weighted_sum = 0.0;
  int present = 0;
  for (int c = 0; c < num_classes_; ++c) {
    const int64_t denom = tp_[c] + fp_[c] + fn_[c];
    if (denom == 0) continue;
    const double iou =
        static_cast<double>(tp_[c]) / static_cast<double>(denom);
    m.class_iou[c] = iou;
    iou_sum += iou;
    weighted_sum += static_cast<double>(gt_pixels_[c]) * iou;
    ++present;
  }
  m.avacc = iou_sum / present;
  m.fwavacc = weighted_sum / static_cast<double>(total_);
  m.pixacc = static_cast<double>(correct_) / static_cast<double>(total_);
  return m;
}

SegmentationMetrics ComputeSegmentationMetrics(const Image<int32_t>& predicted,
                                               const Image<int32_t>& truth,
                                               int num_classes,
                                               int32_t ignore_label) {
  SegmentationConfusion confusion(num_classes, ignore_label);
  confusion.Add(predicted, truth);
  return confusion.Metrics();
}

}  // namespace rgbdgeo
