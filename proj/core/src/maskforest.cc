#include "rgbdgeo/maskforest.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string_view>

#include "rgbdgeo/parallel.h"
#include "rgbdgeo/seed.h"

namespace rgbdgeo {
namespace {

uint64_t Combine(uint64_t a, uint64_t b) { return CombineSeed(a, b); }

uint64_t ExampleHash(const WarpedExample& ex) {
  const std::string_view features(
      reinterpret_cast<const char*>(ex.features.data()),
      ex.features.size() * sizeof(float));
  const std::string_view mask(reinterpret_cast<const char*>(ex.mask.data()),
                              ex.mask.size());
  return Combine(HashBytes(features),
                 HashBytes(mask));
}

double Entropy(double fg, double n) {
  if (n <= 0.0) return 0.0;
  const double p = fg / n;
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

struct TrainingPoint {
  uint32_t example;
  uint8_t x;
  uint8_t y;
  uint8_t label;
};

// Reads probe values during training; mirrors ProbeValue without the
// Forest indirection.
struct ProbeContext {
  const std::vector<const WarpedExample*>* examples;
  std::vector<double> padding;
  int image_channels;

  double Value(const WarpedExample& ex, int c, int x, int y) const {
    if (x < 0 || y < 0 || x >= kWarpSize || y >= kWarpSize) return padding[c];
    if (c < image_channels) return ex.at(c, x, y);
    return ((c == image_channels ? x : y) + 0.5) / kWarpSize;
  }

  double Response(const SplitQuestion& q, const TrainingPoint& p) const {
    const WarpedExample& ex = *(*examples)[p.example];
    const double a = Value(ex, q.channel, p.x + q.dx1, p.y + q.dy1);
    if (q.kind == QuestionKind::kUnary) return a;
    return a - Value(ex, q.channel, p.x + q.dx2, p.y + q.dy2);
  }
};

class TreeTrainer {
 public:
  TreeTrainer(const ProbeContext& probes, const ForestParams& params,
              uint64_t seed)
      : probes_(probes), params_(params), rng_(seed) {}

  DecisionTree Train(std::vector<TrainingPoint> points) {
    tree_.nodes.clear();
    Build(points, 0, points.size(), 0);
    return std::move(tree_);
  }

 private:
  SplitQuestion SampleQuestion() {
    const int channels = static_cast<int>(probes_.padding.size());
    std::uniform_int_distribution<int> channel(0, channels - 1);
    std::uniform_int_distribution<int> offset(-params_.max_offset,
                                              params_.max_offset);
    std::bernoulli_distribution binary(
        params_.unary_only ? 0.0 : params_.binary_fraction);
    SplitQuestion q;
    q.kind = binary(rng_) ? QuestionKind::kBinary : QuestionKind::kUnary;
    q.channel = channel(rng_);
    q.dx1 = offset(rng_);
    q.dy1 = offset(rng_);
    if (q.kind == QuestionKind::kBinary) {
      q.dx2 = offset(rng_);
      q.dy2 = offset(rng_);
    }
    return q;
  }

  int MakeLeaf(double fg, double n) {
    TreeNode leaf;
    leaf.probability = n > 0.0 ? fg / n : 0.0;
    tree_.nodes.push_back(leaf);
    return static_cast<int>(tree_.nodes.size()) - 1;
  }

  int Build(std::vector<TrainingPoint>& points, size_t begin, size_t end,
            int depth) {
    const size_t count = end - begin;
    double fg = 0.0;
    for (size_t i = begin; i < end; ++i) fg += points[i].label;
    const double n = static_cast<double>(count);
    const double p = n > 0.0 ? fg / n : 0.0;
    if (depth >= params_.max_depth ||
        count < static_cast<size_t>(params_.min_samples) ||
        std::max(p, 1.0 - p) >= params_.purity) {
      return MakeLeaf(fg, n);
    }

    const double parent_entropy = Entropy(fg, n);
    responses_.resize(count);
    SplitQuestion best;
    double best_gain = 0.0;
    bool found = false;
    for (int k = 0; k < params_.questions; ++k) {
      SplitQuestion q = SampleQuestion();
      double lo = std::numeric_limits<double>::infinity();
      double hi = -std::numeric_limits<double>::infinity();
      for (size_t i = 0; i < count; ++i) {
        const double r = probes_.Response(q, points[begin + i]);
        responses_[i] = r;
        lo = std::min(lo, r);
        hi = std::max(hi, r);
      }
      if (!(lo < hi)) continue;
      q.threshold = std::uniform_real_distribution<double>(lo, hi)(rng_);
      double left_n = 0.0;
      double left_fg = 0.0;
      for (size_t i = 0; i < count; ++i) {
        if (responses_[i] < q.threshold) {
          left_n += 1.0;
          left_fg += points[begin + i].label;
        }
      }
      const double right_n = n - left_n;
      if (left_n == 0.0 || right_n == 0.0) continue;
      const double gain = parent_entropy -
                          (left_n / n) * Entropy(left_fg, left_n) -
                          (right_n / n) * Entropy(fg - left_fg, right_n);
      if (gain > best_gain) {
        best_gain = gain;
        best = q;
        found = true;
      }
    }
    if (!found) return MakeLeaf(fg, n);

    const auto mid = std::stable_partition(
        points.begin() + static_cast<std::ptrdiff_t>(begin),
        points.begin() + static_cast<std::ptrdiff_t>(end),
        [&](const TrainingPoint& pt) {
          return probes_.Response(best, pt) < best.threshold;
        });
    const size_t split = static_cast<size_t>(mid - points.begin());

    tree_.nodes.push_back(TreeNode{});
    const int id = static_cast<int>(tree_.nodes.size()) - 1;
    tree_.nodes[id].question = best;
    const int left = Build(points, begin, split, depth + 1);
    const int right = Build(points, split, end, depth + 1);
    tree_.nodes[id].left = left;
    tree_.nodes[id].right = right;
    return id;
  }

  const ProbeContext& probes_;
  const ForestParams& params_;
  std::mt19937_64 rng_;
  DecisionTree tree_;
  std::vector<double> responses_;
};

double Bilinear(std::span<const double> grid, double gx, double gy) {
  gx = std::clamp(gx, 0.0, static_cast<double>(kWarpSize - 1));
  gy = std::clamp(gy, 0.0, static_cast<double>(kWarpSize - 1));
  const int x0 = static_cast<int>(std::floor(gx));
  const int y0 = static_cast<int>(std::floor(gy));
  const int x1 = std::min(x0 + 1, kWarpSize - 1);
  const int y1 = std::min(y0 + 1, kWarpSize - 1);
  const double fx = gx - x0;
  const double fy = gy - y0;
  const auto at = [&](int x, int y) { return grid[y * kWarpSize + x]; };
  const double top = at(x0, y0) + fx * (at(x1, y0) - at(x0, y0));
  const double bottom = at(x0, y1) + fx * (at(x1, y1) - at(x0, y1));
  return top + fy * (bottom - top);
}

}  // namespace

void FeatureImage::AddChannel(std::string name, Image<float> values) {
  if (channels.empty() && width == 0 && height == 0) {
    width = values.width();
    height = values.height();
  }
  if (values.width() != width || values.height() != height) {
    throw DimensionError("feature image: channel " + name +
                         " has mismatched dimensions");
  }
  channel_names.push_back(std::move(name));
  channels.push_back(std::move(values));
}

WarpedExample WarpWindow(const FeatureImage& image, const Box& box) {
  if (!box.Intersects(image.width, image.height)) {
    throw InvalidArgument("warp_window: box does not overlap the image");
  }
  WarpedExample ex;
  ex.channels = image.channel_count();
  ex.features.assign(static_cast<size_t>(ex.channels) * kWarpCells, 0.0f);
  const double sx = box.width() / kWarpSize;
  const double sy = box.height() / kWarpSize;
  const double max_x = image.width - 1;
  const double max_y = image.height - 1;
  for (int j = 0; j < kWarpSize; ++j) {
    const double y = std::clamp(box.y0 + (j + 0.5) * sy - 0.5, 0.0, max_y);
    const int y0 = static_cast<int>(std::floor(y));
    const int y1 = std::min(y0 + 1, image.height - 1);
    const double fy = y - y0;
    for (int i = 0; i < kWarpSize; ++i) {
      const double x = std::clamp(box.x0 + (i + 0.5) * sx - 0.5, 0.0, max_x);
      const int x0 = static_cast<int>(std::floor(x));
      const int x1 = std::min(x0 + 1, image.width - 1);
      const double fx = x - x0;
      for (int c = 0; c < ex.channels; ++c) {
        const Image<float>& ch = image.channels[c];
        const double top = ch(x0, y0) + fx * (ch(x1, y0) - ch(x0, y0));
        const double bottom = ch(x0, y1) + fx * (ch(x1, y1) - ch(x0, y1));
        ex.features[(static_cast<size_t>(c) * kWarpSize + j) * kWarpSize + i] =
            static_cast<float>(top + fy * (bottom - top));
      }
    }
  }
  return ex;
}

std::vector<uint8_t> WarpMask(const Mask& mask, const Box& box) {
  if (!box.Intersects(mask.width(), mask.height())) {
    throw InvalidArgument("warp_mask: box does not overlap the mask");
  }
  std::vector<uint8_t> out(kWarpCells, 0);
  const double sx = box.width() / kWarpSize;
  const double sy = box.height() / kWarpSize;
  for (int j = 0; j < kWarpSize; ++j) {
    const int y = std::clamp(
        static_cast<int>(std::floor(box.y0 + (j + 0.5) * sy)), 0,
        mask.height() - 1);
    for (int i = 0; i < kWarpSize; ++i) {
      const int x = std::clamp(
          static_cast<int>(std::floor(box.x0 + (i + 0.5) * sx)), 0,
          mask.width() - 1);
      out[j * kWarpSize + i] = mask(x, y) != 0 ? 1 : 0;
    }
  }
  return out;
}

std::vector<std::optional<size_t>> AssignDetections(
    const std::vector<GroundTruthInstance>& gt,
    const std::vector<Detection>& detections, double min_iou) {
  const auto order = RankDetections(detections);
  std::vector<std::optional<size_t>> out(gt.size());
  for (size_t g = 0; g < gt.size(); ++g) {
    for (size_t idx : order) {
      const Detection& d = detections[idx];
      if (d.image_id != gt[g].image_id || d.class_id != gt[g].class_id) {
        continue;
      }
      if (BoxIoU(d.box, gt[g].box) > min_iou) {
        out[g] = idx;
        break;
      }
    }
  }
  return out;
}

void Forest::Validate() const {
  const int channels = static_cast<int>(channel_names.size());
  if (channels <= kLocationChannels) {
    throw FormatError("forest: no image channels");
  }
  if (padding.size() != channel_names.size()) {
    throw FormatError("forest: padding count does not match channel count");
  }
  if (trees.size() != static_cast<size_t>(kForestTrees)) {
    throw FormatError("forest: expected " + std::to_string(kForestTrees) +
                      " trees, found " + std::to_string(trees.size()));
  }
  for (size_t t = 0; t < trees.size(); ++t) {
    const auto& nodes = trees[t].nodes;
    const std::string where = "forest: tree " + std::to_string(t);
    if (nodes.empty()) throw FormatError(where + " is empty");
    for (size_t i = 0; i < nodes.size(); ++i) {
      const TreeNode& node = nodes[i];
      if (node.IsLeaf()) {
        if (node.right >= 0) {
          throw FormatError(where + ": leaf with a right child");
        }
        if (!(node.probability >= 0.0 && node.probability <= 1.0)) {
          throw FormatError(where + ": leaf probability outside [0, 1]");
        }
        continue;
      }
      const auto in_range = [&](int child) {
        return child > static_cast<int>(i) &&
               child < static_cast<int>(nodes.size());
      };
      if (!in_range(node.left) || !in_range(node.right)) {
        throw FormatError(where + ": bad child index");
      }
      const SplitQuestion& q = node.question;
      if (q.channel < 0 || q.channel >= channels) {
        throw FormatError(where + ": question channel out of range");
      }
      for (int o : {q.dx1, q.dy1, q.dx2, q.dy2}) {
        if (std::abs(o) > kMaxQuestionOffset) {
          throw FormatError(where + ": question offset out of range");
        }
      }
      if (!std::isfinite(q.threshold)) {
        throw FormatError(where + ": non-finite threshold");
      }
    }
  }
}

Forest TrainForest(std::span<const WarpedExample> examples,
                   const std::vector<std::string>& image_channel_names,
                   const ForestParams& params) {
  if (examples.empty()) throw InvalidArgument("train_forest: no examples");
  if (params.max_offset < 0 || params.max_offset > kMaxQuestionOffset) {
    throw InvalidArgument("train_forest: max_offset outside [0, 50]");
  }
  if (params.questions < 1) {
    throw InvalidArgument("train_forest: need at least one question");
  }
  const int channels = static_cast<int>(image_channel_names.size());
  if (channels < 1) throw InvalidArgument("train_forest: no channels");

  // Canonical example order: by content hash.
  std::vector<std::pair<uint64_t, size_t>> keyed;
  keyed.reserve(examples.size());
  size_t foreground = 0;
  for (size_t e = 0; e < examples.size(); ++e) {
    const auto& ex = examples[e];
    if (ex.channels != channels ||
        ex.features.size() != static_cast<size_t>(channels) * kWarpCells) {
      throw InvalidArgument("train_forest: example " + std::to_string(e) +
                            " has the wrong channel count");
    }
    if (ex.mask.size() != static_cast<size_t>(kWarpCells)) {
      throw InvalidArgument("train_forest: example " + std::to_string(e) +
                            " is unlabeled");
    }
    foreground += static_cast<size_t>(
        std::count_if(ex.mask.begin(), ex.mask.end(),
                      [](uint8_t m) { return m != 0; }));
    keyed.emplace_back(ExampleHash(ex), e);
  }
  const size_t total_points = examples.size() * kWarpCells;
  if (foreground == 0 || foreground == total_points) {
    throw InvalidArgument("train_forest: training set has a single class");
  }
  std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
    return a.first < b.first;
  });
  std::vector<const WarpedExample*> ordered;
  ordered.reserve(keyed.size());
  for (const auto& [hash, e] : keyed) ordered.push_back(&examples[e]);

  Forest forest;
  forest.channel_names = image_channel_names;
  forest.channel_names.push_back("location_x");
  forest.channel_names.push_back("location_y");
  forest.padding.assign(channels + kLocationChannels, 0.5);
  for (int c = 0; c < channels; ++c) {
    double sum = 0.0;
    for (const WarpedExample* ex : ordered) {
      for (int i = 0; i < kWarpCells; ++i) {
        sum += ex->features[static_cast<size_t>(c) * kWarpCells + i];
      }
    }
    forest.padding[c] = sum / static_cast<double>(total_points);
  }

  ProbeContext probes{&ordered, forest.padding, channels};
  const uint64_t threshold =
      params.subsample >= 1.0
          ? std::numeric_limits<uint64_t>::max()
          : static_cast<uint64_t>(std::max(0.0, params.subsample) * 0x1p64);

  forest.trees.resize(kForestTrees);
  ParallelFor(kForestTrees, params.jobs, [&](size_t t) {
    const uint64_t tree_seed = Combine(params.seed, t);
    std::vector<TrainingPoint> points;
    for (size_t e = 0; e < ordered.size(); ++e) {
      const uint64_t ex_key = Combine(tree_seed, keyed[e].first);
      for (int cell = 0; cell < kWarpCells; ++cell) {
        if (Combine(ex_key, static_cast<uint64_t>(cell)) > threshold) continue;
        points.push_back({static_cast<uint32_t>(e),
                          static_cast<uint8_t>(cell % kWarpSize),
                          static_cast<uint8_t>(cell / kWarpSize),
                          ordered[e]->mask[cell]});
      }
    }
    if (points.empty()) {
      for (size_t e = 0; e < ordered.size(); ++e) {
        for (int cell = 0; cell < kWarpCells; ++cell) {
          points.push_back({static_cast<uint32_t>(e),
                            static_cast<uint8_t>(cell % kWarpSize),
                            static_cast<uint8_t>(cell / kWarpSize),
                            ordered[e]->mask[cell]});
        }
      }
    }
    TreeTrainer trainer(probes, params, tree_seed);
    forest.trees[t] = trainer.Train(std::move(points));
  });
  return forest;
}

double ProbeValue(const Forest& forest, const WarpedExample& example, int c,
                  int x, int y) {
  if (x < 0 || y < 0 || x >= kWarpSize || y >= kWarpSize) {
    return forest.padding[c];
  }
  const int image_channels = forest.image_channels();
  if (c < image_channels) return example.at(c, x, y);
  return ((c == image_channels ? x : y) + 0.5) / kWarpSize;
}

double QuestionResponse(const Forest& forest, const SplitQuestion& q,
                        const WarpedExample& example, int x, int y) {
  const double a = ProbeValue(forest, example, q.channel, x + q.dx1, y + q.dy1);
  if (q.kind == QuestionKind::kUnary) return a;
  return a - ProbeValue(forest, example, q.channel, x + q.dx2, y + q.dy2);
}

std::vector<double> PredictConfidence(const Forest& forest,
                                      const WarpedExample& example) {
  if (!forest.trained()) throw InvalidArgument("predict: untrained forest");
  if (example.channels != forest.image_channels()) {
    throw DimensionError("predict: example has " +
                         std::to_string(example.channels) +
                         " channels, forest expects " +
                         std::to_string(forest.image_channels()));
  }
  std::vector<double> confidence(kWarpCells, 0.0);
  for (int y = 0; y < kWarpSize; ++y) {
    for (int x = 0; x < kWarpSize; ++x) {
      double sum = 0.0;
      for (const DecisionTree& tree : forest.trees) {
        int node = 0;
        while (!tree.nodes[node].IsLeaf()) {
          const TreeNode& n = tree.nodes[node];
          node = QuestionResponse(forest, n.question, example, x, y) <
                         n.question.threshold
                     ? n.left
                     : n.right;
        }
        sum += tree.nodes[node].probability;
      }
      confidence[y * kWarpSize + x] =
          sum / static_cast<double>(forest.trees.size());
    }
  }
  return confidence;
}

Image<double> UnwarpConfidence(std::span<const double> grid, const Box& box,
                               int width, int height, Mask* inside) {
  if (grid.size() != static_cast<size_t>(kWarpCells)) {
    throw DimensionError("unwarp: grid must be 50x50");
  }
  Image<double> out(width, height, 0.0);
  if (inside != nullptr) *inside = Mask(width, height, 0);
  if (!box.Intersects(width, height)) return out;
  const int px0 = std::max(0, static_cast<int>(std::ceil(box.x0 - 0.5)));
  const int py0 = std::max(0, static_cast<int>(std::ceil(box.y0 - 0.5)));
  const int px1 = std::min(width, static_cast<int>(std::ceil(box.x1 - 0.5)));
  const int py1 = std::min(height, static_cast<int>(std::ceil(box.y1 - 0.5)));
  const double sx = kWarpSize / box.width();
  const double sy = kWarpSize / box.height();
  for (int y = py0; y < py1; ++y) {
    const double gy = (y + 0.5 - box.y0) * sy - 0.5;
    for (int x = px0; x < px1; ++x) {
      const double gx = (x + 0.5 - box.x0) * sx - 0.5;
      out(x, y) = Bilinear(grid, gx, gy);
      if (inside != nullptr) (*inside)(x, y) = 1;
    }
  }
  return out;
}

std::vector<double> SuperpixelConfidence(const Forest& forest,
                                         const Detection& detection,
                                         const FeatureImage& features,
                                         const SuperpixelMap& superpixels) {
  if (features.width != superpixels.width() ||
      features.height != superpixels.height()) {
    throw DimensionError("superpixel_confidence: feature image and superpixel "
                         "map differ in size");
  }
  const WarpedExample ex = WarpWindow(features, detection.box);
  const auto grid = PredictConfidence(forest, ex);
  Mask inside;
  const Image<double> pixels = UnwarpConfidence(
      grid, detection.box, features.width, features.height, &inside);
  std::vector<double> sum(superpixels.count, 0.0);
  std::vector<int64_t> count(superpixels.count, 0);
  for (size_t i = 0; i < pixels.size(); ++i) {
    if (!inside[i]) continue;
    const int32_t label = superpixels.labels[i];
    sum[label] += pixels[i];
    ++count[label];
  }
  for (int s = 0; s < superpixels.count; ++s) {
    sum[s] = count[s] > 0 ? sum[s] / static_cast<double>(count[s]) : 0.0;
  }
  return sum;
}

Region ThresholdSuperpixels(std::span<const double> confidence,
                            double threshold) {
  Region region;
  for (size_t s = 0; s < confidence.size(); ++s) {
    if (confidence[s] >= threshold) region.push_back(static_cast<int32_t>(s));
  }
  return region;
}

Mask PredictMask(const Forest& forest, const Detection& detection,
                 const FeatureImage& features,
                 const SuperpixelMap& superpixels, double threshold) {
  const auto confidence =
      SuperpixelConfidence(forest, detection, features, superpixels);
  return RegionMask(ThresholdSuperpixels(confidence, threshold), superpixels);
}

ThresholdSelection SelectThreshold(const Forest& forest,
                                   std::span<const ValidationImage> images,
                                   double step, double overlap) {
  if (!forest.trained()) throw InvalidArgument("select_threshold: untrained");
  if (!(step > 0.0 && step <= 1.0)) {
    throw InvalidArgument("select_threshold: step must be in (0, 1]");
  }
  size_t total_detections = 0;
  size_t total_gt = 0;
  for (const auto& img : images) {
    total_detections += img.detections.size();
    total_gt += img.gt.size();
  }
  if (images.empty() || total_gt == 0) {
    throw InvalidArgument("select_threshold: empty validation set");
  }

  // Flatten detections and ground truth across images, with per-superpixel
  // confidences and overlap tables computed once.
  std::vector<Detection> detections;
  std::vector<std::vector<double>> confidences;
  std::vector<size_t> det_image;
  std::vector<GroundTruthInstance> gt;
  std::vector<InstanceOverlap> gt_overlap;
  detections.reserve(total_detections);
  for (size_t i = 0; i < images.size(); ++i) {
    const auto& img = images[i];
    for (const auto& d : img.detections) {
      detections.push_back(d);
      confidences.push_back(
          SuperpixelConfidence(forest, d, *img.features, *img.superpixels));
      det_image.push_back(i);
    }
    for (const auto& g : img.gt) {
      gt.push_back(g);
      gt_overlap.emplace_back(g.mask, *img.superpixels);
    }
  }

  const int steps = static_cast<int>(std::floor(1.0 / step + 1e-9));
  ThresholdSelection selection;
  selection.ap = -1.0;
  for (int k = 0; k <= steps; ++k) {
    const double t = k * step;
    std::vector<Region> regions(detections.size());
    for (size_t d = 0; d < detections.size(); ++d) {
      regions[d] = ThresholdSuperpixels(confidences[d], t);
    }
    std::map<int, std::vector<size_t>> dets_by_class;
    std::map<int, std::vector<size_t>> gt_by_class;
    for (size_t d = 0; d < detections.size(); ++d) {
      dets_by_class[detections[d].class_id].push_back(d);
    }
    for (size_t g = 0; g < gt.size(); ++g) {
      gt_by_class[gt[g].class_id].push_back(g);
    }
    double ap_sum = 0.0;
    for (const auto& [c, gt_idx] : gt_by_class) {
      std::vector<Detection> class_dets;
      std::vector<size_t> det_idx;
      if (const auto it = dets_by_class.find(c); it != dets_by_class.end()) {
        det_idx = it->second;
      }
      for (size_t d : det_idx) class_dets.push_back(detections[d]);
      std::vector<GroundTruthInstance> class_gt;
      for (size_t g : gt_idx) class_gt.push_back(gt[g]);
      const OverlapFn fn = [&](size_t d, size_t g) {
        return gt_overlap[gt_idx[g]].IoU(regions[det_idx[d]]);
      };
      ApOptions options;
      options.threshold = overlap;
      ap_sum += AveragePrecision(class_dets, class_gt, fn, options)->ap;
    }
    const double mean_ap = ap_sum / static_cast<double>(gt_by_class.size());
    selection.sweep.emplace_back(t, mean_ap);
    if (mean_ap > selection.ap) {
      selection.ap = mean_ap;
      selection.threshold = t;
    }
  }
  return selection;
}

std::vector<Detection> CapDetectionsPerClass(
    const std::vector<Detection>& detections, int default_cap,
    const std::map<int, int>& overrides) {
  std::map<int, int> kept;
  std::vector<Detection> out;
  for (size_t idx : RankDetections(detections)) {
    const Detection& d = detections[idx];
    const auto it = overrides.find(d.class_id);
    const int cap = it != overrides.end() ? it->second : default_cap;
    if (kept[d.class_id] < cap) {
      ++kept[d.class_id];
      out.push_back(d);
    }
  }
  return out;
}

}  // namespace rgbdgeo
