#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rgbdgeo/box.h"
#include "rgbdgeo/eval.h"
#include "rgbdgeo/image.h"
#include "rgbdgeo/regionfeat.h"

namespace rgbdgeo {

inline constexpr int kWarpSize = 50;
inline constexpr int kWarpCells = kWarpSize * kWarpSize;
inline constexpr int kForestTrees = 10;
inline constexpr int kMaxQuestionOffset = 50;
// Two normalized grid-coordinate channels appended after the image channels.
inline constexpr int kLocationChannels = 2;

// Planar multi-channel image of per-pixel features.
struct FeatureImage {
  int width = 0;
  int height = 0;
  std::vector<std::string> channel_names;
  std::vector<Image<float>> channels;

  int channel_count() const { return static_cast<int>(channels.size()); }
  void AddChannel(std::string name, Image<float> values);
};

// Features resampled onto the 50x50 window grid, channel-major.
struct WarpedExample {
  int channels = 0;
  std::vector<float> features;  // [c][y][x]
  std::vector<uint8_t> mask;    // 50x50 {0,1}; empty when unlabeled

  float at(int c, int x, int y) const {
    return features[(static_cast<size_t>(c) * kWarpSize + y) * kWarpSize + x];
  }
};

// Bilinear resampling of the box interior. Grid cell (i, j) samples the
// point x0 + (i + 0.5) * w / 50 - 0.5 in pixel-center coordinates, clamped
// to the image. Throws InvalidArgument when the box misses the image.
WarpedExample WarpWindow(const FeatureImage& image, const Box& box);

// Nearest-neighbour warp of a binary mask onto the grid, binarized at 0.5.
std::vector<uint8_t> WarpMask(const Mask& mask, const Box& box);

// For each ground-truth instance, the index of the highest-ranked detection
// of the same image and class whose box IoU is strictly above `min_iou`.
std::vector<std::optional<size_t>> AssignDetections(
    const std::vector<GroundTruthInstance>& gt,
    const std::vector<Detection>& detections, double min_iou = 0.7);

enum class QuestionKind : uint8_t { kUnary = 0, kBinary = 1 };

// Unary: value(c, p + o1) < threshold.
// Binary: value(c, p + o1) - value(c, p + o2) < threshold.
// Samples that answer yes go to the left child.
struct SplitQuestion {
  QuestionKind kind = QuestionKind::kUnary;
  int channel = 0;
  int dx1 = 0;
  int dy1 = 0;
  int dx2 = 0;
  int dy2 = 0;
  double threshold = 0.0;

  bool operator==(const SplitQuestion&) const = default;
};

struct TreeNode {
  int left = -1;
  int right = -1;
  SplitQuestion question;
  double probability = 0.0;  // foreground probability at leaves

  bool IsLeaf() const { return left < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  bool operator==(const DecisionTree&) const = default;
};

struct Forest {
  // Image channels followed by the two location channels.
  std::vector<std::string> channel_names;
  // Value read by probes that fall outside the grid, per channel.
  std::vector<double> padding;
  std::vector<DecisionTree> trees;

  int image_channels() const {
    return static_cast<int>(channel_names.size()) - kLocationChannels;
  }
  bool trained() const { return !trees.empty(); }
  // Throws FormatError describing the first structural problem found.
  void Validate() const;

  bool operator==(const Forest&) const = default;
};

// Every forest has exactly kForestTrees trees.
struct ForestParams {
  int questions = 1000;        // candidates sampled per node
  double binary_fraction = 0.5;
  bool unary_only = false;      // ablation: no binary questions
  int max_depth = 20;
  int min_samples = 20;         // nodes smaller than this become leaves
  double purity = 0.999;
  double subsample = 0.25;      // fraction of all points used per tree
  int max_offset = 25;          // offsets drawn from [-max_offset, max_offset]
  uint64_t seed = 0;
  int jobs = 1;
};

// Trains on every labeled grid cell of every example. Each tree sees a
// hash-selected subsample of points that does not depend on example order.
// Throws InvalidArgument for an empty set, unlabeled examples, channel count
// mismatches or a single-class training set.
Forest TrainForest(std::span<const WarpedExample> examples,
                   const std::vector<std::string>& image_channel_names,
                   const ForestParams& params);

// Value a question reads at grid cell (x, y), with location channels and
// out-of-grid padding applied.
double ProbeValue(const Forest& forest, const WarpedExample& example, int c,
                  int x, int y);
double QuestionResponse(const Forest& forest, const SplitQuestion& q,
                        const WarpedExample& example, int x, int y);

// Mean leaf probability over trees, per grid cell (row-major 50x50).
std::vector<double> PredictConfidence(const Forest& forest,
                                      const WarpedExample& example);

// Bilinear unwarp of a 50x50 map onto the window pixels (pixels whose center
// lies inside the box, clipped to the image). Pixels outside get 0 and are
// cleared in `inside`.
Image<double> UnwarpConfidence(std::span<const double> grid, const Box& box,
                               int width, int height, Mask* inside = nullptr);

// Mean unwarped confidence per superpixel over its pixels inside the window;
// superpixels that miss the window get 0.
std::vector<double> SuperpixelConfidence(const Forest& forest,
                                         const Detection& detection,
                                         const FeatureImage& features,
                                         const SuperpixelMap& superpixels);

// Superpixels whose confidence is >= threshold.
Region ThresholdSuperpixels(std::span<const double> confidence,
                            double threshold);

// Full-image instance mask of the selected superpixels.
Mask PredictMask(const Forest& forest, const Detection& detection,
                 const FeatureImage& features,
                 const SuperpixelMap& superpixels, double threshold);

struct ValidationImage {
  const FeatureImage* features = nullptr;
  const SuperpixelMap* superpixels = nullptr;
  std::vector<Detection> detections;
  std::vector<GroundTruthInstance> gt;
};

struct ThresholdSelection {
  double threshold = 0.0;
  double ap = 0.0;  // mean region AP at the chosen threshold
  std::vector<std::pair<double, double>> sweep;  // (threshold, mean AP^r)
};

// Grid {0, step, 2 step, ..., 1}; maximizes mean region AP at overlap
// `overlap`; ties go to the lowest threshold.
ThresholdSelection SelectThreshold(const Forest& forest,
                                   std::span<const ValidationImage> images,
                                   double step = 0.05, double overlap = 0.5);

// Keeps the top `default_cap` detections of each class by ranking, with
// per-class overrides (e.g. a larger cap for a frequent class).
std::vector<Detection> CapDetectionsPerClass(
    const std::vector<Detection>& detections, int default_cap = 5000,
    const std::map<int, int>& overrides = {});

// Versioned text serialization. Doubles are written in shortest round-trip
// form, so Write/Read is bit-exact.
void WriteForest(std::ostream& out, const Forest& forest);
Forest ReadForest(std::istream& in);
void SaveForest(const std::string& path, const Forest& forest);
Forest LoadForest(const std::string& path);

}  // namespace rgbdgeo
