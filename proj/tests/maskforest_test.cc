#include "rgbdgeo/maskforest.h"

#include <algorithm>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

namespace rgbdgeo {
namespace {

GroundTruthInstance RectInstance(const std::string& image, int w, int h,
                                 const Box& box, int cls = 1) {
  Mask m(w, h, 0);
  for (int y = static_cast<int>(box.y0); y < box.y1; ++y) {
    for (int x = static_cast<int>(box.x0); x < box.x1; ++x) m(x, y) = 1;
  }
  return GroundTruthInstance::FromMask(image, cls, 1, std::move(m));
}

// Value 255 inside a random rectangle (the label), 0 outside.
std::vector<WarpedExample> Separable(uint64_t seed, int n) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> corner(0, 30);
  std::vector<WarpedExample> out;
  for (int e = 0; e < n; ++e) {
    const int x0 = corner(rng), y0 = corner(rng);
    const int x1 = x0 + 10 + corner(rng) / 2, y1 = y0 + 10 + corner(rng) / 2;
    WarpedExample ex;
    ex.channels = 1;
    ex.features.assign(kWarpCells, 0.0f);
    ex.mask.assign(kWarpCells, 0);
    for (int y = y0; y < std::min(y1, kWarpSize); ++y) {
      for (int x = x0; x < std::min(x1, kWarpSize); ++x) {
        ex.features[y * kWarpSize + x] = 255.0f;
        ex.mask[y * kWarpSize + x] = 1;
      }
    }
    out.push_back(std::move(ex));
  }
  return out;
}

ForestParams Fast() {
  ForestParams p;
  p.questions = 40;
  p.max_offset = 5;
  p.seed = 7;
  return p;
}

const Forest& Trained() {
  static const Forest forest =
      TrainForest(Separable(1, 6), {"value"}, Fast());
  return forest;
}

Forest AllOnes() {
  Forest f = Trained();
  for (auto& t : f.trees) {
    for (auto& n : t.nodes) n.probability = n.IsLeaf() ? 1.0 : 0.0;
  }
  return f;
}

FeatureImage ConstantImage(int w, int h, float v) {
  FeatureImage im;
  im.width = w;
  im.height = h;
  im.AddChannel("value", Image<float>(w, h, v));
  return im;
}

// 4x4 grid of 10x10 superpixels on a 40x40 image.
SuperpixelMap GridMap() {
  Image<int32_t> labels(40, 40);
  for (int y = 0; y < 40; ++y) {
    for (int x = 0; x < 40; ++x) labels(x, y) = (y / 10) * 4 + x / 10;
  }
  return SuperpixelMap::FromLabels(std::move(labels));
}

TEST(AssignDetections, Examples) {
  const std::vector<GroundTruthInstance> gt = {
      RectInstance("i", 64, 64, {0, 0, 20, 20})};
  const Detection exact{"i", 1, 0.5, {0, 0, 20, 20}};
  EXPECT_EQ(AssignDetections(gt, {exact})[0], std::optional<size_t>(0));
  // IoU 0.69: 276 / 400.
  const Detection low{"i", 1, 0.9, {0, 0, 20, 13.8}};
  EXPECT_NEAR(BoxIoU(low.box, gt[0].box), 0.69, 1e-12);
  EXPECT_FALSE(AssignDetections(gt, {low})[0].has_value());
  // IoU exactly 0.7 is not enough.
  const Detection edge{"i", 1, 0.9, {0, 0, 14, 20}};
  EXPECT_EQ(BoxIoU(edge.box, gt[0].box), 0.7);
  EXPECT_FALSE(AssignDetections(gt, {edge})[0].has_value());
  // Two detections at IoU 0.8: the higher score wins.
  const Detection weak{"i", 1, 0.4, {0, 0, 20, 16}};
  const Detection strong{"i", 1, 0.9, {0, 4, 20, 20}};
  EXPECT_EQ(AssignDetections(gt, {weak, strong})[0], std::optional<size_t>(1));
  // Other classes and images never pair.
  const Detection other{"j", 1, 0.9, {0, 0, 20, 20}};
  const Detection cls{"i", 2, 0.9, {0, 0, 20, 20}};
  EXPECT_FALSE(AssignDetections(gt, {other, cls})[0].has_value());
}

TEST(WarpWindow, IdentityOnMatchingBox) {
  FeatureImage im;
  im.width = im.height = kWarpSize;
  Image<float> ramp(kWarpSize, kWarpSize);
  for (int y = 0; y < kWarpSize; ++y) {
    for (int x = 0; x < kWarpSize; ++x) ramp(x, y) = 3.0f * x - 0.5f * y;
  }
  im.AddChannel("ramp", ramp);
  const WarpedExample ex = WarpWindow(im, {0, 0, kWarpSize, kWarpSize});
  ASSERT_EQ(ex.channels, 1);
  for (int y = 0; y < kWarpSize; ++y) {
    for (int x = 0; x < kWarpSize; ++x) EXPECT_EQ(ex.at(0, x, y), ramp(x, y));
  }
}

TEST(WarpWindow, ConstantChannel) {
  const WarpedExample ex = WarpWindow(ConstantImage(80, 60, 4.25f), {3, 7, 71, 40});
  for (float v : ex.features) EXPECT_EQ(v, 4.25f);
  EXPECT_THROW(WarpWindow(ConstantImage(80, 60, 1.0f), {100, 100, 120, 120}),
               InvalidArgument);
}

TEST(WarpMask, HalfForeground) {
  Mask m(100, 100, 0);
  for (int y = 0; y < 100; ++y) {
    for (int x = 50; x < 100; ++x) m(x, y) = 255;
  }
  const auto warped = WarpMask(m, {0, 0, 100, 100});
  EXPECT_EQ(std::count(warped.begin(), warped.end(), 1), 1250);
}

TEST(TrainForest, Errors) {
  EXPECT_THROW(TrainForest({}, {"value"}, Fast()), InvalidArgument);
  auto single = Separable(2, 2);
  for (auto& ex : single) std::fill(ex.mask.begin(), ex.mask.end(), 0);
  EXPECT_THROW(TrainForest(single, {"value"}, Fast()), InvalidArgument);
  auto unlabeled = Separable(2, 2);
  unlabeled[1].mask.clear();
  EXPECT_THROW(TrainForest(unlabeled, {"value"}, Fast()), InvalidArgument);
  EXPECT_THROW(TrainForest(Separable(2, 2), {"a", "b"}, Fast()), InvalidArgument);
}

TEST(TrainForest, Structure) {
  const Forest& f = Trained();
  EXPECT_EQ(f.trees.size(), static_cast<size_t>(kForestTrees));
  EXPECT_EQ(f.image_channels(), 1);
  EXPECT_EQ(f.channel_names.size(), 1u + kLocationChannels);
  EXPECT_NO_THROW(f.Validate());
  for (const auto& t : f.trees) {
    for (const auto& n : t.nodes) {
      EXPECT_GE(n.probability, 0.0);
      EXPECT_LE(n.probability, 1.0);
      if (!n.IsLeaf()) EXPECT_GE(n.right, 0);
    }
  }
}

TEST(TrainForest, LearnsSeparableData) {
  const auto train = Separable(1, 6);
  const auto held_out = Separable(99, 4);
  for (const auto* set : {&train, &held_out}) {
    for (const auto& ex : *set) {
      const auto conf = PredictConfidence(Trained(), ex);
      ASSERT_EQ(conf.size(), static_cast<size_t>(kWarpCells));
      for (int i = 0; i < kWarpCells; ++i) {
        EXPECT_EQ(conf[i] >= 0.5, ex.mask[i] != 0);
      }
    }
  }
}

TEST(TrainForest, Deterministic) {
  const auto data = Separable(3, 4);
  ForestParams p = Fast();
  const Forest a = TrainForest(data, {"value"}, p);
  p.jobs = 3;
  EXPECT_EQ(TrainForest(data, {"value"}, p), a);
  p.seed = 8;
  EXPECT_NE(TrainForest(data, {"value"}, p), a);
}

TEST(TrainForest, ExampleOrderDoesNotMatter) {
  auto data = Separable(4, 5);
  const Forest a = TrainForest(data, {"value"}, Fast());
  std::reverse(data.begin(), data.end());
  std::swap(data[0], data[2]);
  EXPECT_EQ(TrainForest(data, {"value"}, Fast()), a);
}

TEST(Predict, UntrainedForestThrows) {
  EXPECT_THROW(PredictConfidence(Forest{}, Separable(1, 1)[0]), InvalidArgument);
  const Detection det{"i", 1, 1.0, {0, 0, 10, 10}};
  EXPECT_THROW(PredictMask(Forest{}, det, ConstantImage(40, 40, 0.0f), GridMap(), 0.5),
               InvalidArgument);
}

TEST(Predict, OutOfGridProbesReadPadding) {
  const Forest& f = Trained();
  const WarpedExample ex = Separable(5, 1)[0];
  EXPECT_EQ(ProbeValue(f, ex, 0, -1, 0), f.padding[0]);
  EXPECT_EQ(ProbeValue(f, ex, 0, 0, kWarpSize), f.padding[0]);
  EXPECT_EQ(ProbeValue(f, ex, 0, 3, 4), ex.at(0, 3, 4));
}

TEST(Predict, AllOnesForestSelectsWindowSuperpixels) {
  const Detection det{"i", 1, 1.0, {12, 5, 25, 18}};
  const Mask mask = PredictMask(AllOnes(), det, ConstantImage(40, 40, 0.0f),
                                GridMap(), 0.5);
  const SuperpixelMap sp = GridMap();
  for (int y = 0; y < 40; ++y) {
    for (int x = 0; x < 40; ++x) {
      const int cx = sp.labels(x, y) % 4, cy = sp.labels(x, y) / 4;
      const bool expected = cx >= 1 && cx <= 2 && cy <= 1;
      EXPECT_EQ(mask(x, y) != 0, expected) << x << "," << y;
    }
  }
  const Mask none = PredictMask(AllOnes(), det, ConstantImage(40, 40, 0.0f),
                                GridMap(), 1.1);
  EXPECT_EQ(std::count(none.pixels().begin(), none.pixels().end(), 0), 1600);
}

TEST(Predict, ThresholdingIsMonotone) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> conf(50);
  for (auto& c : conf) c = u(rng);
  Region previous = ThresholdSuperpixels(conf, 0.0);
  EXPECT_EQ(previous.size(), conf.size());
  for (double t = 0.05; t <= 1.0; t += 0.05) {
    const Region r = ThresholdSuperpixels(conf, t);
    EXPECT_TRUE(std::includes(previous.begin(), previous.end(), r.begin(), r.end()));
    previous = r;
  }
}

TEST(Unwarp, ConstantGrid) {
  const std::vector<double> grid(kWarpCells, 0.25);
  Mask inside;
  const Image<double> img = UnwarpConfidence(grid, {2, 3, 9, 7}, 12, 10, &inside);
  for (int y = 0; y < 10; ++y) {
    for (int x = 0; x < 12; ++x) {
      const bool in = x >= 2 && x < 9 && y >= 3 && y < 7;
      EXPECT_EQ(inside(x, y) != 0, in);
      EXPECT_EQ(img(x, y), in ? 0.25 : 0.0);
    }
  }
  EXPECT_THROW(UnwarpConfidence(std::vector<double>(10), {0, 0, 5, 5}, 8, 8),
               DimensionError);
}

TEST(SelectThreshold, PerfectMapPicksLowestPositive) {
  const Forest forest = AllOnes();
  const FeatureImage features = ConstantImage(40, 40, 0.0f);
  const SuperpixelMap sp = GridMap();
  ValidationImage v{&features, &sp, {{"i", 1, 1.0, {10, 10, 30, 30}}},
                    {RectInstance("i", 40, 40, {10, 10, 30, 30})}};
  const std::vector<ValidationImage> set = {v};
  const ThresholdSelection s = SelectThreshold(forest, set);
  EXPECT_EQ(s.threshold, 0.05);
  EXPECT_EQ(s.ap, 1.0);
  ASSERT_EQ(s.sweep.size(), 21u);
  for (const auto& [t, ap] : s.sweep) EXPECT_LE(ap, s.ap);
  EXPECT_EQ(s.sweep.front().second, 0.0);
  EXPECT_THROW(SelectThreshold(forest, std::vector<ValidationImage>{}),
               InvalidArgument);
}

TEST(SelectThreshold, MatchesReevaluation) {
  const Forest& forest = Trained();
  FeatureImage features = ConstantImage(40, 40, 0.0f);
  for (int y = 8; y < 24; ++y) {
    for (int x = 6; x < 30; ++x) features.channels[0](x, y) = 255.0f;
  }
  const SuperpixelMap sp = GridMap();
  const std::vector<Detection> dets = {{"i", 1, 0.9, {4, 6, 32, 26}},
                                       {"i", 1, 0.3, {0, 0, 20, 20}}};
  const std::vector<GroundTruthInstance> gt = {
      RectInstance("i", 40, 40, {10, 10, 30, 20})};
  const std::vector<ValidationImage> set = {{&features, &sp, dets, gt}};
  const ThresholdSelection s = SelectThreshold(forest, set, 0.1);
  for (const auto& [t, ap] : s.sweep) {
    std::vector<Mask> masks;
    for (const auto& d : dets) masks.push_back(PredictMask(forest, d, features, sp, t));
    ApOptions o;
    EXPECT_EQ(MeanAveragePrecision(dets, gt, o, &masks).mean_ap, ap) << t;
  }
}

TEST(CapDetections, PerClass) {
  std::vector<Detection> dets;
  for (int i = 0; i < 6; ++i) {
    dets.push_back({"i", 1 + i % 2, 0.1 * i, {0, 0, 1, 1}});
  }
  const auto capped = CapDetectionsPerClass(dets, 2, {{2, 3}});
  int c1 = 0, c2 = 0;
  for (const auto& d : capped) (d.class_id == 1 ? c1 : c2)++;
  EXPECT_EQ(c1, 2);
  EXPECT_EQ(c2, 3);
  for (const auto& d : capped) {
    if (d.class_id == 1) EXPECT_GE(d.score, 0.2 - 1e-12);
  }
}

TEST(ForestIo, RoundTrip) {
  const Forest& f = Trained();
  std::stringstream s;
  WriteForest(s, f);
  EXPECT_EQ(ReadForest(s), f);
  std::istringstream garbage("not a forest\n");
  EXPECT_THROW(ReadForest(garbage), FormatError);
  Forest short_forest = f;
  short_forest.trees.pop_back();
  EXPECT_THROW(short_forest.Validate(), FormatError);
}

}  // namespace
}  // namespace rgbdgeo
