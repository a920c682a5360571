#include <random>

#include <benchmark/benchmark.h>

#include "rgbdgeo/eval.h"

namespace {

using namespace rgbdgeo;

std::vector<Detection> RandomDetections(int n, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Detection> out;
  for (int i = 0; i < n; ++i) {
    const double x = 600 * u(rng), y = 440 * u(rng);
    out.push_back({"img" + std::to_string(i % 20), 1 + i % 3, u(rng),
                   {x, y, x + 20 + 60 * u(rng), y + 20 + 60 * u(rng)}});
  }
  return out;
}

std::vector<GroundTruthInstance> RandomGt(int n, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pos(0, 560);
  std::vector<GroundTruthInstance> out;
  for (int i = 0; i < n; ++i) {
    Mask m(640, 480, 0);
    const int x0 = pos(rng), y0 = pos(rng) * 400 / 560;
    for (int y = y0; y < y0 + 60; ++y) {
      for (int x = x0; x < x0 + 70; ++x) m(x, y) = 1;
    }
    out.push_back(GroundTruthInstance::FromMask("img" + std::to_string(i % 20),
                                                1 + i % 3, i + 1, std::move(m)));
  }
  return out;
}

void BM_Nms(benchmark::State& state) {
  const auto dets = RandomDetections(static_cast<int>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(Nms(dets, 0.3));
  state.SetItemsProcessed(state.iterations() * dets.size());
}
BENCHMARK(BM_Nms)->Arg(1000)->Arg(10000);

void BM_MeanAveragePrecision(benchmark::State& state) {
  const auto dets = RandomDetections(static_cast<int>(state.range(0)), 2);
  const auto gt = RandomGt(120, 3);
  for (auto _ : state) benchmark::DoNotOptimize(MeanAveragePrecision(dets, gt));
  state.SetItemsProcessed(state.iterations() * dets.size());
}
BENCHMARK(BM_MeanAveragePrecision)->Arg(1000)->Arg(10000);

void BM_Coverage(benchmark::State& state) {
  const int regions = static_cast<int>(state.range(0));
  Image<int32_t> labels(640, 480);
  for (int y = 0; y < 480; ++y) {
    for (int x = 0; x < 640; ++x) labels(x, y) = (y / 16) * 40 + x / 16;
  }
  RankedRegions ranked{SuperpixelMap::FromLabels(std::move(labels)), {}};
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int32_t> id(0, ranked.superpixels.count - 1);
  for (int r = 0; r < regions; ++r) {
    Region region;
    for (int i = 0; i < 12; ++i) region.push_back(id(rng));
    ranked.ranked.push_back(region);
  }
  std::map<std::string, RankedRegions> images;
  for (int i = 0; i < 4; ++i) images["img" + std::to_string(i)] = ranked;
  auto gt = RandomGt(16, 5);
  for (size_t i = 0; i < gt.size(); ++i) gt[i].image_id = "img" + std::to_string(i % 4);
  const std::vector<int> ks = {1, 10, 100, 1000};
  for (auto _ : state) {
    benchmark::DoNotOptimize(ComputeCoverage(gt, images, ks));
  }
}
BENCHMARK(BM_Coverage)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
