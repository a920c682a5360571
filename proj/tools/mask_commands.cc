#include <map>
#include <memory>
#include <sstream>

#include "common.h"
#include "rgbdgeo/geocentric.h"
#include "rgbdgeo/maskforest.h"
#include "rgbdgeo/parallel.h"

namespace rgbdgeo::cli {
namespace {

struct DataFlags {
  std::string manifest;
  std::string split;
  std::string calibration;
  int jobs = 1;
  GeometryFlags geometry;

  void Add(CLI::App* sub, const std::string& default_split) {
    split = default_split;
    sub->add_option("--manifest", manifest, "Data set manifest")->required();
    sub->add_option("--split", split, "Manifest split")->capture_default_str();
    sub->add_option("--calibration", calibration, "HHA calibration file")
        ->required();
    sub->add_option("--jobs", jobs, "Images processed in parallel")
        ->check(CLI::PositiveNumber);
    geometry.Add(sub);
  }
};

struct CapFlags {
  int cap = 5000;
  std::vector<std::string> class_caps;

  void Add(CLI::App* sub) {
    sub->add_option("--cap", cap, "Detections kept per class")
        ->check(CLI::PositiveNumber);
    sub->add_option("--cap-class", class_caps,
                    "Per-class cap override, CLASS=N (repeatable)");
  }

  std::vector<Detection> Apply(const std::vector<Detection>& dets) const {
    std::map<int, int> overrides;
    for (const auto& item : class_caps) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw UsageError("--cap-class expects CLASS=N");
      overrides[static_cast<int>(ParseIntToken(item.substr(0, eq), "--cap-class"))] =
          static_cast<int>(ParseIntToken(item.substr(eq + 1), "--cap-class"));
    }
    return CapDetectionsPerClass(dets, cap, overrides);
  }
};

// Per-image inputs for prediction and threshold selection.
struct PreparedImage {
  FeatureImage features;
  SuperpixelMap superpixels;
  std::vector<Detection> detections;
  std::vector<GroundTruthInstance> gt;
};

// Reads every record's detections, caps them over the whole split and
// regroups them by image in ranking order.
std::vector<std::vector<Detection>> SplitDetections(
    const std::vector<ManifestRecord>& records, const CapFlags& caps) {
  std::vector<Detection> all;
  std::map<std::string, size_t> index;
  for (size_t i = 0; i < records.size(); ++i) {
    index[records[i].image_id] = i;
    for (auto& d :
         ReadDetections(Require(records[i].detections, "detections", records[i]))) {
      if (d.image_id != records[i].image_id) {
        throw FormatError("detections of " + records[i].image_id +
                          " name image " + d.image_id);
      }
      all.push_back(std::move(d));
    }
  }
  std::vector<std::vector<Detection>> out(records.size());
  for (auto& d : caps.Apply(all)) out[index.at(d.image_id)].push_back(std::move(d));
  return out;
}

std::vector<PreparedImage> Prepare(const std::vector<ManifestRecord>& records,
                                   const DataFlags& data, const CapFlags& caps,
                                   bool with_gt) {
  const Calibration cal = ReadCalibration(data.calibration);
  auto detections = SplitDetections(records, caps);
  std::vector<PreparedImage> images(records.size());
  ParallelFor(records.size(), data.jobs, [&](size_t i) {
    const auto geo = RecordGeocentric(records[i], data.geometry);
    images[i].features = RecordFeatures(records[i], geo, cal);
    images[i].superpixels = RecordSuperpixels(records[i]);
    images[i].detections = std::move(detections[i]);
    if (with_gt) images[i].gt = RecordInstances(records[i]);
  });
  return images;
}

double ReadThresholdFile(const std::string& path) {
  for (const auto& [line, tokens] : ReadTokenLines(path)) {
    if (tokens.size() == 2 && tokens[0] == "threshold") {
      return ParseDoubleToken(tokens[1], path + ":" + std::to_string(line));
    }
  }
  throw FormatError(path + ": no 'threshold' line");
}

void AddTrain(CLI::App& app, Commands& commands) {
  auto* sub = app.add_subcommand(
      "mask-train", "Train the instance-mask decision forest");
  auto data = std::make_shared<DataFlags>();
  auto params = std::make_shared<ForestParams>();
  auto min_iou = std::make_shared<double>(0.7);
  auto out = std::make_shared<std::string>();
  data->Add(sub, "train");
  sub->add_option("--seed", params->seed, "Master seed");
  sub->add_option("--questions", params->questions,
                  "Candidate questions per node")
      ->check(CLI::PositiveNumber);
  sub->add_option("--max-depth", params->max_depth, "Maximum tree depth");
  sub->add_option("--min-samples", params->min_samples,
                  "Smallest node that is split");
  sub->add_option("--subsample", params->subsample,
                  "Fraction of points per tree")
      ->check(CLI::Range(0.0, 1.0));
  sub->add_option("--max-offset", params->max_offset,
                  "Largest question offset in grid cells")
      ->check(CLI::Range(0, kMaxQuestionOffset));
  sub->add_flag("--unary-only", params->unary_only,
                "Disable binary (offset-difference) questions");
  sub->add_option("--min-iou", *min_iou,
                  "Detection/ground-truth box IoU needed to pair (strict)");
  sub->add_option("--out", *out, "Output model file")->required();
  commands[sub] = [=] {
    const auto records = LoadRecords(data->manifest, data->split);
    const Calibration cal = ReadCalibration(data->calibration);
    std::vector<std::vector<WarpedExample>> per_image(records.size());
    ParallelFor(records.size(), data->jobs, [&](size_t i) {
      const ManifestRecord& r = records[i];
      const auto gt = RecordInstances(r);
      const auto dets = ReadDetections(Require(r.detections, "detections", r));
      const auto pairs = AssignDetections(gt, dets, *min_iou);
      bool any = false;
      for (const auto& p : pairs) any |= p.has_value();
      if (!any) return;
      const auto features =
          RecordFeatures(r, RecordGeocentric(r, data->geometry), cal);
      for (size_t g = 0; g < gt.size(); ++g) {
        if (!pairs[g]) continue;
        const Box& box = dets[*pairs[g]].box;
        WarpedExample ex = WarpWindow(features, box);
        ex.mask = WarpMask(gt[g].mask, box);
        per_image[i].push_back(std::move(ex));
      }
    });
    std::vector<WarpedExample> examples;
    for (auto& list : per_image) {
      for (auto& ex : list) examples.push_back(std::move(ex));
    }
    if (examples.empty()) {
      throw EstimationError("no detection pairs with a ground-truth instance");
    }
    params->jobs = data->jobs;
    SaveForest(*out, TrainForest(examples, MaskFeatureChannelNames(), *params));
  };
}

void AddThreshold(CLI::App& app, Commands& commands) {
  auto* sub = app.add_subcommand(
      "mask-threshold",
      "Choose the soft-mask threshold that maximizes region AP on a split");
  auto data = std::make_shared<DataFlags>();
  auto caps = std::make_shared<CapFlags>();
  auto model = std::make_shared<std::string>();
  auto step = std::make_shared<double>(0.05);
  auto overlap = std::make_shared<double>(0.5);
  auto out = std::make_shared<std::string>();
  data->Add(sub, "val");
  caps->Add(sub);
  sub->add_option("--model", *model, "Forest model file")->required();
  sub->add_option("--step", *step, "Threshold grid step")
      ->check(CLI::Range(1e-6, 1.0));
  sub->add_option("--overlap", *overlap, "Region IoU for a true positive");
  sub->add_option("--out", *out, "Output threshold file")->required();
  commands[sub] = [=] {
    const Forest forest = LoadForest(*model);
    const auto records = LoadRecords(data->manifest, data->split);
    const auto images = Prepare(records, *data, *caps, true);
    std::vector<ValidationImage> validation;
    for (const auto& im : images) {
      validation.push_back(
          {&im.features, &im.superpixels, im.detections, im.gt});
    }
    const auto selection = SelectThreshold(forest, validation, *step, *overlap);
    std::ostringstream s;
    s << "threshold " << FormatDouble(selection.threshold) << '\n'
      << "ap " << FormatDouble(selection.ap) << '\n';
    for (const auto& [t, ap] : selection.sweep) {
      s << "sweep " << FormatDouble(t) << ' ' << FormatDouble(ap) << '\n';
    }
    WriteText(*out, s.str());
  };
}

void AddPredict(CLI::App& app, Commands& commands) {
  auto* sub = app.add_subcommand(
      "mask-predict",
      "Predict superpixel instance masks for every detection of a split");
  auto data = std::make_shared<DataFlags>();
  auto caps = std::make_shared<CapFlags>();
  auto model = std::make_shared<std::string>();
  auto threshold = std::make_shared<double>(0.5);
  auto threshold_file = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  data->Add(sub, "test");
  caps->Add(sub);
  sub->add_option("--model", *model, "Forest model file")->required();
  auto* t = sub->add_option("--threshold", *threshold, "Soft-mask threshold");
  sub->add_option("--threshold-file", *threshold_file,
                  "Threshold chosen by mask-threshold")
      ->excludes(t);
  sub->add_option("--out-dir", *out,
                  "Writes <id>.detections and <id>.regions per image")
      ->required();
  commands[sub] = [=] {
    const Forest forest = LoadForest(*model);
    const double thr =
        threshold_file->empty() ? *threshold : ReadThresholdFile(*threshold_file);
    const auto records = LoadRecords(data->manifest, data->split);
    const auto images = Prepare(records, *data, *caps, false);
    EnsureDirectory(*out);
    ParallelFor(records.size(), data->jobs, [&](size_t i) {
      const PreparedImage& im = images[i];
      std::vector<Region> regions;
      for (const auto& det : im.detections) {
        regions.push_back(ThresholdSuperpixels(
            SuperpixelConfidence(forest, det, im.features, im.superpixels),
            thr));
      }
      WriteDetections(JoinPath(*out, records[i].image_id + ".detections"),
                      im.detections);
      WriteRegions(JoinPath(*out, records[i].image_id + ".regions"), regions);
    });
  };
}

}  // namespace

void AddMaskCommands(CLI::App& app, Commands& commands) {
  AddTrain(app, commands);
  AddThreshold(app, commands);
  AddPredict(app, commands);
}

}  // namespace rgbdgeo::cli
