#include <iostream>
#include <memory>
#include <set>
#include <sstream>

#include "common.h"
#include "rgbdgeo/eval.h"

namespace rgbdgeo::cli {
namespace {

struct SplitFlags {
  std::string manifest;
  std::string split;

  void Add(CLI::App* sub) {
    sub->add_option("--manifest", manifest, "Data set manifest")->required();
    sub->add_option("--split", split, "Manifest split (default: all)");
  }
};

void AddCoverage(CLI::App& app, Commands& commands) {
  auto* sub = app.add_subcommand(
      "eval-coverage", "Class-balanced best-overlap coverage of ranked regions");
  auto in = std::make_shared<SplitFlags>();
  auto ranks = std::make_shared<std::string>();
  auto ks = std::make_shared<std::string>("1,10,100");
  auto classes = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  in->Add(sub);
  sub->add_option("--ranks", *ranks,
                  "Directory of <id>.txt region files (default: manifest "
                  "regions)");
  sub->add_option("--k", *ks, "Comma-separated proposal counts");
  sub->add_option("--classes", *classes,
                  "Expected class ids; missing ones are reported");
  sub->add_option("--out", *out, "Output TSV")->required();
  commands[sub] = [=] {
    const auto records = LoadRecords(in->manifest, in->split);
    const auto k_list = ParseIntList(*ks, "--k");
    std::vector<int> expected;
    if (!classes->empty()) expected = ParseIntList(*classes, "--classes");
    std::vector<GroundTruthInstance> gt;
    std::map<std::string, RankedRegions> images;
    for (const auto& r : records) {
      for (auto& g : RecordInstances(r)) gt.push_back(std::move(g));
      RankedRegions ranked;
      ranked.superpixels = RecordSuperpixels(r);
      ranked.ranked = ReadRegions(
          ranks->empty() ? Require(r.regions, "regions", r)
                         : JoinPath(*ranks, r.image_id + ".txt"));
      images.emplace(r.image_id, std::move(ranked));
    }
    const CoverageCurve curve = ComputeCoverage(gt, images, k_list, expected);
    for (int c : curve.empty_classes) {
      std::cerr << "warning: class " << c
                << " has no ground-truth instances and is excluded\n";
    }
    std::ostringstream s;
    s << "# classes " << curve.class_count << '\n';
    for (const auto& [c, n] : curve.instances_per_class) {
      s << "# class " << c << " instances " << n << '\n';
    }
    s << "k\tcoverage\n";
    for (const auto& [k, v] : curve.points) {
      s << k << '\t' << FormatDouble(v) << '\n';
    }
    WriteText(*out, s.str());
  };
}

void AddAp(CLI::App& app, Commands& commands) {
  auto* sub = app.add_subcommand(
      "eval-ap",
      "Per-class average precision with box (default) or region overlap");
  auto in = std::make_shared<SplitFlags>();
  auto detections = std::make_shared<std::string>();
  auto predictions = std::make_shared<std::string>();
  auto options = std::make_shared<ApOptions>();
  auto interpolation = std::make_shared<std::string>("continuous");
  auto pr_dir = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  in->Add(sub);
  auto* d = sub->add_option("--detections", *detections,
                            "Detection file (default: manifest detections)");
  sub->add_option("--predictions", *predictions,
                  "mask-predict output directory; selects region overlap")
      ->excludes(d);
  sub->add_option("--overlap", options->threshold, "IoU for a true positive")
      ->check(CLI::Range(0.0, 1.0));
  sub->add_option("--interpolation", *interpolation, "continuous or 11point")
      ->check(CLI::IsMember({"continuous", "11point"}));
  sub->add_option("--pr-dir", *pr_dir,
                  "Directory for per-class precision/recall curves");
  sub->add_option("--out", *out, "Output TSV")->required();
  commands[sub] = [=] {
    options->interpolation = *interpolation == "11point"
                                 ? ApInterpolation::kElevenPoint
                                 : ApInterpolation::kContinuous;
    const auto records = LoadRecords(in->manifest, in->split);
    std::set<std::string> ids;
    std::vector<GroundTruthInstance> gt;
    for (const auto& r : records) {
      ids.insert(r.image_id);
      for (auto& g : RecordInstances(r)) gt.push_back(std::move(g));
    }
    std::vector<Detection> dets;
    std::vector<Mask> masks;
    if (!predictions->empty()) {
      for (const auto& r : records) {
        const auto image_dets =
            ReadDetections(JoinPath(*predictions, r.image_id + ".detections"));
        const auto regions =
            ReadRegions(JoinPath(*predictions, r.image_id + ".regions"));
        if (regions.size() != image_dets.size()) {
          throw FormatError("predictions for " + r.image_id +
                            ": detection and region counts differ");
        }
        const auto sp = RecordSuperpixels(r);
        for (size_t i = 0; i < image_dets.size(); ++i) {
          dets.push_back(image_dets[i]);
          masks.push_back(RegionMask(regions[i], sp));
        }
      }
    } else if (!detections->empty()) {
      for (auto& det : ReadDetections(*detections)) {
        if (ids.contains(det.image_id)) dets.push_back(std::move(det));
      }
    } else {
      for (const auto& r : records) {
        for (auto& det :
             ReadDetections(Require(r.detections, "detections", r))) {
          dets.push_back(std::move(det));
        }
      }
    }
    const MeanApResult result = MeanAveragePrecision(
        dets, gt, *options, predictions->empty() ? nullptr : &masks);
    std::ostringstream s;
    s << "class\tap\tnum_gt\n";
    for (const auto& [c, r] : result.per_class) {
      s << c << '\t' << FormatDouble(r.ap) << '\t' << r.num_gt << '\n';
    }
    s << "mean\t" << FormatDouble(result.mean_ap) << '\n';
    WriteText(*out, s.str());
    if (pr_dir->empty()) return;
    EnsureDirectory(*pr_dir);
    for (const auto& [c, r] : result.per_class) {
      std::ostringstream pr;
      pr << "recall\tprecision\tscore\n";
      for (const auto& p : r.curve) {
        pr << FormatDouble(p.recall) << '\t' << FormatDouble(p.precision)
           << '\t' << FormatDouble(p.score) << '\n';
      }
      WriteText(JoinPath(*pr_dir, "pr_class" + std::to_string(c) + ".tsv"),
                pr.str());
    }
  };
}

void AddSegmentation(CLI::App& app, Commands& commands) {
  auto* sub = app.add_subcommand(
      "eval-segm", "Semantic segmentation fwavacc, avacc, pixacc and IoUs");
  auto in = std::make_shared<SplitFlags>();
  auto predictions = std::make_shared<std::string>();
  auto classes = std::make_shared<int>(0);
  auto ignore = std::make_shared<int>(255);
  auto out = std::make_shared<std::string>();
  in->Add(sub);
  sub->add_option("--predictions", *predictions,
                  "Directory of <id>.png predicted label maps")
      ->required();
  sub->add_option("--classes", *classes, "Number of classes")
      ->required()
      ->check(CLI::PositiveNumber);
  sub->add_option("--ignore", *ignore, "Unlabeled / no-prediction label");
  sub->add_option("--out", *out, "Output file")->required();
  commands[sub] = [=] {
    SegmentationConfusion confusion(*classes, *ignore);
    for (const auto& r : LoadRecords(in->manifest, in->split)) {
      confusion.Add(ReadLabelPng(JoinPath(*predictions, r.image_id + ".png")),
                    ReadLabelPng(Require(r.gt_labels, "gt_labels", r)));
    }
    const SegmentationMetrics m = confusion.Metrics();
    std::ostringstream s;
    s << "fwavacc " << FormatDouble(m.fwavacc) << '\n'
      << "avacc " << FormatDouble(m.avacc) << '\n'
      << "pixacc " << FormatDouble(m.pixacc) << '\n';
    for (int c = 0; c < *classes; ++c) {
      s << "class " << c << " iou "
        << (m.class_iou[c] ? FormatDouble(*m.class_iou[c]) : "NA")
        << " gt_pixels " << m.gt_pixels[c] << '\n';
    }
    WriteText(*out, s.str());
  };
}

void AddNms(CLI::App& app, Commands& commands) {
  auto* sub = app.add_subcommand(
      "nms", "Greedy non-maximum suppression per image and class");
  auto detections = std::make_shared<std::string>();
  auto threshold = std::make_shared<double>(0.3);
  auto out = std::make_shared<std::string>();
  sub->add_option("--detections", *detections, "Detection file")->required();
  sub->add_option("--threshold", *threshold,
                  "Suppress when IoU with a kept box exceeds this")
      ->check(CLI::Range(0.0, 1.0));
  sub->add_option("--out", *out, "Output detection file")->required();
  commands[sub] = [=] {
    WriteDetections(*out, Nms(ReadDetections(*detections), *threshold));
  };
}

}  // namespace

void AddEvalCommands(CLI::App& app, Commands& commands) {
  AddCoverage(app, commands);
  AddAp(app, commands);
  AddSegmentation(app, commands);
  AddNms(app, commands);
}

}  // namespace rgbdgeo::cli
