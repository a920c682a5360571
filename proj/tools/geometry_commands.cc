#include <cmath>
#include <iostream>
#include <memory>
#include <sstream>

#include "common.h"
#include "rgbdgeo/geocentric.h"
#include "rgbdgeo/kinect.h"
#include "rgbdgeo/normals.h"
#include "rgbdgeo/parallel.h"
#include "rgbdgeo/regionfeat.h"
#include "rgbdgeo/seed.h"

namespace rgbdgeo::cli {
namespace {

// Either one image (--depth/--out) or a manifest (--manifest/--out-dir).
struct InputFlags {
  std::string depth;
  std::string manifest;
  std::string split;
  int jobs = 1;

  void Add(CLI::App* sub, bool batch) {
    auto* d = sub->add_option("--depth", depth, "16-bit depth PNG (mm)");
    if (!batch) {
      d->required();
      return;
    }
    auto* m = sub->add_option("--manifest", manifest, "Data set manifest");
    d->excludes(m);
    sub->add_option("--split", split, "Manifest split (default: all)");
    sub->add_option("--jobs", jobs, "Images processed in parallel")
        ->check(CLI::PositiveNumber);
  }

  bool single() const { return !depth.empty(); }
};

GeocentricResult SingleGeocentric(const InputFlags& in,
                                  const GeometryFlags& geometry) {
  if (geometry.intrinsics.empty()) throw UsageError("--intrinsics is required");
  ManifestRecord record;
  record.image_id = in.depth;
  record.depth = in.depth;
  return RecordGeocentric(record, geometry);
}

FloatMap ToFloatMap(const Image<double>& values, const Mask& valid) {
  FloatMap map{values.width(), values.height(), 1, {}};
  map.values.resize(values.size(), 0.0f);
  for (size_t i = 0; i < values.size(); ++i) {
    if (valid[i]) map.values[i] = static_cast<float>(values[i]);
  }
  return map;
}

void AddHha(CLI::App& app, Commands& commands) {
  auto* sub = app.add_subcommand("hha", "Encode depth as an 8-bit HHA PNG");
  auto in = std::make_shared<InputFlags>();
  auto geometry = std::make_shared<GeometryFlags>();
  auto calibration = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  in->Add(sub, true);
  geometry->Add(sub);
  sub->add_option("--calibration", *calibration, "Calibration file")
      ->required();
  sub->add_option("--out", *out,
                  "Output PNG (single image) or directory (manifest)");
  sub->add_option("--out-dir", *out, "Output directory for a manifest");
  commands[sub] = [=] {
    if (out->empty()) throw UsageError("--out or --out-dir is required");
    const Calibration cal = ReadCalibration(*calibration);
    if (in->single()) {
      WriteHhaPng(*out, EncodeHha(SingleGeocentric(*in, *geometry).channels, cal));
      return;
    }
    if (in->manifest.empty()) throw UsageError("--depth or --manifest is required");
    const auto records = LoadRecords(in->manifest, in->split);
    EnsureDirectory(*out);
    ParallelFor(records.size(), in->jobs, [&](size_t i) {
      const auto geo = RecordGeocentric(records[i], *geometry);
      WriteHhaPng(JoinPath(*out, records[i].image_id + ".png"),
                  EncodeHha(geo.channels, cal));
    });
  };
}

void AddNormals(CLI::App& app, Commands& commands) {
  auto* sub = app.add_subcommand(
      "normals", "Per-pixel surface normals as a 3-channel PFM (0 = invalid)");
  auto in = std::make_shared<InputFlags>();
  auto geometry = std::make_shared<GeometryFlags>();
  auto out = std::make_shared<std::string>();
  in->Add(sub, false);
  geometry->Add(sub);
  sub->add_option("--out", *out, "Output PFM")->required();
  commands[sub] = [=] {
    const auto geo = SingleGeocentric(*in, *geometry);
    const NormalMap& n = geo.normals;
    FloatMap map{n.width(), n.height(), 3, {}};
    map.values.resize(n.normals.size() * 3, 0.0f);
    for (size_t i = 0; i < n.normals.size(); ++i) {
      if (!n.valid[i]) continue;
      for (int c = 0; c < 3; ++c) {
        map.values[i * 3 + c] = static_cast<float>(n.normals[i][c]);
      }
    }
    WritePfm(*out, map);
  };
}

void AddGravity(CLI::App& app, Commands& commands) {
  auto* sub = app.add_subcommand("gravity", "Estimate the gravity direction");
  auto in = std::make_shared<InputFlags>();
  auto geometry = std::make_shared<GeometryFlags>();
  auto out = std::make_shared<std::string>();
  in->Add(sub, false);
  geometry->Add(sub);
  sub->add_option("--out", *out, "Output text file (default: stdout)");
  commands[sub] = [=] {
    const auto geo = SingleGeocentric(*in, *geometry);
    const auto& g = geo.gravity;
    std::ostringstream s;
    s << "down " << FormatDouble(g.down.x()) << ' ' << FormatDouble(g.down.y())
      << ' ' << FormatDouble(g.down.z()) << '\n'
      << "iterations " << g.iterations_run << '\n'
      << "aligned_fraction " << FormatDouble(g.aligned_fraction) << '\n'
      << "fallback " << (geo.fallback_used ? 1 : 0) << '\n';
    if (out->empty()) {
      std::cout << s.str();
    } else {
      WriteText(*out, s.str());
    }
  };
}

void AddGradients(CLI::App& app, Commands& commands) {
  auto* sub = app.add_subcommand(
      "gradients",
      "Normal-gradient (NG+, NG-) and depth-gradient (DG) maps as PFMs");
  auto in = std::make_shared<InputFlags>();
  auto geometry = std::make_shared<GeometryFlags>();
  auto radii = std::make_shared<std::string>("3,5");
  auto orientations = std::make_shared<int>(kDefaultGradientOrientations);
  auto out = std::make_shared<std::string>();
  in->Add(sub, false);
  sub->add_option("--intrinsics", geometry->intrinsics, "Intrinsics file")
      ->required();
  sub->add_option("--radii", *radii, "Half-disk radii in pixels");
  sub->add_option("--orientations", *orientations, "Orientation count")
      ->check(CLI::Range(2, 64));
  sub->add_option("--out-dir", *out, "Output directory")->required();
  commands[sub] = [=] {
    const DepthImage depth = ReadDepthPng(in->depth);
    const CameraIntrinsics k = ReadIntrinsics(geometry->intrinsics);
    const PointCloud cloud = Backproject(depth, k);
    const std::vector<int> r = ParseIntList(*radii, "--radii");
    EnsureDirectory(*out);
    for (const GradientMaps& maps : NormalGradients(cloud, r, *orientations)) {
      for (int o = 0; o < maps.orientations; ++o) {
        const std::string suffix = "_r" + std::to_string(maps.radius) + "_o" +
                                   std::to_string(o) + ".pfm";
        WritePfm(JoinPath(*out, "ng_plus" + suffix),
                 ToFloatMap(maps.ng_plus[o], maps.valid[o]));
        WritePfm(JoinPath(*out, "ng_minus" + suffix),
                 ToFloatMap(maps.ng_minus[o], maps.valid[o]));
        WritePfm(JoinPath(*out, "dg" + suffix),
                 ToFloatMap(maps.dg[o], maps.valid[o]));
      }
    }
  };
}

void AddRegionFeatures(CLI::App& app, Commands& commands) {
  auto* sub = app.add_subcommand(
      "regionfeat", "Geometric features of region proposals (tab-separated)");
  auto in = std::make_shared<InputFlags>();
  auto geometry = std::make_shared<GeometryFlags>();
  auto superpixels = std::make_shared<std::string>();
  auto regions = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  in->Add(sub, false);
  geometry->Add(sub);
  sub->add_option("--superpixels", *superpixels, "Superpixel label PNG")
      ->required();
  sub->add_option("--regions", *regions, "Region file")->required();
  sub->add_option("--out", *out, "Output TSV")->required();
  commands[sub] = [=] {
    const auto geo = SingleGeocentric(*in, *geometry);
    const auto sp = SuperpixelMap::FromLabels(ReadLabelPng(*superpixels));
    const auto aggregates = Accumulate(MakeRegionFeatureInputs(geo), sp);
    std::ostringstream s;
    s << "region\tvalid_count";
    for (const auto name : GeometricFeatureNames()) s << '\t' << name;
    s << '\n';
    const auto list = ReadRegions(*regions);
    for (size_t r = 0; r < list.size(); ++r) {
      s << r;
      try {
        const auto f = RegionFeatures(list[r], aggregates);
        s << '\t' << f.valid_count;
        for (double v : f.values) s << '\t' << FormatDouble(v);
      } catch (const EstimationError&) {
        s << "\t0";
        for (int i = 0; i < kGeometricFeatureCount; ++i) s << "\tNA";
      }
      s << '\n';
    }
    WriteText(*out, s.str());
  };
}

void AddSimulateKinect(CLI::App& app, Commands& commands) {
  auto* sub = app.add_subcommand(
      "simulate-kinect",
      "Quantized, noisy disparity simulation of clean depth");
  auto in = std::make_shared<InputFlags>();
  auto intrinsics = std::make_shared<std::string>();
  auto model = std::make_shared<KinectModel>();
  auto seed = std::make_shared<uint64_t>(0);
  auto out = std::make_shared<std::string>();
  in->Add(sub, true);
  sub->add_option("--intrinsics", *intrinsics,
                  "Intrinsics file (overrides the manifest's)");
  sub->add_option("--step", model->step, "Disparity quantization step (px)");
  sub->add_option("--sigma", model->sigma, "Disparity noise std (px)");
  sub->add_option("--downscale", model->downscale, "Noise grid spacing (px)");
  sub->add_option("--seed", *seed, "Master seed");
  sub->add_option("--out", *out, "Output depth PNG (single image)");
  sub->add_option("--out-dir", *out,
                  "Output directory; also receives manifest.txt");
  commands[sub] = [=] {
    if (out->empty()) throw UsageError("--out or --out-dir is required");
    model->Validate();
    if (in->single()) {
      if (intrinsics->empty()) throw UsageError("--intrinsics is required");
      const DepthImage depth = ReadDepthPng(in->depth);
      WriteDepthPng(*out, SimulateKinect(depth, ReadIntrinsics(*intrinsics),
                                         *model, *seed));
      return;
    }
    if (in->manifest.empty()) throw UsageError("--depth or --manifest is required");
    auto records = LoadRecords(in->manifest, in->split);
    EnsureDirectory(*out);
    ParallelFor(records.size(), in->jobs, [&](size_t i) {
      ManifestRecord& r = records[i];
      const DepthImage depth = ReadDepthPng(Require(r.depth, "depth", r));
      const CameraIntrinsics k = RecordIntrinsics(r, *intrinsics);
      r.depth = JoinPath(*out, r.image_id + ".png");
      WriteDepthPng(r.depth, SimulateKinect(depth, k, *model,
                                            ItemSeed(*seed, r.image_id)));
    });
    DatasetManifest manifest{records};
    manifest.Save(JoinPath(*out, "manifest.txt"));
  };
}

void AddCalibrate(CLI::App& app, Commands& commands) {
  auto* sub = app.add_subcommand(
      "calibrate", "Fit HHA channel ranges over a set of images");
  auto in = std::make_shared<InputFlags>();
  auto geometry = std::make_shared<GeometryFlags>();
  auto options = std::make_shared<CalibrationOptions>();
  auto out = std::make_shared<std::string>();
  in->Add(sub, true);
  geometry->Add(sub);
  sub->add_option("--low", options->low_percentile, "Lower percentile")
      ->check(CLI::Range(0.0, 100.0));
  sub->add_option("--high", options->high_percentile, "Upper percentile")
      ->check(CLI::Range(0.0, 100.0));
  sub->add_option("--out", *out, "Output calibration file")->required();
  commands[sub] = [=] {
    std::vector<GeocentricChannels> channels;
    if (in->single()) {
      channels.push_back(SingleGeocentric(*in, *geometry).channels);
    } else {
      if (in->manifest.empty()) {
        throw UsageError("--depth or --manifest is required");
      }
      const auto records = LoadRecords(in->manifest, in->split);
      channels.resize(records.size());
      ParallelFor(records.size(), in->jobs, [&](size_t i) {
        channels[i] = RecordGeocentric(records[i], *geometry).channels;
      });
    }
    WriteCalibration(*out, FitCalibration(channels, *options));
  };
}

}  // namespace

void AddGeometryCommands(CLI::App& app, Commands& commands) {
  AddHha(app, commands);
  AddNormals(app, commands);
  AddGravity(app, commands);
  AddGradients(app, commands);
  AddRegionFeatures(app, commands);
  AddSimulateKinect(app, commands);
  AddCalibrate(app, commands);
}

}  // namespace rgbdgeo::cli
