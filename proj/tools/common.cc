#include "common.h"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace rgbdgeo::cli {

namespace fs = std::filesystem;

void GeometryFlags::Add(CLI::App* sub) {
  sub->add_option("--intrinsics", intrinsics,
                  "Camera intrinsics file (overrides the manifest's)");
  sub->add_option("--normal-radius", normal_radius,
                  "Disk radius in pixels for per-pixel normals")
      ->check(CLI::PositiveNumber);
  sub->add_option("--floor-percentile", floor_percentile,
                  "Percentile of elevation used as the floor")
      ->check(CLI::Range(0.0, 100.0));
  sub->add_flag("--no-gravity-fallback", no_gravity_fallback,
                "Fail instead of assuming the image-down axis when gravity "
                "estimation fails");
}

GeocentricOptions GeometryFlags::Options() const {
  GeocentricOptions options;
  options.normal_radius = normal_radius;
  options.floor_percentile = floor_percentile;
  options.gravity_fallback = !no_gravity_fallback;
  return options;
}

std::vector<ManifestRecord> LoadRecords(const std::string& manifest,
                                        const std::string& split) {
  auto records = DatasetManifest::Load(manifest).Split(split);
  if (records.empty()) {
    throw InvalidArgument("manifest " + manifest + " has no records" +
                          (split.empty() ? "" : " in split " + split));
  }
  return records;
}

const std::string& Require(const std::string& path, const std::string& field,
                           const ManifestRecord& record) {
  if (path.empty()) {
    throw IoError("record " + record.image_id + " has no " + field);
  }
  return path;
}

CameraIntrinsics RecordIntrinsics(const ManifestRecord& record,
                                  const std::string& flag) {
  if (!flag.empty()) return ReadIntrinsics(flag);
  return ReadIntrinsics(Require(record.intrinsics, "intrinsics", record));
}

GeocentricResult RecordGeocentric(const ManifestRecord& record,
                                  const GeometryFlags& flags) {
  const DepthImage depth = ReadDepthPng(Require(record.depth, "depth", record));
  const CameraIntrinsics k = RecordIntrinsics(record, flags.intrinsics);
  k.ValidateFor(depth.width(), depth.height());
  return ComputeGeocentric(depth, k, flags.Options());
}

FeatureImage RecordFeatures(const ManifestRecord& record,
                            const GeocentricResult& geo,
                            const Calibration& calibration) {
  const HhaImage hha = EncodeHha(geo.channels, calibration);
  if (record.color.empty()) return BuildFeatureImage(geo, hha);
  const Image<uint8_t> gray = ReadGrayPng(record.color);
  return BuildFeatureImage(geo, hha, &gray);
}

std::vector<GroundTruthInstance> RecordInstances(const ManifestRecord& record) {
  return ReadGroundTruthInstances(
      record.image_id, Require(record.gt_instances, "gt_instances", record),
      Require(record.gt_classes, "gt_classes", record));
}

SuperpixelMap RecordSuperpixels(const ManifestRecord& record) {
  return SuperpixelMap::FromLabels(
      ReadLabelPng(Require(record.superpixels, "superpixels", record)));
}

void EnsureDirectory(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
}

std::string JoinPath(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void WriteText(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw IoError("write failed: " + path);
}

std::vector<int> ParseIntList(const std::string& text,
                              const std::string& flag) {
  std::vector<int> out;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, ',');) {
    out.push_back(static_cast<int>(ParseIntToken(item, flag)));
  }
  if (out.empty()) throw UsageError(flag + ": empty list");
  return out;
}

}  // namespace rgbdgeo::cli
