#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rgbdgeo/geomcore.h"
#include "rgbdgeo/io.h"
#include "rgbdgeo/manifest.h"
#include "rgbdgeo/maskforest.h"
#include "rgbdgeo/pipeline.h"

namespace rgbdgeo::cli {

// Bad flag combinations detected after parsing; exits with status 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Subcommand bodies, run after config values have been applied.
using Commands = std::map<const CLI::App*, std::function<void()>>;

void AddGeometryCommands(CLI::App& app, Commands& commands);
void AddMaskCommands(CLI::App& app, Commands& commands);
void AddEvalCommands(CLI::App& app, Commands& commands);

// Options shared by every command that computes geocentric channels.
struct GeometryFlags {
  std::string intrinsics;
  int normal_radius = 5;
  double floor_percentile = kDefaultFloorPercentile;
  bool no_gravity_fallback = false;

  void Add(CLI::App* sub);
  GeocentricOptions Options() const;
};

// Records of `split` (all records when empty) from a manifest.
std::vector<ManifestRecord> LoadRecords(const std::string& manifest,
                                        const std::string& split);

// The --intrinsics flag wins over the record's own file.
CameraIntrinsics RecordIntrinsics(const ManifestRecord& record,
                                  const std::string& flag);

// Geocentric channels of one record.
GeocentricResult RecordGeocentric(const ManifestRecord& record,
                                  const GeometryFlags& flags);

// Mask-forest feature image of one record.
FeatureImage RecordFeatures(const ManifestRecord& record,
                            const GeocentricResult& geo,
                            const Calibration& calibration);

std::vector<GroundTruthInstance> RecordInstances(const ManifestRecord& record);
SuperpixelMap RecordSuperpixels(const ManifestRecord& record);

// Throws IoError when `path` is empty, naming the missing manifest field.
const std::string& Require(const std::string& path, const std::string& field,
                           const ManifestRecord& record);

void EnsureDirectory(const std::string& dir);
std::string JoinPath(const std::string& dir, const std::string& name);
void WriteText(const std::string& path, const std::string& text);

// Parses "1,10,100".
std::vector<int> ParseIntList(const std::string& text, const std::string& flag);

}  // namespace rgbdgeo::cli
