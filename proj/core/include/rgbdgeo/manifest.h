#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rgbdgeo {

// One image of a data set. Paths are absolute or relative to the working
// directory after loading; empty means "not provided".
struct ManifestRecord {
  std::string image_id;
  std::string split;  // "train", "val", "test" or empty
  std::string depth;
  std::string color;
  std::string intrinsics;
  std::string superpixels;
  std::string regions;
  std::string detections;
  std::string gt_instances;  // 16-bit instance-id PNG
  std::string gt_classes;    // instance -> class table
  std::string gt_labels;     // semantic label PNG
};

// Manifest text format: one record per line of key=value tokens, e.g.
//
//   id=img0001 split=train depth=depth/0001.png superpixels=sp/0001.png
//
// Keys: id (required), split, depth, color, intrinsics, superpixels, regions,
// detections, gt_instances, gt_classes, gt_labels. Relative paths resolve
// against the manifest's directory.
struct DatasetManifest {
  std::vector<ManifestRecord> records;

  // Throws FormatError for unknown keys, malformed tokens, duplicate ids or
  // a bad split tag, and IoError when a referenced file does not exist.
  static DatasetManifest Load(const std::string& path);
  // Writes paths relative to the manifest's own directory.
  void Save(const std::string& path) const;

  // Records of one split, in file order. An empty tag selects everything.
  std::vector<ManifestRecord> Split(const std::string& split) const;
  const ManifestRecord* Find(const std::string& image_id) const;
};

}  // namespace rgbdgeo
