#include "rgbdgeo/manifest.h"

#include <filesystem>
#include <fstream>
#include <set>
#include <utility>

#include "rgbdgeo/errors.h"
#include "rgbdgeo/io.h"

namespace rgbdgeo {
namespace {

namespace fs = std::filesystem;

using Field = std::string ManifestRecord::*;

const std::vector<std::pair<std::string, Field>>& PathFields() {
  static const std::vector<std::pair<std::string, Field>> fields = {
      {"depth", &ManifestRecord::depth},
      {"color", &ManifestRecord::color},
      {"intrinsics", &ManifestRecord::intrinsics},
      {"superpixels", &ManifestRecord::superpixels},
      {"regions", &ManifestRecord::regions},
      {"detections", &ManifestRecord::detections},
      {"gt_instances", &ManifestRecord::gt_instances},
      {"gt_classes", &ManifestRecord::gt_classes},
      {"gt_labels", &ManifestRecord::gt_labels},
  };
  return fields;
}

}  // namespace

DatasetManifest DatasetManifest::Load(const std::string& path) {
  const fs::path base = fs::path(path).parent_path();
  DatasetManifest manifest;
  std::set<std::string> ids;
  for (const auto& [line, tokens] : ReadTokenLines(path)) {
    const std::string where = path + ":" + std::to_string(line);
    ManifestRecord record;
    std::set<std::string> seen;
    for (const auto& token : tokens) {
      const auto eq = token.find('=');
      if (eq == std::string::npos || eq == 0 || eq + 1 == token.size()) {
        throw FormatError(where + ": expected key=value, found '" + token +
                          "'");
      }
      const std::string key = token.substr(0, eq);
      const std::string value = token.substr(eq + 1);
      if (!seen.insert(key).second) {
        throw FormatError(where + ": repeated key '" + key + "'");
      }
      if (key == "id") {
        record.image_id = value;
        continue;
      }
      if (key == "split") {
        if (value != "train" && value != "val" && value != "test") {
          throw FormatError(where + ": split must be train, val or test");
        }
        record.split = value;
        continue;
      }
      Field field = nullptr;
      for (const auto& [name, f] : PathFields()) {
        if (name == key) field = f;
      }
      if (field == nullptr) {
        throw FormatError(where + ": unknown key '" + key + "'");
      }
      fs::path resolved(value);
      if (resolved.is_relative()) resolved = base / resolved;
      if (!fs::exists(resolved)) {
        throw IoError(where + ": missing file " + resolved.string());
      }
      record.*field = resolved.string();
    }
    if (record.image_id.empty()) throw FormatError(where + ": missing id");
    if (!ids.insert(record.image_id).second) {
      throw FormatError(where + ": duplicate image id '" + record.image_id +
                        "'");
    }
    manifest.records.push_back(std::move(record));
  }
  return manifest;
}

void DatasetManifest::Save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  const fs::path base = fs::absolute(fs::path(path)).parent_path();
  for (const auto& r : records) {
    out << "id=" << r.image_id;
    if (!r.split.empty()) out << " split=" << r.split;
    for (const auto& [name, field] : PathFields()) {
      if ((r.*field).empty()) continue;
      out << ' ' << name << '='
          << fs::proximate(fs::absolute(r.*field), base).generic_string();
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

std::vector<ManifestRecord> DatasetManifest::Split(
    const std::string& split) const {
  std::vector<ManifestRecord> out;
  for (const auto& r : records) {
    if (split.empty() || r.split == split) out.push_back(r);
  }
  return out;
}

const ManifestRecord* DatasetManifest::Find(const std::string& image_id) const {
  for (const auto& r : records) {
    if (r.image_id == image_id) return &r;
  }
  return nullptr;
}

}  // namespace rgbdgeo
