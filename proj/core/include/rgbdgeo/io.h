#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "rgbdgeo/box.h"
#include "rgbdgeo/eval.h"
#include "rgbdgeo/geocentric.h"
#include "rgbdgeo/geomcore.h"
#include "rgbdgeo/image.h"
#include "rgbdgeo/regionfeat.h"

// File formats.
//
// Images are PNG:
//   depth        16-bit gray, millimeters, 0 = invalid
//   superpixels  16-bit (or 8-bit) gray labels
//   HHA          8-bit RGB, channels (disparity, height, angle)
//   masks        8-bit gray {0, 255}; any nonzero reads as inside
//   labels       8- or 16-bit gray class ids (semantic segmentation)
// Float maps (normals, gradients) are PFM.
//
// Text files are UTF-8, whitespace-delimited, '#' starts a comment:
//   intrinsics   "fx <v>", "fy <v>", "cx <v>", "cy <v>", optional "baseline <v>"
//   calibration  "<disparity|height|angle> <low> <high>"
//   detections   "<image_id> <class_id> <score> <x0> <y0> <x1> <y1>"
//   regions      one region per line, superpixel ids, best-ranked first
//   gt classes   "<instance_id> <class_id>" for a 16-bit instance-id PNG
namespace rgbdgeo {

struct PngData {
  int width = 0;
  int height = 0;
  int channels = 0;   // 1 gray, 2 gray+alpha, 3 RGB, 4 RGBA
  int bit_depth = 0;  // 8 or 16
  std::vector<uint16_t> samples;  // interleaved, row-major
};

PngData ReadPng(const std::string& path);
void WritePng(const std::string& path, const PngData& png);

DepthImage ReadDepthPng(const std::string& path);
// Depth is rounded to millimeters; values outside (0, 65.535] m become 0.
void WriteDepthPng(const std::string& path, const DepthImage& depth);

Image<int32_t> ReadLabelPng(const std::string& path);
void WriteLabelPng(const std::string& path, const Image<int32_t>& labels);

Mask ReadMaskPng(const std::string& path);
void WriteMaskPng(const std::string& path, const Mask& mask);

HhaImage ReadHhaPng(const std::string& path);
void WriteHhaPng(const std::string& path, const HhaImage& hha);

// Gray intensity from a gray or RGB(A) 8-bit PNG (Rec. 601 luma, rounded).
Image<uint8_t> ReadGrayPng(const std::string& path);

// Portable float map, 1 or 3 channels, stored bottom-to-top as the format
// requires. `values` is interleaved top-to-bottom.
struct FloatMap {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<float> values;
};
FloatMap ReadPfm(const std::string& path);
void WritePfm(const std::string& path, const FloatMap& map);

// Shortest decimal string that parses back to the same double.
std::string FormatDouble(double v);

// Splits a text file into whitespace-delimited tokens per line, dropping
// comments and blank lines. Each entry carries its 1-based line number.
std::vector<std::pair<int, std::vector<std::string>>> ReadTokenLines(
    const std::string& path);

double ParseDoubleToken(const std::string& token, const std::string& context);
int64_t ParseIntToken(const std::string& token, const std::string& context);

CameraIntrinsics ReadIntrinsics(const std::string& path);
void WriteIntrinsics(const std::string& path, const CameraIntrinsics& k);

Calibration ReadCalibration(const std::string& path);
void WriteCalibration(const std::string& path, const Calibration& cal);

std::vector<Detection> ReadDetections(const std::string& path);
void WriteDetections(const std::string& path,
                     const std::vector<Detection>& detections);

std::vector<Region> ReadRegions(const std::string& path);
void WriteRegions(const std::string& path, const std::vector<Region>& regions);

// Instances of one image from a 16-bit instance-id PNG (0 = none) and its
// class table.
std::vector<GroundTruthInstance> ReadGroundTruthInstances(
    const std::string& image_id, const std::string& instance_png,
    const std::string& class_table);

}  // namespace rgbdgeo
