#include "rgbdgeo/io.h"

#include <png.h>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>
#include <system_error>

namespace rgbdgeo {
namespace {

using FilePtr = std::unique_ptr<FILE, int (*)(FILE*)>;

FilePtr OpenFile(const std::string& path, const char* mode) {
  FILE* f = std::fopen(path.c_str(), mode);
  if (f == nullptr) {
    throw IoError(std::string("cannot open ") + path + ": " +
                  std::strerror(errno));
  }
  return FilePtr(f, &std::fclose);
}

void PngErrorHandler(png_structp png, png_const_charp message) {
  auto* buffer = static_cast<std::string*>(png_get_error_ptr(png));
  if (buffer != nullptr) *buffer = message;
  png_longjmp(png, 1);
}

void PngWarningHandler(png_structp, png_const_charp) {}

int ChannelsForColorType(int color_type) {
  switch (color_type) {
    case PNG_COLOR_TYPE_GRAY:
      return 1;
    case PNG_COLOR_TYPE_GRAY_ALPHA:
      return 2;
    case PNG_COLOR_TYPE_RGB:
      return 3;
    case PNG_COLOR_TYPE_RGB_ALPHA:
      return 4;
    default:
      return 0;
  }
}

int ColorTypeForChannels(int channels) {
  switch (channels) {
    case 1:
      return PNG_COLOR_TYPE_GRAY;
    case 2:
      return PNG_COLOR_TYPE_GRAY_ALPHA;
    case 3:
      return PNG_COLOR_TYPE_RGB;
    case 4:
      return PNG_COLOR_TYPE_RGB_ALPHA;
    default:
      throw InvalidArgument("png: unsupported channel count");
  }
}

std::string Trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::ofstream OpenText(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  return out;
}

void CheckWritten(const std::ofstream& out, const std::string& path) {
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace

PngData ReadPng(const std::string& path) {
  FilePtr file = OpenFile(path, "rb");
  unsigned char signature[8];
  if (std::fread(signature, 1, 8, file.get()) != 8 ||
      png_sig_cmp(signature, 0, 8) != 0) {
    throw FormatError(path + ": not a PNG file");
  }
  std::string error;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &error,
                                           PngErrorHandler, PngWarningHandler);
  if (png == nullptr) throw IoError("png: out of memory");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("png: out of memory");
  }

  PngData out;
  std::vector<png_bytep> rows;
  std::vector<unsigned char> buffer;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError(path + ": " + error);
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const int bit_depth = png_get_bit_depth(png, info);
  const int color_type = png_get_color_type(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
  }
  png_read_update_info(png, info);

  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.bit_depth = png_get_bit_depth(png, info);
  out.channels = ChannelsForColorType(png_get_color_type(png, info));
  const size_t row_bytes = png_get_rowbytes(png, info);
  buffer.resize(row_bytes * out.height);
  rows.resize(out.height);
  for (int y = 0; y < out.height; ++y) rows[y] = buffer.data() + y * row_bytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  if (out.channels == 0 || (out.bit_depth != 8 && out.bit_depth != 16)) {
    throw FormatError(path + ": unsupported PNG layout");
  }
  const size_t count =
      static_cast<size_t>(out.width) * out.height * out.channels;
  out.samples.resize(count);
  if (out.bit_depth == 8) {
    for (size_t i = 0; i < count; ++i) out.samples[i] = buffer[i];
  } else {
    for (size_t i = 0; i < count; ++i) {
      out.samples[i] =
          static_cast<uint16_t>((buffer[2 * i] << 8) | buffer[2 * i + 1]);
    }
  }
  return out;
}

void WritePng(const std::string& path, const PngData& data) {
  if (data.bit_depth != 8 && data.bit_depth != 16) {
    throw InvalidArgument("png: bit depth must be 8 or 16");
  }
  const size_t count =
      static_cast<size_t>(data.width) * data.height * data.channels;
  if (data.samples.size() != count || data.width <= 0 || data.height <= 0) {
    throw DimensionError("png: sample count does not match dimensions");
  }
  const int bytes = data.bit_depth / 8;
  std::vector<unsigned char> buffer(count * bytes);
  for (size_t i = 0; i < count; ++i) {
    if (bytes == 1) {
      buffer[i] = static_cast<unsigned char>(data.samples[i]);
    } else {
      buffer[2 * i] = static_cast<unsigned char>(data.samples[i] >> 8);
      buffer[2 * i + 1] = static_cast<unsigned char>(data.samples[i] & 0xff);
    }
  }
  const size_t row_bytes = static_cast<size_t>(data.width) * data.channels * bytes;
  std::vector<png_bytep> rows(data.height);
  for (int y = 0; y < data.height; ++y) rows[y] = buffer.data() + y * row_bytes;

  FilePtr file = OpenFile(path, "wb");
  std::string error;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &error,
                                            PngErrorHandler, PngWarningHandler);
  if (png == nullptr) throw IoError("png: out of memory");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("png: out of memory");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError(path + ": " + error);
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, data.width, data.height, data.bit_depth,
               ColorTypeForChannels(data.channels), PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

DepthImage ReadDepthPng(const std::string& path) {
  const PngData png = ReadPng(path);
  if (png.channels != 1 || png.bit_depth != 16) {
    throw FormatError(path + ": depth must be a 16-bit single-channel PNG");
  }
  DepthImage depth(png.width, png.height);
  for (size_t i = 0; i < png.samples.size(); ++i) {
    if (png.samples[i] == 0) continue;
    depth.depth[i] = png.samples[i] / 1000.0;
    depth.valid[i] = 1;
  }
  return depth;
}

void WriteDepthPng(const std::string& path, const DepthImage& depth) {
  PngData png{depth.width(), depth.height(), 1, 16, {}};
  png.samples.resize(depth.depth.size(), 0);
  for (size_t i = 0; i < depth.depth.size(); ++i) {
    if (!depth.valid[i]) continue;
    const double mm = std::round(depth.depth[i] * 1000.0);
    if (mm >= 1.0 && mm <= 65535.0) png.samples[i] = static_cast<uint16_t>(mm);
  }
  WritePng(path, png);
}

Image<int32_t> ReadLabelPng(const std::string& path) {
  const PngData png = ReadPng(path);
  if (png.channels != 1) {
    throw FormatError(path + ": label maps must be single-channel PNGs");
  }
  Image<int32_t> labels(png.width, png.height, 0);
  for (size_t i = 0; i < png.samples.size(); ++i) labels[i] = png.samples[i];
  return labels;
}

void WriteLabelPng(const std::string& path, const Image<int32_t>& labels) {
  PngData png{labels.width(), labels.height(), 1, 16, {}};
  png.samples.resize(labels.size());
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] > 65535) {
      throw InvalidArgument("label png: label outside [0, 65535]");
    }
    png.samples[i] = static_cast<uint16_t>(labels[i]);
  }
  WritePng(path, png);
}

Mask ReadMaskPng(const std::string& path) {
  const PngData png = ReadPng(path);
  Mask mask(png.width, png.height, 0);
  for (size_t i = 0; i < mask.size(); ++i) {
    mask[i] = png.samples[i * png.channels] != 0 ? 1 : 0;
  }
  return mask;
}

void WriteMaskPng(const std::string& path, const Mask& mask) {
  PngData png{mask.width(), mask.height(), 1, 8, {}};
  png.samples.resize(mask.size());
  for (size_t i = 0; i < mask.size(); ++i) png.samples[i] = mask[i] ? 255 : 0;
  WritePng(path, png);
}

HhaImage ReadHhaPng(const std::string& path) {
  const PngData png = ReadPng(path);
  if (png.channels != 3 || png.bit_depth != 8) {
    throw FormatError(path + ": HHA must be an 8-bit RGB PNG");
  }
  HhaImage hha(png.width, png.height);
  for (size_t i = 0; i < png.samples.size(); ++i) {
    hha.data[i] = static_cast<uint8_t>(png.samples[i]);
  }
  return hha;
}

void WriteHhaPng(const std::string& path, const HhaImage& hha) {
  PngData png{hha.width, hha.height, 3, 8, {}};
  png.samples.assign(hha.data.begin(), hha.data.end());
  WritePng(path, png);
}

Image<uint8_t> ReadGrayPng(const std::string& path) {
  const PngData png = ReadPng(path);
  if (png.bit_depth != 8) throw FormatError(path + ": expected an 8-bit PNG");
  Image<uint8_t> gray(png.width, png.height, 0);
  for (size_t i = 0; i < gray.size(); ++i) {
    const uint16_t* s = &png.samples[i * png.channels];
    if (png.channels >= 3) {
      gray[i] = static_cast<uint8_t>(
          std::lround(0.299 * s[0] + 0.587 * s[1] + 0.114 * s[2]));
    } else {
      gray[i] = static_cast<uint8_t>(s[0]);
    }
  }
  return gray;
}

FloatMap ReadPfm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string magic;
  FloatMap map;
  double scale = 0.0;
  in >> magic >> map.width >> map.height >> scale;
  if (!in || (magic != "Pf" && magic != "PF") || map.width <= 0 ||
      map.height <= 0 || scale == 0.0) {
    throw FormatError(path + ": bad PFM header");
  }
  in.get();  // single whitespace before the raster
  map.channels = magic == "PF" ? 3 : 1;
  const size_t row = static_cast<size_t>(map.width) * map.channels;
  map.values.resize(row * map.height);
  const bool little = scale < 0.0;
  std::vector<unsigned char> bytes(row * 4);
  for (int y = map.height - 1; y >= 0; --y) {
    in.read(reinterpret_cast<char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
    if (!in) throw FormatError(path + ": truncated PFM raster");
    for (size_t i = 0; i < row; ++i) {
      uint32_t bits = 0;
      for (int b = 0; b < 4; ++b) {
        const uint32_t byte = bytes[i * 4 + (little ? b : 3 - b)];
        bits |= byte << (8 * b);
      }
      float v;
      std::memcpy(&v, &bits, sizeof(v));
      map.values[static_cast<size_t>(y) * row + i] = v;
    }
  }
  return map;
}

void WritePfm(const std::string& path, const FloatMap& map) {
  if (map.channels != 1 && map.channels != 3) {
    throw InvalidArgument("pfm: 1 or 3 channels required");
  }
  const size_t row = static_cast<size_t>(map.width) * map.channels;
  if (map.values.size() != row * map.height) {
    throw DimensionError("pfm: value count does not match dimensions");
  }
  std::ofstream out = OpenText(path);
  out << (map.channels == 3 ? "PF" : "Pf") << '\n'
      << map.width << ' ' << map.height << '\n'
      << "-1.0\n";
  std::vector<unsigned char> bytes(row * 4);
  for (int y = map.height - 1; y >= 0; --y) {
    for (size_t i = 0; i < row; ++i) {
      uint32_t bits;
      const float v = map.values[static_cast<size_t>(y) * row + i];
      std::memcpy(&bits, &v, sizeof(bits));
      for (int b = 0; b < 4; ++b) {
        bytes[i * 4 + b] = static_cast<unsigned char>((bits >> (8 * b)) & 0xff);
      }
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
  }
  CheckWritten(out, path);
}

std::string FormatDouble(double v) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, result.ptr);
}

std::vector<std::pair<int, std::vector<std::string>>> ReadTokenLines(
    const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::pair<int, std::vector<std::string>>> lines;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.resize(hash);
    }
    std::istringstream fields(line);
    std::vector<std::string> tokens;
    for (std::string t; fields >> t;) tokens.push_back(std::move(t));
    if (!tokens.empty()) lines.emplace_back(number, std::move(tokens));
  }
  return lines;
}

double ParseDoubleToken(const std::string& token, const std::string& context) {
  double v = 0.0;
  const std::string t = Trim(token);
  const char* begin = t.data();
  // from_chars rejects a leading '+'.
  if (!t.empty() && t[0] == '+') ++begin;
  const auto result = std::from_chars(begin, t.data() + t.size(), v);
  if (result.ec != std::errc() || result.ptr != t.data() + t.size()) {
    throw FormatError(context + ": expected a number, found '" + token + "'");
  }
  return v;
}

int64_t ParseIntToken(const std::string& token, const std::string& context) {
  int64_t v = 0;
  const auto result =
      std::from_chars(token.data(), token.data() + token.size(), v);
  if (result.ec != std::errc() || result.ptr != token.data() + token.size()) {
    throw FormatError(context + ": expected an integer, found '" + token +
                      "'");
  }
  return v;
}

CameraIntrinsics ReadIntrinsics(const std::string& path) {
  std::map<std::string, double> values;
  for (const auto& [line, tokens] : ReadTokenLines(path)) {
    const std::string where = path + ":" + std::to_string(line);
    if (tokens.size() != 2) throw FormatError(where + ": expected 'key value'");
    values[tokens[0]] = ParseDoubleToken(tokens[1], where);
  }
  CameraIntrinsics k;
  for (const char* key : {"fx", "fy", "cx", "cy"}) {
    if (!values.contains(key)) {
      throw FormatError(path + ": missing '" + std::string(key) + "'");
    }
  }
  k.fx = values["fx"];
  k.fy = values["fy"];
  k.cx = values["cx"];
  k.cy = values["cy"];
  if (values.contains("baseline")) k.baseline = values["baseline"];
  k.Validate();
  return k;
}

void WriteIntrinsics(const std::string& path, const CameraIntrinsics& k) {
  std::ofstream out = OpenText(path);
  out << "fx " << FormatDouble(k.fx) << "\nfy " << FormatDouble(k.fy)
      << "\ncx " << FormatDouble(k.cx) << "\ncy " << FormatDouble(k.cy)
      << "\nbaseline " << FormatDouble(k.baseline) << '\n';
  CheckWritten(out, path);
}

Calibration ReadCalibration(const std::string& path) {
  Calibration cal;
  std::array<bool, 3> seen{};
  for (const auto& [line, tokens] : ReadTokenLines(path)) {
    const std::string where = path + ":" + std::to_string(line);
    if (tokens.size() != 3) {
      throw FormatError(where + ": expected '<channel> <low> <high>'");
    }
    int c = -1;
    for (int i = 0; i < 3; ++i) {
      if (tokens[0] == kHhaChannelNames[i]) c = i;
    }
    if (c < 0) throw FormatError(where + ": unknown channel " + tokens[0]);
    cal.low[c] = ParseDoubleToken(tokens[1], where);
    cal.high[c] = ParseDoubleToken(tokens[2], where);
    seen[c] = true;
  }
  for (int c = 0; c < 3; ++c) {
    if (!seen[c]) {
      throw FormatError(path + ": missing channel " +
                        std::string(kHhaChannelNames[c]));
    }
  }
  cal.Validate();
  return cal;
}

void WriteCalibration(const std::string& path, const Calibration& cal) {
  std::ofstream out = OpenText(path);
  out << "# channel low high\n";
  for (int c = 0; c < 3; ++c) {
    out << kHhaChannelNames[c] << ' ' << FormatDouble(cal.low[c]) << ' '
        << FormatDouble(cal.high[c]) << '\n';
  }
  CheckWritten(out, path);
}

std::vector<Detection> ReadDetections(const std::string& path) {
  std::vector<Detection> detections;
  for (const auto& [line, tokens] : ReadTokenLines(path)) {
    const std::string where = path + ":" + std::to_string(line);
    if (tokens.size() != 7) {
      throw FormatError(where +
                        ": expected 'image_id class_id score x0 y0 x1 y1'");
    }
    Detection d;
    d.image_id = tokens[0];
    d.class_id = static_cast<int>(ParseIntToken(tokens[1], where));
    d.score = ParseDoubleToken(tokens[2], where);
    d.box = Box{ParseDoubleToken(tokens[3], where),
                ParseDoubleToken(tokens[4], where),
                ParseDoubleToken(tokens[5], where),
                ParseDoubleToken(tokens[6], where)};
    if (!d.box.IsValid()) throw FormatError(where + ": empty box");
    detections.push_back(std::move(d));
  }
  return detections;
}

void WriteDetections(const std::string& path,
                     const std::vector<Detection>& detections) {
  std::ofstream out = OpenText(path);
  for (const auto& d : detections) {
    out << d.image_id << ' ' << d.class_id << ' ' << FormatDouble(d.score)
        << ' ' << FormatDouble(d.box.x0) << ' ' << FormatDouble(d.box.y0)
        << ' ' << FormatDouble(d.box.x1) << ' ' << FormatDouble(d.box.y1)
        << '\n';
  }
  CheckWritten(out, path);
}

std::vector<Region> ReadRegions(const std::string& path) {
  std::vector<Region> regions;
  for (const auto& [line, tokens] : ReadTokenLines(path)) {
    const std::string where = path + ":" + std::to_string(line);
    Region region;
    for (const auto& t : tokens) {
      const int64_t id = ParseIntToken(t, where);
      if (id < 0 || id > std::numeric_limits<int32_t>::max()) {
        throw FormatError(where + ": superpixel id out of range");
      }
      region.push_back(static_cast<int32_t>(id));
    }
    regions.push_back(std::move(region));
  }
  return regions;
}

void WriteRegions(const std::string& path, const std::vector<Region>& regions) {
  std::ofstream out = OpenText(path);
  for (const auto& region : regions) {
    for (size_t i = 0; i < region.size(); ++i) {
      out << (i ? " " : "") << region[i];
    }
    out << '\n';
  }
  CheckWritten(out, path);
}

std::vector<GroundTruthInstance> ReadGroundTruthInstances(
    const std::string& image_id, const std::string& instance_png,
    const std::string& class_table) {
  const Image<int32_t> ids = ReadLabelPng(instance_png);
  std::map<int32_t, int> classes;
  for (const auto& [line, tokens] : ReadTokenLines(class_table)) {
    const std::string where = class_table + ":" + std::to_string(line);
    if (tokens.size() != 2) {
      throw FormatError(where + ": expected 'instance_id class_id'");
    }
    const auto instance = static_cast<int32_t>(ParseIntToken(tokens[0], where));
    if (instance <= 0) throw FormatError(where + ": instance ids start at 1");
    if (!classes.emplace(instance, static_cast<int>(ParseIntToken(
                                       tokens[1], where)))
             .second) {
      throw FormatError(where + ": duplicate instance id");
    }
  }
  std::set<int32_t> present;
  for (const int32_t id : ids.pixels()) {
    if (id != 0) present.insert(id);
  }
  for (const int32_t id : present) {
    if (!classes.contains(id)) {
      throw FormatError(class_table + ": no class for instance " +
                        std::to_string(id) + " of " + instance_png);
    }
  }
  std::vector<GroundTruthInstance> out;
  for (const auto& [instance, class_id] : classes) {
    if (!present.contains(instance)) {
      throw FormatError(class_table + ": instance " + std::to_string(instance) +
                        " does not occur in " + instance_png);
    }
    Mask mask(ids.width(), ids.height(), 0);
    for (size_t i = 0; i < ids.size(); ++i) mask[i] = ids[i] == instance;
    out.push_back(GroundTruthInstance::FromMask(image_id, class_id, instance,
                                                std::move(mask)));
  }
  return out;
}

}  // namespace rgbdgeo
