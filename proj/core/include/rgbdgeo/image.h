#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rgbdgeo/errors.h"

namespace rgbdgeo {

// Dense row-major single-channel image. Pixel (x, y) is column x, row y.
template <typename T>
class Image {
 public:
  Image() = default;
  Image(int width, int height, T fill = T{})
      : width_(width), height_(height) {
    if (width < 0 || height < 0) {
      throw DimensionError("negative image dimensions");
    }
    data_.assign(static_cast<size_t>(width) * static_cast<size_t>(height),
                 fill);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  bool InBounds(int x, int y) const {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }
  size_t Index(int x, int y) const {
    return static_cast<size_t>(y) * static_cast<size_t>(width_) +
           static_cast<size_t>(x);
  }

  T& operator()(int x, int y) { return data_[Index(x, y)]; }
  const T& operator()(int x, int y) const { return data_[Index(x, y)]; }
  T& operator[](size_t i) { return data_[i]; }
  const T& operator[](size_t i) const { return data_[i]; }

  std::span<T> pixels() { return data_; }
  std::span<const T> pixels() const { return data_; }

  template <typename U>
  bool SameShape(const Image<U>& other) const {
    return width_ == other.width() && height_ == other.height();
  }

  bool operator==(const Image& other) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

// Nonzero = valid.
using Mask = Image<uint8_t>;

// A per-pixel real-valued quantity paired with its validity mask. Used for
// disparity, height above ground, angle with gravity and similar channels.
struct ScalarMap {
  Image<double> values;
  Mask valid;

  ScalarMap() = default;
  ScalarMap(int width, int height)
      : values(width, height, 0.0), valid(width, height, 0) {}

  int width() const { return values.width(); }
  int height() const { return values.height(); }
  bool IsValid(int x, int y) const { return valid(x, y) != 0; }
};

template <typename A, typename B>
void RequireSameShape(const Image<A>& a, const Image<B>& b,
                      const std::string& context) {
  if (!a.SameShape(b)) {
    throw DimensionError(context + ": image dimensions differ (" +
                         std::to_string(a.width()) + "x" +
                         std::to_string(a.height()) + " vs " +
                         std::to_string(b.width()) + "x" +
                         std::to_string(b.height()) + ")");
  }
}

}  // namespace rgbdgeo
