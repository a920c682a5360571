#pragma once

#include <string>
#include <vector>

#include "rgbdgeo/image.h"

namespace rgbdgeo {

// Axis-aligned box in pixel coordinates, [x0, x1) x [y0, y1).
struct Box {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double Area() const;
  bool IsValid() const { return x0 < x1 && y0 < y1; }
  bool Intersects(int image_width, int image_height) const;

  bool operator==(const Box&) const = default;
};

// Intersection area over union area; 0 when the union is empty.
double BoxIoU(const Box& a, const Box& b);

// Tight box around the nonzero pixels of a mask; an empty mask yields an
// invalid (zero) box.
Box TightBox(const Mask& mask);

// Pixel IoU of two binary masks of the same shape; 0 when both are empty.
double MaskIoU(const Mask& a, const Mask& b);

struct Detection {
  std::string image_id;
  int class_id = 0;
  double score = 0.0;
  Box box;

  bool operator==(const Detection&) const = default;
};

// Strict ordering by descending score; equal scores fall back to
// (image id, x0, y0, x1, y1, class id) ascending.
bool DetectionRanksBefore(const Detection& a, const Detection& b);

// Indices of `detections` in ranking order.
std::vector<size_t> RankDetections(const std::vector<Detection>& detections);

}  // namespace rgbdgeo
