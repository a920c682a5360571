#include "rgbdgeo/box.h"

#include <algorithm>
#include <numeric>
#include <tuple>

namespace rgbdgeo {

double Box::Area() const {
  return IsValid() ? (x1 - x0) * (y1 - y0) : 0.0;
}

bool Box::Intersects(int image_width, int image_height) const {
  return IsValid() && x0 < image_width && y0 < image_height && x1 > 0.0 &&
         y1 > 0.0;
}

double BoxIoU(const Box& a, const Box& b) {
  const double iw = std::min(a.x1, b.x1) - std::max(a.x0, b.x0);
  const double ih = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
  const double inter = (iw > 0.0 && ih > 0.0) ? iw * ih : 0.0;
  const double uni = a.Area() + b.Area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

Box TightBox(const Mask& mask) {
  int x0 = mask.width();
  int y0 = mask.height();
  int x1 = -1;
  int y1 = -1;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask(x, y)) continue;
      x0 = std::min(x0, x);
      y0 = std::min(y0, y);
      x1 = std::max(x1, x);
      y1 = std::max(y1, y);
    }
  }
  if (x1 < 0) return Box{};
  return Box{static_cast<double>(x0), static_cast<double>(y0),
             static_cast<double>(x1 + 1), static_cast<double>(y1 + 1)};
}

double MaskIoU(const Mask& a, const Mask& b) {
  RequireSameShape(a, b, "mask_iou");
  int64_t inter = 0;
  int64_t uni = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    const bool pa = a[i] != 0;
    const bool pb = b[i] != 0;
    inter += pa && pb;
    uni += pa || pb;
  }
  return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

bool DetectionRanksBefore(const Detection& a, const Detection& b) {
  if (a.score != b.score) return a.score > b.score;
  return std::tie(a.image_id, a.box.x0, a.box.y0, a.box.x1, a.box.y1,
                  a.class_id) < std::tie(b.image_id, b.box.x0, b.box.y0,
                                         b.box.x1, b.box.y1, b.class_id);
}

std::vector<size_t> RankDetections(const std::vector<Detection>& detections) {
  std::vector<size_t> order(detections.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t i, size_t j) {
    return DetectionRanksBefore(detections[i], detections[j]);
  });
  return order;
}

}  // namespace rgbdgeo
