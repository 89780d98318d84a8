#include "cxr_audit/bbox.hpp"

#include <algorithm>
#include <cmath>

namespace cxr_audit {

bool bbox::valid() const {
  const bool finite = std::isfinite(x_min) && std::isfinite(y_min) &&
                      std::isfinite(x_max) && std::isfinite(y_max);
  return finite && x_min >= 0 && y_min >= 0 && x_min < x_max && y_min < y_max;
}

double intersection_area(const bbox& a, const bbox& b) {
  const double w = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double h = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (w <= 0 || h <= 0) return 0.0;
  return w * h;
}

double iou(const bbox& a, const bbox& b) {
  const double inter = intersection_area(a, b);
  if (inter <= 0) return 0.0;
  const double uni = a.area() + b.area() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double containment(const bbox& small, const bbox& big) {
  const double area = small.area();
  if (area <= 0) return 0.0;
  return intersection_area(small, big) / area;
}

bbox mirrored(const bbox& box, double image_width) {
  return {image_width - box.x_max, box.y_min, image_width - box.x_min,
          box.y_max};
}

}  // namespace cxr_audit
