#pragma once

namespace cxr_audit {

/// Axis-aligned box in pixel coordinates, origin top-left.
struct bbox {
  double x_min = 0;
  double y_min = 0;
  double x_max = 0;
  double y_max = 0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }

  // Finite, non-negative, with positive extent on both axes.
  bool valid() const;

  friend bool operator==(const bbox&, const bbox&) = default;
  friend auto operator<=>(const bbox&, const bbox&) = default;
};

double intersection_area(const bbox& a, const bbox& b);

// Intersection over union. Disjoint or edge-touching boxes give 0.
double iou(const bbox& a, const bbox& b);

// area(small ∩ big) / area(small).
double containment(const bbox& small, const bbox& big);

// Reflection about the vertical midline of an image `image_width` wide.
bbox mirrored(const bbox& box, double image_width);

}  // namespace cxr_audit
