#include "cxr_audit/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cxr_audit {

double heatmap::total() const { return std::accumulate(cells.begin(), cells.end(), 0.0); }

double heatmap::max() const {
  return cells.empty() ? 0.0 : *std::max_element(cells.begin(), cells.end());
}

heatmap& heatmap::operator+=(const heatmap& other) {
  if (other.width != width || other.height != height) {
    throw std::invalid_argument("heatmap grid sizes differ");
  }
  for (std::size_t i = 0; i < cells.size(); ++i) cells[i] += other.cells[i];
  n_boxes += other.n_boxes;
  n_images_skipped += other.n_images_skipped;
  return *this;
}

heatmap make_heatmap(class_label label, grid_size grid) {
  if (grid.width < 1 || grid.height < 1) throw std::invalid_argument("grid must be at least 1x1");
  heatmap h;
  h.label = label;
  h.width = grid.width;
  h.height = grid.height;
  h.cells.assign(static_cast<std::size_t>(grid.width) * grid.height, 0.0);
  return h;
}

heatmap mirror(const heatmap& h) {
  heatmap m = h;
  for (int y = 0; y < h.height; ++y)
    for (int x = 0; x < h.width; ++x) m.at(x, y) = h.at(h.width - 1 - x, y);
  return m;
}

namespace {

// Cells [first, last] along one axis whose interval [i, i+1)/n overlaps
// (lo, hi)/extent with positive length. Comparisons are cross-multiplied
// so integer-valued boxes rasterize exactly.
bool cell_range(double lo, double hi, double extent, int n, int& first, int& last) {
  lo = std::clamp(lo, 0.0, extent);
  hi = std::clamp(hi, 0.0, extent);
  if (!(hi > lo)) return false;
  const double scaled_lo = lo * n;
  const double scaled_hi = hi * n;
  first = static_cast<int>(std::floor(scaled_lo / extent));
  last = static_cast<int>(std::ceil(scaled_hi / extent)) - 1;
  first = std::clamp(first, 0, n - 1);
  last = std::clamp(last, 0, n - 1);
  // Tighten against rounding in the divisions above.
  while (first < n - 1 && !((first + 1) * extent > scaled_lo)) ++first;
  while (first > 0 && first * extent > scaled_lo) --first;
  while (last > 0 && !(scaled_hi > last * extent)) --last;
  while (last < n - 1 && scaled_hi > (last + 1) * extent) ++last;
  return first <= last;
}

double overlap_fraction(double lo, double hi, double extent, int n, int i) {
  const double cell_lo = extent * i / n;
  const double cell_hi = extent * (i + 1) / n;
  const double len = std::min(hi, cell_hi) - std::max(lo, cell_lo);
  return len > 0 ? len / (extent / n) : 0.0;
}

}  // namespace

void deposit_box(heatmap& h, const bbox& box, double columns, double rows, deposit_mode mode) {
  int x0, x1, y0, y1;
  if (!cell_range(box.x_min, box.x_max, columns, h.width, x0, x1)) return;
  if (!cell_range(box.y_min, box.y_max, rows, h.height, y0, y1)) return;
  ++h.n_boxes;
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      if (mode == deposit_mode::binary) {
        h.at(x, y) += 1.0;
      } else {
        h.at(x, y) += overlap_fraction(box.x_min, box.x_max, columns, h.width, x) *
                      overlap_fraction(box.y_min, box.y_max, rows, h.height, y);
      }
    }
  }
}

heatmap accumulate_heatmap(const image_index& index, const header_map& headers,
                           class_label label, grid_size grid, deposit_mode mode) {
  heatmap h = make_heatmap(label, grid);
  for (const auto& [id, image] : index) {
    std::vector<bbox> boxes;
    for (const auto& [rad, marks] : image.by_annotator)
      for (const auto& lb : marks.boxes)
        if (lb.label == label) boxes.push_back(lb.box);
    if (boxes.empty()) continue;
    const auto it = headers.find(id);
    if (it == headers.end() || !it->second.rows || !it->second.columns) {
      ++h.n_images_skipped;
      continue;
    }
    for (const auto& b : boxes) {
      deposit_box(h, b, *it->second.columns, *it->second.rows, mode);
    }
  }
  return h;
}

heatmap accumulate_heatmap(const image_index& index, const header_map& headers,
                           std::string_view name, grid_size grid, deposit_mode mode) {
  const auto label = label_from_name(name);
  if (!label) throw unknown_label_error("UnknownLabel: '" + std::string(name) + "'");
  return accumulate_heatmap(index, headers, *label, grid, mode);
}

std::set<class_label> default_symmetry_exempt() {
  return {class_label::aortic_enlargement, class_label::cardiomegaly};
}

symmetry_score score_symmetry(const heatmap& h, const std::set<class_label>& exempt) {
  double num = 0;
  double den = 0;
  for (int y = 0; y < h.height; ++y) {
    for (int x = 0; x < h.width; ++x) {
      const double a = h.at(x, y);
      const double b = h.at(h.width - 1 - x, y);
      num += std::abs(a - b);
      den += a + b;
    }
  }
  return {h.label, den > 0 ? num / den : 0.0, exempt.count(h.label) > 0};
}

std::vector<class_label> asymmetry_flags(std::span<const symmetry_score> scores,
                                         double threshold) {
  std::vector<class_label> out;
  for (const auto& s : scores) {
    if (s.exempt || !is_lesion(s.label)) continue;
    if (s.score > threshold) out.push_back(s.label);
  }
  return out;
}

std::string render_pgm(const heatmap& h) {
  std::string out = "P5\n" + std::to_string(h.width) + " " + std::to_string(h.height) + "\n255\n";
  const double peak = h.max();
  out.reserve(out.size() + h.cells.size());
  for (double v : h.cells) {
    const double scaled = peak > 0 ? std::round(v / peak * 255.0) : 0.0;
    out.push_back(static_cast<char>(static_cast<unsigned char>(std::clamp(scaled, 0.0, 255.0))));
  }
  return out;
}

std::string heatmap_file_name(class_label label) {
  return "heatmap_" + label_slug(label) + ".pgm";
}

}  // namespace cxr_audit
