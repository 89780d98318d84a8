#pragma once

#include <cstddef>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cxr_audit/annotations.hpp"
#include "cxr_audit/dicom_meta.hpp"
#include "cxr_audit/taxonomy.hpp"

namespace cxr_audit {

struct grid_size {
  int width = 64;
  int height = 64;
};

enum class deposit_mode {
  binary,         // +1 to every cell the box overlaps with positive area
  area_weighted,  // + covered fraction of each cell
};

class unknown_label_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Per-class box accumulation on a grid over the unit square.
///
/// cells are row-major with row 0 at the top of the image.
struct heatmap {
  class_label label = class_label::aortic_enlargement;
  int width = 0;
  int height = 0;
  std::vector<double> cells;
  std::size_t n_boxes = 0;
  std::size_t n_images_skipped = 0;  // had boxes of the label but no dimensions

  double at(int x, int y) const { return cells[static_cast<std::size_t>(y) * width + x]; }
  double& at(int x, int y) { return cells[static_cast<std::size_t>(y) * width + x]; }
  double total() const;
  double max() const;

  // Cell-wise sum; grids must share a size. Used to merge partial maps.
  heatmap& operator+=(const heatmap& other);
};

heatmap make_heatmap(class_label label, grid_size grid);

// Left-right reflection of the grid.
heatmap mirror(const heatmap& h);

/// Rasterizes one box given in pixel coordinates of an image `columns`
/// wide and `rows` tall. Coordinates are normalized per axis to the unit
/// square and clipped to it.
void deposit_box(heatmap& h, const bbox& box, double columns, double rows,
                 deposit_mode mode = deposit_mode::binary);

heatmap accumulate_heatmap(const image_index& index, const header_map& headers,
                           class_label label, grid_size grid = {},
                           deposit_mode mode = deposit_mode::binary);

// Looks the label up by name; throws unknown_label_error.
heatmap accumulate_heatmap(const image_index& index, const header_map& headers,
                           std::string_view label_name, grid_size grid = {},
                           deposit_mode mode = deposit_mode::binary);

struct symmetry_score {
  class_label label = class_label::aortic_enlargement;
  double score = 0;
  bool exempt = false;
};

// Default exemptions: labels lateralized by anatomy.
std::set<class_label> default_symmetry_exempt();

/// sum |H(x,y) - H(W-1-x,y)| / sum (H(x,y) + H(W-1-x,y)); 0 for an empty map.
symmetry_score score_symmetry(const heatmap& h,
                              const std::set<class_label>& exempt = default_symmetry_exempt());

inline constexpr double kDefaultAsymmetryThreshold = 0.25;

// Non-exempt lesion labels with score > threshold.
std::vector<class_label> asymmetry_flags(std::span<const symmetry_score> scores,
                                         double threshold = kDefaultAsymmetryThreshold);

// Binary PGM (P5), 8-bit; counts scaled linearly with the maximum at 255.
std::string render_pgm(const heatmap& h);

std::string heatmap_file_name(class_label label);

}  // namespace cxr_audit
