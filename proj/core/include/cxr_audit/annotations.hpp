#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cxr_audit/bbox.hpp"
#include "cxr_audit/taxonomy.hpp"

namespace cxr_audit {

/// One annotator's label (and box, for lesions) on one image.
struct annotation_record {
  std::string image_id;
  std::string rad_id;
  class_label label = class_label::no_finding;
  std::optional<bbox> box;

  friend bool operator==(const annotation_record&, const annotation_record&) = default;
};

enum class annotation_error_kind {
  unknown_class_name,
  class_id_mismatch,
  invalid_box,
  box_on_no_finding,
  malformed_row,
  mixed_no_finding,
};

std::string_view annotation_error_name(annotation_error_kind kind);

class annotation_error : public std::runtime_error {
 public:
  // `row` is the 1-based line number in the source table (header = line 1);
  // 0 when the error is not tied to a row.
  annotation_error(annotation_error_kind kind, std::size_t row,
                   const std::string& detail);

  annotation_error_kind kind() const { return kind_; }
  std::size_t row() const { return row_; }

 private:
  annotation_error_kind kind_;
  std::size_t row_;
};

inline constexpr const char* kAnnotationHeader =
    "image_id,class_name,class_id,rad_id,x_min,y_min,x_max,y_max";

// Strict: the first bad row aborts with annotation_error.
std::vector<annotation_record> parse_annotation_csv(std::istream& in);

// Writes the table parse_annotation_csv reads; coordinates in shortest
// round-trip form, "No finding" rows with empty coordinates.
std::string serialize_annotation_csv(std::span<const annotation_record> records);

struct labeled_box {
  class_label label;
  bbox box;

  friend bool operator==(const labeled_box&, const labeled_box&) = default;
  friend auto operator<=>(const labeled_box&, const labeled_box&) = default;
};

struct annotator_marks {
  std::set<class_label> labels;
  std::vector<labeled_box> boxes;  // sorted
  std::size_t n_records = 0;

  bool has_lesion() const;
  bool is_no_finding() const { return labels.count(class_label::no_finding) > 0; }

  friend bool operator==(const annotator_marks&, const annotator_marks&) = default;
};

/// Every annotator's marks on one image, keyed (and thus ordered) by rad_id.
struct image_annotations {
  std::string image_id;
  std::map<std::string, annotator_marks> by_annotator;

  std::vector<std::string> annotators() const;
  // True when any annotator assigned any lesion label.
  bool any_lesion() const;
  // True when any annotator assigned `label`.
  bool any_label(class_label label) const;
  std::size_t record_count() const;

  friend bool operator==(const image_annotations&, const image_annotations&) = default;
};

using image_index = std::map<std::string, image_annotations>;

// Groups records per image and annotator. Independent of input order.
// Throws annotation_error(mixed_no_finding) when an annotator pairs
// "No finding" with a lesion on the same image.
image_index build_image_index(std::span<const annotation_record> records);

}  // namespace cxr_audit
