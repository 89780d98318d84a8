#include "cxr_audit/annotations.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "cxr_audit/csv.hpp"

namespace cxr_audit {
namespace {

constexpr std::size_t kColumns = 8;

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

[[noreturn]] void fail(annotation_error_kind kind, std::size_t row,
                       const std::string& detail) {
  throw annotation_error(kind, row, detail);
}

}  // namespace

std::string_view annotation_error_name(annotation_error_kind kind) {
  switch (kind) {
    case annotation_error_kind::unknown_class_name: return "UnknownClassName";
    case annotation_error_kind::class_id_mismatch: return "ClassIdMismatch";
    case annotation_error_kind::invalid_box: return "InvalidBox";
    case annotation_error_kind::box_on_no_finding: return "BoxOnNoFinding";
    case annotation_error_kind::malformed_row: return "MalformedRow";
    case annotation_error_kind::mixed_no_finding: return "MixedNoFinding";
  }
  return "Unknown";
}

annotation_error::annotation_error(annotation_error_kind kind, std::size_t row,
                                   const std::string& detail)
    : std::runtime_error(std::string(annotation_error_name(kind)) +
                         (row ? " at row " + std::to_string(row) : std::string()) +
                         ": " + detail),
      kind_(kind),
      row_(row) {}

std::vector<annotation_record> parse_annotation_csv(std::istream& in) {
  csv::line_reader reader(in);
  const auto header = reader.next();
  if (!header) fail(annotation_error_kind::malformed_row, 1, "empty input, expected header");
  {
    const auto fields = csv::split_record(*header);
    if (!fields || csv::join_record(*fields) != kAnnotationHeader) {
      fail(annotation_error_kind::malformed_row, 1,
           std::string("expected header '") + kAnnotationHeader + "'");
    }
  }

  std::vector<annotation_record> records;
  while (const auto line = reader.next()) {
    const std::size_t row = reader.line_number();
    if (csv::trim(*line).empty()) continue;
    const auto fields = csv::split_record(*line);
    if (!fields) fail(annotation_error_kind::malformed_row, row, "unbalanced quotes");
    if (fields->size() != kColumns) {
      fail(annotation_error_kind::malformed_row, row,
           "expected 8 fields, got " + std::to_string(fields->size()));
    }
    const auto& f = *fields;
    annotation_record rec;
    rec.image_id = std::string(csv::trim(f[0]));
    rec.rad_id = std::string(csv::trim(f[3]));
    if (rec.image_id.empty()) fail(annotation_error_kind::malformed_row, row, "empty image_id");
    if (rec.rad_id.empty()) fail(annotation_error_kind::malformed_row, row, "empty rad_id");

    const auto label = label_from_name(csv::trim(f[1]));
    if (!label) {
      fail(annotation_error_kind::unknown_class_name, row,
           "unknown class '" + f[1] + "'");
    }
    rec.label = *label;
    if (!csv::trim(f[2]).empty()) {
      const auto id = csv::parse_int(f[2]);
      if (!id) fail(annotation_error_kind::malformed_row, row, "class_id '" + f[2] + "' is not an integer");
      if (*id != label_id(*label)) {
        fail(annotation_error_kind::class_id_mismatch, row,
             "class '" + f[1] + "' has id " + std::to_string(label_id(*label)) +
                 ", row says " + f[2]);
      }
    }

    std::size_t missing = 0;
    std::array<double, 4> coords{};
    for (std::size_t k = 0; k < 4; ++k) {
      const std::string& text = f[4 + k];
      if (csv::is_missing_number(text)) {
        ++missing;
        continue;
      }
      const auto v = csv::parse_double(text);
      if (!v) fail(annotation_error_kind::malformed_row, row, "coordinate '" + text + "' is not a number");
      coords[k] = *v;
    }

    if (rec.label == class_label::no_finding) {
      if (missing != 4) {
        fail(annotation_error_kind::box_on_no_finding, row,
             "'No finding' row carries coordinates");
      }
    } else {
      if (missing != 0) {
        fail(annotation_error_kind::invalid_box, row,
             std::string(label_name(rec.label)) + " row lacks coordinates");
      }
      const bbox box{coords[0], coords[1], coords[2], coords[3]};
      if (!box.valid()) {
        fail(annotation_error_kind::invalid_box, row,
             "box (" + f[4] + "," + f[5] + "," + f[6] + "," + f[7] +
                 ") needs 0 <= min < max on both axes");
      }
      rec.box = box;
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::string serialize_annotation_csv(std::span<const annotation_record> records) {
  std::string out = kAnnotationHeader;
  out.push_back('\n');
  for (const auto& rec : records) {
    std::vector<std::string> fields = {rec.image_id, std::string(label_name(rec.label)),
                                       std::to_string(label_id(rec.label)), rec.rad_id};
    if (rec.box) {
      fields.push_back(format_number(rec.box->x_min));
      fields.push_back(format_number(rec.box->y_min));
      fields.push_back(format_number(rec.box->x_max));
      fields.push_back(format_number(rec.box->y_max));
    } else {
      fields.insert(fields.end(), 4, std::string());
    }
    out += csv::join_record(fields);
    out.push_back('\n');
  }
  return out;
}

bool annotator_marks::has_lesion() const {
  return std::any_of(labels.begin(), labels.end(), is_lesion);
}

std::vector<std::string> image_annotations::annotators() const {
  std::vector<std::string> out;
  out.reserve(by_annotator.size());
  for (const auto& [rad, marks] : by_annotator) out.push_back(rad);
  return out;
}

bool image_annotations::any_lesion() const {
  return std::any_of(by_annotator.begin(), by_annotator.end(),
                     [](const auto& kv) { return kv.second.has_lesion(); });
}

bool image_annotations::any_label(class_label label) const {
  return std::any_of(by_annotator.begin(), by_annotator.end(),
                     [&](const auto& kv) { return kv.second.labels.count(label) > 0; });
}

std::size_t image_annotations::record_count() const {
  std::size_t n = 0;
  for (const auto& [rad, marks] : by_annotator) n += marks.n_records;
  return n;
}

image_index build_image_index(std::span<const annotation_record> records) {
  image_index index;
  for (const auto& rec : records) {
    auto& image = index[rec.image_id];
    image.image_id = rec.image_id;
    auto& marks = image.by_annotator[rec.rad_id];
    marks.labels.insert(rec.label);
    if (rec.box) marks.boxes.push_back({rec.label, *rec.box});
    ++marks.n_records;
  }
  for (auto& [id, image] : index) {
    for (auto& [rad, marks] : image.by_annotator) {
      if (marks.is_no_finding() && marks.labels.size() > 1) {
        throw annotation_error(annotation_error_kind::mixed_no_finding, 0,
                               "annotator " + rad + " gives image " + id +
                                   " both 'No finding' and a lesion label");
      }
      std::sort(marks.boxes.begin(), marks.boxes.end());
    }
  }
  return index;
}

}  // namespace cxr_audit
