#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cxr_audit {

// Ids follow the class_id column of the public chest X-ray training table.
enum class class_label : std::uint8_t {
  aortic_enlargement = 0,
  atelectasis = 1,
  calcification = 2,
  cardiomegaly = 3,
  consolidation = 4,
  ild = 5,
  infiltration = 6,
  lung_opacity = 7,
  nodule_mass = 8,
  other_lesion = 9,
  pleural_effusion = 10,
  pleural_thickening = 11,
  pneumothorax = 12,
  pulmonary_fibrosis = 13,
  no_finding = 14,
};

inline constexpr int kNumLabels = 15;
inline constexpr int kNumLesionLabels = 14;

constexpr int label_id(class_label label) { return static_cast<int>(label); }
constexpr bool is_lesion(class_label label) {
  return label != class_label::no_finding;
}

std::string_view label_name(class_label label);

// Lowercase, alphanumerics kept, every other run collapsed to '-'.
std::string label_slug(class_label label);

// Accepts the canonical names plus "Other lesions" as an alias.
std::optional<class_label> label_from_name(std::string_view name);
std::optional<class_label> label_from_id(int id);

const std::array<class_label, kNumLabels>& all_labels();
const std::array<class_label, kNumLesionLabels>& lesion_labels();

using label_pair = std::pair<class_label, class_label>;

/// Label vocabulary plus the definitional overlaps between classes.
///
/// `overlap_pairs` holds unordered pairs (stored with the smaller id first).
/// `umbrella_map` maps a broad label onto the narrower labels it covers.
/// Neither may mention "No finding".
struct taxonomy {
  std::set<label_pair> overlap_pairs;
  std::map<class_label, std::set<class_label>> umbrella_map;

  // {ILD, Pulmonary fibrosis} and {Consolidation, Infiltration}; no umbrellas.
  static taxonomy default_taxonomy();

  void add_overlap(class_label a, class_label b);

  // Overlap pairs plus every umbrella -> covered pair, normalized and deduped.
  std::set<label_pair> flagged_pairs() const;

  // The label paired with `label` by an overlap pair, if any.
  std::optional<class_label> overlap_partner(class_label label) const;

  // Throws std::invalid_argument when an invariant is violated.
  void validate() const;
};

label_pair normalized_pair(class_label a, class_label b);

}  // namespace cxr_audit
