#include "cxr_audit/taxonomy.hpp"

#include <cctype>
#include <stdexcept>

namespace cxr_audit {
namespace {

constexpr std::array<std::string_view, kNumLabels> kNames = {
    "Aortic enlargement", "Atelectasis",        "Calcification",
    "Cardiomegaly",       "Consolidation",      "ILD",
    "Infiltration",       "Lung Opacity",       "Nodule/Mass",
    "Other lesion",       "Pleural effusion",   "Pleural thickening",
    "Pneumothorax",       "Pulmonary fibrosis", "No finding",
};

}  // namespace

std::string_view label_name(class_label label) {
  return kNames[static_cast<std::size_t>(label)];
}

std::string label_slug(class_label label) {
  std::string slug;
  bool pending_dash = false;
  for (char c : label_name(label)) {
    const auto uc = static_cast<unsigned char>(c);
    if (std::isalnum(uc)) {
      if (pending_dash && !slug.empty()) slug.push_back('-');
      pending_dash = false;
      slug.push_back(static_cast<char>(std::tolower(uc)));
    } else {
      pending_dash = true;
    }
  }
  return slug;
}

std::optional<class_label> label_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name) return static_cast<class_label>(i);
  }
  if (name == "Other lesions") return class_label::other_lesion;
  return std::nullopt;
}

std::optional<class_label> label_from_id(int id) {
  if (id < 0 || id >= kNumLabels) return std::nullopt;
  return static_cast<class_label>(id);
}

const std::array<class_label, kNumLabels>& all_labels() {
  static const auto labels = [] {
    std::array<class_label, kNumLabels> out{};
    for (int i = 0; i < kNumLabels; ++i) out[i] = static_cast<class_label>(i);
    return out;
  }();
  return labels;
}

const std::array<class_label, kNumLesionLabels>& lesion_labels() {
  static const auto labels = [] {
    std::array<class_label, kNumLesionLabels> out{};
    for (int i = 0; i < kNumLesionLabels; ++i)
      out[i] = static_cast<class_label>(i);
    return out;
  }();
  return labels;
}

label_pair normalized_pair(class_label a, class_label b) {
  return label_id(a) <= label_id(b) ? label_pair{a, b} : label_pair{b, a};
}

taxonomy taxonomy::default_taxonomy() {
  taxonomy t;
  t.add_overlap(class_label::ild, class_label::pulmonary_fibrosis);
  t.add_overlap(class_label::consolidation, class_label::infiltration);
  return t;
}

void taxonomy::add_overlap(class_label a, class_label b) {
  overlap_pairs.insert(normalized_pair(a, b));
}

std::set<label_pair> taxonomy::flagged_pairs() const {
  std::set<label_pair> out = overlap_pairs;
  for (const auto& [umbrella, covered] : umbrella_map) {
    for (class_label c : covered) out.insert(normalized_pair(umbrella, c));
  }
  return out;
}

std::optional<class_label> taxonomy::overlap_partner(class_label label) const {
  for (const auto& [a, b] : overlap_pairs) {
    if (a == label) return b;
    if (b == label) return a;
  }
  return std::nullopt;
}

void taxonomy::validate() const {
  for (const auto& [a, b] : overlap_pairs) {
    if (!is_lesion(a) || !is_lesion(b))
      throw std::invalid_argument("overlap pair may not reference 'No finding'");
    if (a == b)
      throw std::invalid_argument("overlap pair must name two distinct labels");
  }
  for (const auto& [umbrella, covered] : umbrella_map) {
    if (!is_lesion(umbrella))
      throw std::invalid_argument("umbrella label may not be 'No finding'");
    for (class_label c : covered) {
      if (!is_lesion(c))
        throw std::invalid_argument("umbrella may not cover 'No finding'");
      if (c == umbrella)
        throw std::invalid_argument("umbrella label may not cover itself");
    }
  }
}

}  // namespace cxr_audit
