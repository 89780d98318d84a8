#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cxr_audit/annotations.hpp"
#include "cxr_audit/detection_eval.hpp"
#include "cxr_audit/dicom_meta.hpp"
#include "cxr_audit/fairness.hpp"
#include "cxr_audit/taxonomy.hpp"

namespace cxr_audit::synth {

enum class placement { symmetric, left_only, right_only, uniform };

std::string_view placement_name(placement p);

enum class prediction_mode { perfect, none };

struct parity_target {
  double ppv = 0;
  std::size_t predicted_positive = 100;
};

/// Plants exact image-level confusion counts for one class.
///
/// For each target subgroup, round(ppv * predicted_positive) images of the
/// subgroup carry the class (and get a prediction) and the remainder get a
/// false-positive prediction. The class is planted nowhere else.
struct parity_plant {
  class_label label = class_label::aortic_enlargement;
  subgroup_feature feature = subgroup_feature::age;
  std::map<std::string, parity_target> targets;
  double score = 0.9;
};

enum class corruption_kind { truncate, bad_magic, bad_syntax };

std::string_view corruption_name(corruption_kind k);

struct corruption {
  std::size_t image_index = 0;
  corruption_kind kind = corruption_kind::truncate;
};

/// Everything a synthetic corpus is generated from.
///
/// Rates are turned into exact counts: floor(rate * n) images per category,
/// the last category of each attribute taking the remainder.
struct corpus_spec {
  std::uint64_t seed = 1;
  std::size_t n_images = 100;

  // Age categories; valid adult takes the remainder.
  double age_missing_rate = 0;
  double age_malformed_rate = 0;
  double age_out_of_range_rate = 0;
  double child_rate = 0;
  double finding_mean_age = 55;
  double no_finding_mean_age = 45;
  double age_sd = 12;

  // Sex categories; female takes the remainder.
  double sex_missing_rate = 0;
  double sex_other_rate = 0;
  double sex_male_rate = 0.5;

  // Tag value -> share; the key "missing" omits the tag.
  std::map<std::string, double> photometric_mix = {{"MONOCHROME2", 1.0}};
  double explicit_vr_rate = 0.5;
  std::vector<std::pair<int, int>> image_sizes = {{2048, 2048}, {2500, 2048}, {3072, 2540}};

  std::size_t n_annotators = 17;
  std::size_t annotators_per_image = 3;
  double finding_rate = 0.3;
  double second_lesion_rate = 0.5;

  // Shares of finding images where the last annotator deviates.
  double dissent_rate = 0;      // says "No finding"
  double cross_label_rate = 0;  // relabels a lesion to its overlap partner
  double coarse_box_rate = 0;   // one box around a two-box lesion

  std::vector<class_label> lesion_classes;  // empty: all 14
  std::map<class_label, placement> placements;  // default symmetric
  prediction_mode predictions = prediction_mode::perfect;
  std::optional<parity_plant> parity;
  std::vector<corruption> corruptions;

  placement placement_of(class_label label) const;

  // Throws std::invalid_argument.
  void validate() const;

  static corpus_spec clean();
  static corpus_spec flawed_metadata();
  static corpus_spec parity_gap();
};

nlohmann::json to_json(const corpus_spec& spec);
// Unknown keys are rejected with std::invalid_argument.
corpus_spec spec_from_json(const nlohmann::json& j);
std::optional<corpus_spec> preset(std::string_view name);

struct dicom_file {
  std::string image_id;
  std::vector<std::uint8_t> bytes;
};

struct synthetic_corpus {
  std::vector<dicom_file> dicoms;
  std::vector<annotation_record> annotations;
  std::vector<prediction> predictions;
  nlohmann::json manifest;
};

// Pure function of the spec.
synthetic_corpus build_corpus(const corpus_spec& spec);

class output_not_writable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Writes dicom/<image_id>.dicom, annotations.csv, predictions.csv and
/// manifest.json under `out`. Returns the manifest.
nlohmann::json generate_corpus(const corpus_spec& spec, const std::filesystem::path& out);

inline constexpr std::uint16_t kPlaceholderPixelBytes = 16;

}  // namespace cxr_audit::synth
