#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cxr_audit/annotations.hpp"
#include "cxr_audit/detection_eval.hpp"
#include "cxr_audit/dicom_meta.hpp"

namespace cxr_audit {

enum class subgroup_feature { age, sex };

std::string_view feature_name(subgroup_feature f);

enum class age_bin { missing, young, old };

inline constexpr int kNumAgeBins = 3;
inline constexpr int kDefaultAgeSplit = 50;

std::string_view age_bin_name(age_bin b);

// Valid age below `split` is young, at or above is old; every other
// validity (including out-of-range) is missing.
age_bin age_subgroup(const age_parse& age, int split = kDefaultAgeSplit);

struct subgroup_spec {
  int age_split = kDefaultAgeSplit;
};

// Subgroup names for a feature, in report order.
std::vector<std::string> subgroup_names(subgroup_feature feature);

// `header` may be null (no parsable header): every feature maps to missing.
std::string subgroup_assign(const dicom_header* header, subgroup_feature feature,
                            const subgroup_spec& spec = {});

struct image_outcome {
  std::string image_id;
  bool predicted = false;
  bool actual = false;
};

/// Image-level presence test for one class.
///
/// predicted: some prediction of `label` on the image scores >= threshold.
/// actual: some annotator assigned `label`. One entry per indexed image,
/// in image_id order; predictions on unindexed images are ignored.
std::vector<image_outcome> binarize_image_level(std::span<const prediction> preds,
                                                const image_index& index,
                                                class_label label,
                                                double score_threshold);

struct confusion_counts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t support() const { return tp + fp + tn + fn; }
  friend bool operator==(const confusion_counts&, const confusion_counts&) = default;
};

enum class parity_metric { ppv, tpr, fpr, positive_rate };

inline constexpr std::array<parity_metric, 4> kParityMetrics = {
    parity_metric::ppv, parity_metric::tpr, parity_metric::fpr,
    parity_metric::positive_rate};

std::string_view metric_name(parity_metric m);

struct ratio {
  std::size_t numerator = 0;
  std::size_t denominator = 0;
  // Absent when the denominator is zero.
  std::optional<double> value() const;
};

struct subgroup_metrics {
  confusion_counts counts;

  ratio ppv() const { return {counts.tp, counts.tp + counts.fp}; }
  ratio tpr() const { return {counts.tp, counts.tp + counts.fn}; }
  ratio fpr() const { return {counts.fp, counts.fp + counts.tn}; }
  ratio positive_rate() const { return {counts.tp + counts.fp, counts.support()}; }
  ratio metric(parity_metric m) const;
};

struct metric_gap {
  parity_metric metric = parity_metric::ppv;
  std::optional<double> gap;  // absent with fewer than two qualifying groups
  std::string low_group;
  std::string high_group;
  double low_value = 0;
  double high_value = 0;
  std::size_t n_qualifying = 0;
};

struct feature_parity {
  subgroup_feature feature = subgroup_feature::age;
  std::map<std::string, subgroup_metrics> subgroups;
  std::vector<metric_gap> gaps;  // one per parity_metric
};

struct class_parity {
  class_label label = class_label::aortic_enlargement;
  std::vector<feature_parity> features;
};

struct parity_report {
  double score_threshold = 0.5;
  std::size_t min_support = 30;
  std::vector<class_parity> classes;
};

/// Confusion-derived metrics per subgroup of one feature.
///
/// `subgroup_of` maps image_id to subgroup name; every outcome's image must
/// be present. All subgroups of the feature appear, empty ones included.
/// Gaps are taken over subgroups with support >= min_support whose metric
/// is defined.
feature_parity parity_metrics(std::span<const image_outcome> outcomes,
                              const std::map<std::string, std::string>& subgroup_of,
                              subgroup_feature feature, std::size_t min_support);

// Runs binarization + parity for every lesion class over both features.
parity_report audit_fairness(std::span<const prediction> preds,
                             const image_index& index, const header_map& headers,
                             double score_threshold, std::size_t min_support,
                             const subgroup_spec& spec = {});

struct parity_flag {
  class_label label = class_label::aortic_enlargement;
  subgroup_feature feature = subgroup_feature::age;
  parity_metric metric = parity_metric::ppv;
  double gap = 0;
  std::string low_group;
  double low_value = 0;
  std::string high_group;
  double high_value = 0;
};

// Flags every (class, feature, metric) whose qualifying gap exceeds
// gap_threshold. Gaps are recomputed at `min_support`.
std::vector<parity_flag> parity_flags(const parity_report& report,
                                      double gap_threshold, std::size_t min_support);

}  // namespace cxr_audit
