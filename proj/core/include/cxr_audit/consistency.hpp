#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cxr_audit/annotations.hpp"
#include "cxr_audit/dicom_meta.hpp"
#include "cxr_audit/fairness.hpp"
#include "cxr_audit/taxonomy.hpp"

namespace cxr_audit {

class consistency_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Workload

/// Image counts for one annotator, cross-tabulated finding x sex x age bin.
struct workload_counts {
  std::size_t total = 0;
  // [finding (1) / no finding (0)][sex_category][age_bin]
  std::array<std::array<std::array<std::size_t, kNumAgeBins>, kNumSexCategories>, 2> cube{};

  std::size_t finding() const;
  std::size_t no_finding() const;
  std::size_t by_sex(sex_category s) const;
  std::size_t by_age(age_bin b) const;

  friend bool operator==(const workload_counts&, const workload_counts&) = default;
};

using workload_summary = std::map<std::string, workload_counts>;

// Images without a header land in the missing sex and age bins.
workload_summary compute_workload(const image_index& index, const header_map& headers,
                                  int age_split = kDefaultAgeSplit);

// ---------------------------------------------------------------------------
// Label-set agreement

struct agreement_rates {
  std::string rad_id;
  std::size_t n_images = 0;
  std::size_t n_at_least_one = 0;
  std::size_t n_both_all = 0;

  std::optional<double> at_least_one() const;
  std::optional<double> both_all() const;
};

struct group_agreement {
  std::string group;
  std::vector<std::string> members;
  std::size_t n_images = 0;
  std::size_t n_at_least_one = 0;
  std::size_t n_both_all = 0;

  // Image-weighted: pooled counts over all members.
  std::optional<double> at_least_one() const;
  std::optional<double> both_all() const;
};

struct agreement_result {
  std::vector<agreement_rates> per_rad;  // rad_id order
  std::vector<group_agreement> groups;   // group name order
};

/// Two annotators agree on an image when their label sets are equal.
///
/// For annotator r: at_least_one counts images where some co-annotator
/// agrees with r, both_all where every co-annotator does. Images r
/// annotated alone count under both. `groups` maps rad_id to group name;
/// naming a rad_id absent from the index throws consistency_error.
agreement_result compute_agreement(const image_index& index,
                                   const std::map<std::string, std::string>& groups = {});

// ---------------------------------------------------------------------------
// Cross-class co-location

inline constexpr double kDefaultColocationIou = 0.5;

struct overlap_pair_stats {
  class_label a;
  class_label b;
  std::size_t events = 0;  // either orientation
  double iou_sum = 0;
  std::optional<double> mean_iou() const;
};

struct cooccurrence_result {
  double colocation_iou = kDefaultColocationIou;
  // directed[c1][c2]: annotator earlier in rad_id order marked c1, later one c2.
  std::array<std::array<std::size_t, kNumLabels>, kNumLabels> directed{};
  std::vector<overlap_pair_stats> flagged;  // one per taxonomy flagged pair

  std::array<std::array<std::size_t, kNumLabels>, kNumLabels> symmetrized() const;
  std::size_t total_events() const;
};

/// Counts co-located boxes of different classes drawn by different
/// annotators on the same image (IoU >= colocation_iou), and reports mean
/// IoU for the taxonomy's overlap and umbrella pairs.
cooccurrence_result class_cooccurrence(const image_index& index, const taxonomy& tax,
                                       double colocation_iou = kDefaultColocationIou);

// ---------------------------------------------------------------------------
// Box granularity

inline constexpr double kDefaultContainment = 0.9;

struct granularity_conflict {
  std::string image_id;
  class_label label;
  std::string coarse_rad;
  std::string fine_rad;
  bbox coarse_box;
  std::vector<bbox> contained_boxes;
};

// One annotator's box containing >= 2 same-class boxes of another annotator
// (containment >= threshold each). Sorted by image, label, coarse, fine.
std::vector<granularity_conflict> granularity_conflicts(
    const image_index& index, double containment_threshold = kDefaultContainment);

// ---------------------------------------------------------------------------
// "No finding" review sample

struct review_worksheet {
  std::uint64_t seed = 0;
  std::size_t n_per_rad = 0;
  std::map<std::string, std::vector<std::string>> samples;  // sorted ids

  // rad_id,image_id,verdict,notes with blank verdict and notes.
  std::string to_csv() const;
};

inline constexpr const char* kReviewHeader = "rad_id,image_id,verdict,notes";

/// Per annotator, a seeded uniform sample without replacement of
/// min(n_per_rad, available) images they labeled "No finding".
review_worksheet sample_no_finding_review(const image_index& index, std::size_t n_per_rad,
                                          std::uint64_t seed);

}  // namespace cxr_audit
