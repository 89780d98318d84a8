#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cxr_audit/annotations.hpp"
#include "cxr_audit/bbox.hpp"
#include "cxr_audit/taxonomy.hpp"

namespace cxr_audit {

inline constexpr double kDefaultMatchIou = 0.4;

struct prediction {
  std::string image_id;
  class_label label = class_label::aortic_enlargement;
  double score = 0;
  bbox box;

  friend bool operator==(const prediction&, const prediction&) = default;
};

enum class prediction_error_kind { malformed_row, unknown_class_name, invalid_label, invalid_score, invalid_box };

class prediction_error : public std::runtime_error {
 public:
  prediction_error(prediction_error_kind kind, std::size_t row, const std::string& detail);
  prediction_error_kind kind() const { return kind_; }
  std::size_t row() const { return row_; }

 private:
  prediction_error_kind kind_;
  std::size_t row_;
};

inline constexpr const char* kPredictionHeader =
    "image_id,class_name,score,x_min,y_min,x_max,y_max";

std::vector<prediction> parse_prediction_csv(std::istream& in);
std::string serialize_prediction_csv(std::span<const prediction> preds);

// Union of every annotator's boxes of `label`; duplicates are kept.
std::vector<bbox> pool_ground_truth(const image_annotations& image, class_label label);

struct match_outcome {
  // Indexed like the input predictions.
  std::vector<bool> is_tp;
  std::vector<std::optional<std::size_t>> matched_gt;
  std::vector<double> best_iou;  // IoU with the matched box, 0 for FPs
  // Indexed like the ground-truth pool.
  std::vector<std::optional<std::size_t>> gt_matched_by;

  std::size_t n_tp() const;
};

/// Greedy one-to-one matching for one image and one class.
///
/// Predictions are visited by descending score (ties: input order). Each
/// takes the unmatched ground-truth box of highest IoU among those with
/// IoU >= threshold (ties: lower pool index); with none it is a false
/// positive.
match_outcome match_detections(std::span<const prediction> preds,
                               std::span<const bbox> gt_pool,
                               double iou_threshold = kDefaultMatchIou);

struct scored_outcome {
  double score = 0;
  bool tp = false;
};

struct pr_point {
  double recall = 0;
  double precision = 0;
};

struct ap_result {
  class_label label = class_label::aortic_enlargement;
  std::vector<pr_point> curve;
  double ap = 0;
  std::size_t n_gt = 0;
  std::size_t n_predictions = 0;
  std::size_t n_tp = 0;

  // Neither ground truth nor predictions: excluded from the mean.
  bool evaluable() const { return n_gt > 0 || n_predictions > 0; }
};

/// All-points interpolated AP.
///
/// `outcomes` must already be in global rank order (descending score, ties
/// resolved by the caller). Precision at each recall is replaced by the
/// best precision at any recall at least as high, then integrated over
/// the recall increments.
ap_result average_precision(std::span<const scored_outcome> outcomes, std::size_t n_gt);

class no_evaluable_classes : public std::runtime_error {
 public:
  no_evaluable_classes() : std::runtime_error("NoEvaluableClasses: no class has ground truth or predictions") {}
};

// Unweighted mean over evaluable classes; the rest go to `excluded`.
double mean_ap(std::span<const ap_result> per_class,
               std::vector<class_label>* excluded = nullptr);

struct detection_result {
  double iou_threshold = kDefaultMatchIou;
  std::vector<ap_result> per_class;  // the 14 lesion classes, id order
  std::optional<double> map;
  std::vector<class_label> excluded;
};

// Per-class AP over the corpus. Predictions on images without ground truth
// of their class count as false positives.
ap_result evaluate_class(std::span<const prediction> preds, const image_index& index,
                         class_label label, double iou_threshold = kDefaultMatchIou);

detection_result evaluate_detections(std::span<const prediction> preds,
                                     const image_index& index,
                                     double iou_threshold = kDefaultMatchIou);

}  // namespace cxr_audit
