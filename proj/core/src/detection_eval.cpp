#include "cxr_audit/detection_eval.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>

#include "cxr_audit/csv.hpp"

namespace cxr_audit {
namespace {

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string_view prediction_error_name(prediction_error_kind kind) {
  switch (kind) {
    case prediction_error_kind::malformed_row: return "MalformedRow";
    case prediction_error_kind::unknown_class_name: return "UnknownClassName";
    case prediction_error_kind::invalid_label: return "InvalidLabel";
    case prediction_error_kind::invalid_score: return "InvalidScore";
    case prediction_error_kind::invalid_box: return "InvalidBox";
  }
  return "Unknown";
}

}  // namespace

prediction_error::prediction_error(prediction_error_kind kind, std::size_t row,
                                   const std::string& detail)
    : std::runtime_error(std::string(prediction_error_name(kind)) + " at row " +
                         std::to_string(row) + ": " + detail),
      kind_(kind),
      row_(row) {}

std::vector<prediction> parse_prediction_csv(std::istream& in) {
  csv::line_reader reader(in);
  const auto header = reader.next();
  const auto header_fields = header ? csv::split_record(*header) : std::nullopt;
  if (!header_fields || csv::join_record(*header_fields) != kPredictionHeader) {
    throw prediction_error(prediction_error_kind::malformed_row, 1,
                           std::string("expected header '") + kPredictionHeader + "'");
  }
  std::vector<prediction> preds;
  while (const auto line = reader.next()) {
    const std::size_t row = reader.line_number();
    if (csv::trim(*line).empty()) continue;
    const auto fields = csv::split_record(*line);
    if (!fields || fields->size() != 7) {
      throw prediction_error(prediction_error_kind::malformed_row, row,
                             "expected 7 comma-separated fields");
    }
    const auto& f = *fields;
    prediction p;
    p.image_id = std::string(csv::trim(f[0]));
    if (p.image_id.empty()) {
      throw prediction_error(prediction_error_kind::malformed_row, row, "empty image_id");
    }
    const auto label = label_from_name(csv::trim(f[1]));
    if (!label) {
      throw prediction_error(prediction_error_kind::unknown_class_name, row,
                             "unknown class '" + f[1] + "'");
    }
    if (!is_lesion(*label)) {
      throw prediction_error(prediction_error_kind::invalid_label, row,
                             "predictions must name a lesion class");
    }
    p.label = *label;
    const auto score = csv::parse_double(f[2]);
    if (!score) {
      throw prediction_error(prediction_error_kind::malformed_row, row,
                             "score '" + f[2] + "' is not a number");
    }
    if (!std::isfinite(*score) || *score < 0 || *score > 1) {
      throw prediction_error(prediction_error_kind::invalid_score, row,
                             "score must lie in [0,1]");
    }
    p.score = *score;
    std::array<double, 4> c{};
    for (std::size_t k = 0; k < 4; ++k) {
      const auto v = csv::parse_double(f[3 + k]);
      if (!v) {
        throw prediction_error(prediction_error_kind::malformed_row, row,
                               "coordinate '" + f[3 + k] + "' is not a number");
      }
      c[k] = *v;
    }
    p.box = {c[0], c[1], c[2], c[3]};
    if (!p.box.valid()) {
      throw prediction_error(prediction_error_kind::invalid_box, row,
                             "box needs 0 <= min < max on both axes");
    }
    preds.push_back(std::move(p));
  }
  return preds;
}

std::string serialize_prediction_csv(std::span<const prediction> preds) {
  std::string out = kPredictionHeader;
  out.push_back('\n');
  for (const auto& p : preds) {
    out += csv::join_record({p.image_id, std::string(label_name(p.label)),
                             format_number(p.score), format_number(p.box.x_min),
                             format_number(p.box.y_min), format_number(p.box.x_max),
                             format_number(p.box.y_max)});
    out.push_back('\n');
  }
  return out;
}

std::vector<bbox> pool_ground_truth(const image_annotations& image, class_label label) {
  std::vector<bbox> pool;
  for (const auto& [rad, marks] : image.by_annotator) {
    for (const auto& lb : marks.boxes) {
      if (lb.label == label) pool.push_back(lb.box);
    }
  }
  return pool;
}

std::size_t match_outcome::n_tp() const {
  return static_cast<std::size_t>(std::count(is_tp.begin(), is_tp.end(), true));
}

match_outcome match_detections(std::span<const prediction> preds,
                               std::span<const bbox> gt_pool, double iou_threshold) {
  match_outcome out;
  out.is_tp.assign(preds.size(), false);
  out.matched_gt.assign(preds.size(), std::nullopt);
  out.best_iou.assign(preds.size(), 0.0);
  out.gt_matched_by.assign(gt_pool.size(), std::nullopt);

  std::vector<std::size_t> order(preds.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return preds[a].score > preds[b].score;
  });

  for (std::size_t p : order) {
    std::optional<std::size_t> best;
    double best_iou = -1;
    for (std::size_t g = 0; g < gt_pool.size(); ++g) {
      if (out.gt_matched_by[g]) continue;
      const double v = iou(preds[p].box, gt_pool[g]);
      if (v >= iou_threshold && v > best_iou) {
        best = g;
        best_iou = v;
      }
    }
    if (best) {
      out.is_tp[p] = true;
      out.matched_gt[p] = best;
      out.best_iou[p] = best_iou;
      out.gt_matched_by[*best] = p;
    }
  }
  return out;
}

ap_result average_precision(std::span<const scored_outcome> outcomes, std::size_t n_gt) {
  ap_result result;
  result.n_gt = n_gt;
  result.n_predictions = outcomes.size();
  result.curve.reserve(outcomes.size());
  std::size_t tp = 0;
  for (std::size_t k = 0; k < outcomes.size(); ++k) {
    if (outcomes[k].tp) ++tp;
    const double precision = static_cast<double>(tp) / static_cast<double>(k + 1);
    const double recall = n_gt ? static_cast<double>(tp) / static_cast<double>(n_gt) : 0.0;
    result.curve.push_back({recall, precision});
  }
  result.n_tp = tp;
  if (n_gt == 0 || tp == 0) return result;

  // Recall only moves at true positives, by 1/n_gt each time.
  double envelope = 0;
  double area = 0;
  for (std::size_t k = outcomes.size(); k-- > 0;) {
    envelope = std::max(envelope, result.curve[k].precision);
    if (outcomes[k].tp) area += envelope;
  }
  result.ap = std::min(1.0, area / static_cast<double>(n_gt));
  return result;
}

double mean_ap(std::span<const ap_result> per_class, std::vector<class_label>* excluded) {
  double sum = 0;
  std::size_t n = 0;
  for (const auto& r : per_class) {
    if (r.evaluable()) {
      sum += r.ap;
      ++n;
    } else if (excluded) {
      excluded->push_back(r.label);
    }
  }
  if (n == 0) throw no_evaluable_classes();
  return sum / static_cast<double>(n);
}

ap_result evaluate_class(std::span<const prediction> preds, const image_index& index,
                         class_label label, double iou_threshold) {
  // Per image: (input position, prediction) for this label.
  std::map<std::string, std::vector<std::size_t>> by_image;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i].label == label) by_image[preds[i].image_id].push_back(i);
  }

  std::size_t n_gt = 0;
  for (const auto& [id, image] : index) n_gt += pool_ground_truth(image, label).size();

  struct ranked {
    double score;
    std::size_t input_pos;
    bool tp;
  };
  std::vector<ranked> ranked_outcomes;
  for (const auto& [id, positions] : by_image) {
    std::vector<prediction> local;
    local.reserve(positions.size());
    for (std::size_t pos : positions) local.push_back(preds[pos]);
    std::vector<bbox> pool;
    if (const auto it = index.find(id); it != index.end()) {
      pool = pool_ground_truth(it->second, label);
    }
    const match_outcome m = match_detections(local, pool, iou_threshold);
    for (std::size_t k = 0; k < positions.size(); ++k) {
      ranked_outcomes.push_back({local[k].score, positions[k], m.is_tp[k]});
    }
  }
  std::sort(ranked_outcomes.begin(), ranked_outcomes.end(), [](const ranked& a, const ranked& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.input_pos < b.input_pos;
  });
  std::vector<scored_outcome> outcomes;
  outcomes.reserve(ranked_outcomes.size());
  for (const auto& r : ranked_outcomes) outcomes.push_back({r.score, r.tp});

  ap_result result = average_precision(outcomes, n_gt);
  result.label = label;
  return result;
}

detection_result evaluate_detections(std::span<const prediction> preds,
                                     const image_index& index, double iou_threshold) {
  detection_result result;
  result.iou_threshold = iou_threshold;
  for (class_label label : lesion_labels()) {
    result.per_class.push_back(evaluate_class(preds, index, label, iou_threshold));
  }
  try {
    std::vector<class_label> excluded;
    result.map = mean_ap(result.per_class, &excluded);
    result.excluded = std::move(excluded);
  } catch (const no_evaluable_classes&) {
    for (const auto& r : result.per_class) result.excluded.push_back(r.label);
  }
  return result;
}

}  // namespace cxr_audit
