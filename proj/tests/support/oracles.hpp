#pragma once

// Independent reference implementations used by unit and acceptance tests.
// They avoid calling the library's own geometry or scoring helpers.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace oracle {

struct box {
  double x0, y0, x1, y1;
};

inline double overlap_1d(double a0, double a1, double b0, double b1) {
  const double lo = a0 > b0 ? a0 : b0;
  const double hi = a1 < b1 ? a1 : b1;
  return hi > lo ? hi - lo : 0.0;
}

inline double iou(const box& a, const box& b) {
  const double inter = overlap_1d(a.x0, a.x1, b.x0, b.x1) * overlap_1d(a.y0, a.y1, b.y0, b.y1);
  if (inter <= 0) return 0.0;
  const double area_a = (a.x1 - a.x0) * (a.y1 - a.y0);
  const double area_b = (b.x1 - b.x0) * (b.y1 - b.y0);
  return inter / (area_a + area_b - inter);
}

struct det {
  std::string image;
  double score;
  box b;
};

// Greedy one-to-one matching restated from its definition: each prediction,
// best score first, takes the free GT that no other free GT beats on IoU
// (lower index wins ties).
inline std::vector<std::optional<std::size_t>> greedy_match(const std::vector<det>& preds,
                                                            const std::vector<box>& gts,
                                                            double thr) {
  std::vector<std::size_t> order(preds.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return preds[a].score > preds[b].score; });
  std::vector<bool> taken(gts.size(), false);
  std::vector<std::optional<std::size_t>> match(preds.size());
  for (std::size_t p : order) {
    std::vector<std::size_t> candidates;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (!taken[g] && iou(preds[p].b, gts[g]) >= thr) candidates.push_back(g);
    }
    if (candidates.empty()) continue;
    // Exhaustive pick: the candidate no other candidate beats.
    std::optional<std::size_t> winner;
    for (std::size_t c : candidates) {
      bool beaten = false;
      for (std::size_t d : candidates) {
        const double ic = iou(preds[p].b, gts[c]);
        const double id = iou(preds[p].b, gts[d]);
        if (id > ic || (id == ic && d < c)) beaten = true;
      }
      if (!beaten) winner = c;
    }
    taken[*winner] = true;
    match[p] = winner;
  }
  return match;
}

// All-points interpolated AP, integrated over recall steps: the area under
// the curve p_interp(r) = max{precision_k : recall_k >= r}.
inline double envelope_ap(const std::vector<bool>& ranked_tp, std::size_t n_gt) {
  if (n_gt == 0) return 0.0;
  std::vector<double> recall, precision;
  std::size_t tp = 0;
  for (std::size_t k = 0; k < ranked_tp.size(); ++k) {
    if (ranked_tp[k]) ++tp;
    recall.push_back(static_cast<double>(tp) / static_cast<double>(n_gt));
    precision.push_back(static_cast<double>(tp) / static_cast<double>(k + 1));
  }
  std::set<double> levels(recall.begin(), recall.end());
  double area = 0;
  double prev = 0;
  for (double r : levels) {
    if (r <= prev) continue;
    double best = 0;
    for (std::size_t k = 0; k < recall.size(); ++k) {
      if (recall[k] >= r) best = std::max(best, precision[k]);
    }
    area += (r - prev) * best;
    prev = r;
  }
  return area;
}

// Global ranking by (score desc, input position), matching per image.
struct class_eval {
  std::vector<bool> ranked_tp;
  std::size_t n_gt = 0;
  double ap = 0;
};

inline class_eval evaluate(const std::vector<det>& preds,
                           const std::map<std::string, std::vector<box>>& gts, double thr) {
  class_eval out;
  for (const auto& [img, boxes] : gts) out.n_gt += boxes.size();
  std::map<std::string, std::vector<std::size_t>> per_image;
  for (std::size_t i = 0; i < preds.size(); ++i) per_image[preds[i].image].push_back(i);
  std::vector<bool> tp(preds.size(), false);
  for (const auto& [img, idx] : per_image) {
    std::vector<det> local;
    for (std::size_t i : idx) local.push_back(preds[i]);
    const auto it = gts.find(img);
    const std::vector<box> none;
    const auto m = greedy_match(local, it == gts.end() ? none : it->second, thr);
    for (std::size_t k = 0; k < idx.size(); ++k) tp[idx[k]] = m[k].has_value();
  }
  std::vector<std::size_t> order(preds.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return preds[a].score > preds[b].score; });
  for (std::size_t i : order) out.ranked_tp.push_back(tp[i]);
  out.ap = envelope_ap(out.ranked_tp, out.n_gt);
  return out;
}

// Label-set agreement by explicit pair enumeration.
struct agreement_counts {
  std::size_t images = 0;
  std::size_t at_least_one = 0;
  std::size_t both_all = 0;
};

// image -> annotator -> label set (labels as strings)
using label_sets = std::map<std::string, std::map<std::string, std::set<std::string>>>;

inline std::map<std::string, agreement_counts> pairwise_agreement(const label_sets& data) {
  std::map<std::string, agreement_counts> out;
  for (const auto& [img, by_rad] : data) {
    for (const auto& [a, sa] : by_rad) {
      auto& c = out[a];
      ++c.images;
      std::size_t partners = 0;
      std::size_t equal = 0;
      for (const auto& [b, sb] : by_rad) {
        if (a == b) continue;
        ++partners;
        if (sa == sb) ++equal;
      }
      if (partners == 0 || equal > 0) ++c.at_least_one;
      if (equal == partners) ++c.both_all;
    }
  }
  return out;
}

// Probability that a w-wide box at a uniform integer offset in [0, extent-w]
// overlaps cell `j` of `cells` equal cells with positive length.
inline double cell_hit_probability(long long extent, long long w, int cells, int j) {
  long long hits = 0;
  const long long positions = extent - w + 1;
  for (long long x = 0; x < positions; ++x) {
    // Cell j spans [j*extent/cells, (j+1)*extent/cells).
    const bool overlaps = x * cells < (j + 1) * extent && (x + w) * cells > j * extent;
    if (overlaps) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(positions);
}

}  // namespace oracle
