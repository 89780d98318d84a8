#include "cxr_audit/consistency.hpp"

#include <algorithm>
#include <set>

#include "cxr_audit/csv.hpp"
#include "cxr_audit/rng.hpp"

namespace cxr_audit {

std::size_t workload_counts::finding() const {
  std::size_t n = 0;
  for (const auto& by_sex : cube[1])
    for (std::size_t c : by_sex) n += c;
  return n;
}

std::size_t workload_counts::no_finding() const {
  std::size_t n = 0;
  for (const auto& by_sex : cube[0])
    for (std::size_t c : by_sex) n += c;
  return n;
}

std::size_t workload_counts::by_sex(sex_category s) const {
  std::size_t n = 0;
  for (const auto& f : cube)
    for (std::size_t c : f[static_cast<std::size_t>(s)]) n += c;
  return n;
}

std::size_t workload_counts::by_age(age_bin b) const {
  std::size_t n = 0;
  for (const auto& f : cube)
    for (const auto& by_age : f) n += by_age[static_cast<std::size_t>(b)];
  return n;
}

workload_summary compute_workload(const image_index& index, const header_map& headers,
                                  int age_split) {
  workload_summary summary;
  for (const auto& [id, image] : index) {
    sex_category sex = sex_category::missing;
    age_bin age = age_bin::missing;
    if (const auto it = headers.find(id); it != headers.end()) {
      const auto& h = it->second;
      sex = normalize_sex(h.patient_sex_raw ? std::optional<std::string_view>(*h.patient_sex_raw)
                                            : std::nullopt);
      age = age_subgroup(parse_age(h.patient_age_raw
                                       ? std::optional<std::string_view>(*h.patient_age_raw)
                                       : std::nullopt),
                         age_split);
    }
    for (const auto& [rad, marks] : image.by_annotator) {
      auto& w = summary[rad];
      ++w.total;
      ++w.cube[marks.has_lesion() ? 1 : 0][static_cast<std::size_t>(sex)]
              [static_cast<std::size_t>(age)];
    }
  }
  return summary;
}

namespace {

std::optional<double> fraction(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

std::optional<double> agreement_rates::at_least_one() const {
  return fraction(n_at_least_one, n_images);
}
std::optional<double> agreement_rates::both_all() const {
  return fraction(n_both_all, n_images);
}
std::optional<double> group_agreement::at_least_one() const {
  return fraction(n_at_least_one, n_images);
}
std::optional<double> group_agreement::both_all() const {
  return fraction(n_both_all, n_images);
}

agreement_result compute_agreement(const image_index& index,
                                   const std::map<std::string, std::string>& groups) {
  std::map<std::string, agreement_rates> rates;
  for (const auto& [id, image] : index) {
    for (const auto& [rad, marks] : image.by_annotator) {
      auto& r = rates[rad];
      r.rad_id = rad;
      ++r.n_images;
      bool any = false;
      bool all = true;
      for (const auto& [other, other_marks] : image.by_annotator) {
        if (other == rad) continue;
        if (other_marks.labels == marks.labels) {
          any = true;
        } else {
          all = false;
        }
      }
      const bool solo = image.by_annotator.size() == 1;
      if (any || solo) ++r.n_at_least_one;
      if (all) ++r.n_both_all;
    }
  }

  agreement_result result;
  for (auto& [rad, r] : rates) result.per_rad.push_back(r);

  std::map<std::string, group_agreement> by_group;
  for (const auto& [rad, group] : groups) {
    const auto it = rates.find(rad);
    if (it == rates.end()) {
      throw consistency_error("UnknownRadInGroups: annotator '" + rad + "' (group '" +
                              group + "') does not appear in the annotations");
    }
    auto& g = by_group[group];
    g.group = group;
    g.members.push_back(rad);
    g.n_images += it->second.n_images;
    g.n_at_least_one += it->second.n_at_least_one;
    g.n_both_all += it->second.n_both_all;
  }
  for (auto& [name, g] : by_group) result.groups.push_back(std::move(g));
  return result;
}

std::optional<double> overlap_pair_stats::mean_iou() const {
  if (events == 0) return std::nullopt;
  return iou_sum / static_cast<double>(events);
}

std::array<std::array<std::size_t, kNumLabels>, kNumLabels> cooccurrence_result::symmetrized()
    const {
  std::array<std::array<std::size_t, kNumLabels>, kNumLabels> s{};
  for (int i = 0; i < kNumLabels; ++i)
    for (int j = 0; j < kNumLabels; ++j) s[i][j] = directed[i][j] + directed[j][i];
  return s;
}

std::size_t cooccurrence_result::total_events() const {
  std::size_t n = 0;
  for (const auto& row : directed)
    for (std::size_t c : row) n += c;
  return n;
}

cooccurrence_result class_cooccurrence(const image_index& index, const taxonomy& tax,
                                       double colocation_iou) {
  cooccurrence_result result;
  result.colocation_iou = colocation_iou;
  const auto flagged = tax.flagged_pairs();
  std::map<label_pair, overlap_pair_stats> stats;
  for (const auto& p : flagged) stats[p] = {p.first, p.second, 0, 0.0};

  for (const auto& [id, image] : index) {
    for (auto a = image.by_annotator.begin(); a != image.by_annotator.end(); ++a) {
      for (auto b = std::next(a); b != image.by_annotator.end(); ++b) {
        for (const auto& ba : a->second.boxes) {
          for (const auto& bb : b->second.boxes) {
            if (ba.label == bb.label) continue;
            const double v = iou(ba.box, bb.box);
            if (v < colocation_iou) continue;
            ++result.directed[label_id(ba.label)][label_id(bb.label)];
            if (const auto it = stats.find(normalized_pair(ba.label, bb.label));
                it != stats.end()) {
              ++it->second.events;
              it->second.iou_sum += v;
            }
          }
        }
      }
    }
  }
  for (auto& [p, s] : stats) result.flagged.push_back(s);
  return result;
}

std::vector<granularity_conflict> granularity_conflicts(const image_index& index,
                                                        double containment_threshold) {
  std::vector<granularity_conflict> out;
  for (const auto& [id, image] : index) {
    std::vector<granularity_conflict> local;
    for (const auto& [coarse, coarse_marks] : image.by_annotator) {
      for (const auto& [fine, fine_marks] : image.by_annotator) {
        if (coarse == fine) continue;
        for (const auto& big : coarse_marks.boxes) {
          granularity_conflict c{id, big.label, coarse, fine, big.box, {}};
          for (const auto& small : fine_marks.boxes) {
            if (small.label != big.label) continue;
            if (containment(small.box, big.box) >= containment_threshold) {
              c.contained_boxes.push_back(small.box);
            }
          }
          if (c.contained_boxes.size() >= 2) local.push_back(std::move(c));
        }
      }
    }
    std::stable_sort(local.begin(), local.end(), [](const auto& x, const auto& y) {
      if (x.label != y.label) return label_id(x.label) < label_id(y.label);
      if (x.coarse_rad != y.coarse_rad) return x.coarse_rad < y.coarse_rad;
      return x.fine_rad < y.fine_rad;
    });
    for (auto& c : local) out.push_back(std::move(c));
  }
  return out;
}

std::string review_worksheet::to_csv() const {
  std::string out = kReviewHeader;
  out.push_back('\n');
  for (const auto& [rad, ids] : samples) {
    for (const auto& id : ids) {
      out += csv::join_record({rad, id, "", ""});
      out.push_back('\n');
    }
  }
  return out;
}

review_worksheet sample_no_finding_review(const image_index& index, std::size_t n_per_rad,
                                          std::uint64_t seed) {
  review_worksheet sheet;
  sheet.seed = seed;
  sheet.n_per_rad = n_per_rad;

  std::map<std::string, std::vector<std::string>> candidates;
  for (const auto& [id, image] : index) {
    for (const auto& [rad, marks] : image.by_annotator) {
      auto& list = candidates[rad];
      if (marks.is_no_finding() && !marks.has_lesion()) list.push_back(id);
    }
  }

  det_rng rng(seed);
  for (auto& [rad, ids] : candidates) {
    const std::size_t k = std::min(n_per_rad, ids.size());
    // Partial Fisher-Yates over the image_id-sorted candidate list.
    for (std::size_t i = 0; i < k; ++i) {
      const auto j = i + static_cast<std::size_t>(rng.below(ids.size() - i));
      std::swap(ids[i], ids[j]);
    }
    std::vector<std::string> picked(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(picked.begin(), picked.end());
    sheet.samples[rad] = std::move(picked);
  }
  return sheet;
}

}  // namespace cxr_audit
