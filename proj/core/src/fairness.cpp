#include "cxr_audit/fairness.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace cxr_audit {

std::string_view feature_name(subgroup_feature f) {
  return f == subgroup_feature::age ? "age" : "sex";
}

std::string_view age_bin_name(age_bin b) {
  switch (b) {
    case age_bin::missing: return "missing";
    case age_bin::young: return "young";
    case age_bin::old: return "old";
  }
  return "missing";
}

age_bin age_subgroup(const age_parse& age, int split) {
  if (age.validity != age_validity::valid || !age.years) return age_bin::missing;
  return *age.years < split ? age_bin::young : age_bin::old;
}

std::vector<std::string> subgroup_names(subgroup_feature feature) {
  if (feature == subgroup_feature::age) {
    return {"missing", "young", "old"};
  }
  return {"Male", "Female", "Other", "Missing"};
}

std::string subgroup_assign(const dicom_header* header, subgroup_feature feature,
                            const subgroup_spec& spec) {
  if (feature == subgroup_feature::age) {
    if (!header) return std::string(age_bin_name(age_bin::missing));
    const auto& raw = header->patient_age_raw;
    const age_parse age =
        parse_age(raw ? std::optional<std::string_view>(*raw) : std::nullopt);
    return std::string(age_bin_name(age_subgroup(age, spec.age_split)));
  }
  if (!header) return std::string(sex_category_name(sex_category::missing));
  const auto& raw = header->patient_sex_raw;
  return std::string(sex_category_name(
      normalize_sex(raw ? std::optional<std::string_view>(*raw) : std::nullopt)));
}

std::vector<image_outcome> binarize_image_level(std::span<const prediction> preds,
                                                const image_index& index,
                                                class_label label,
                                                double score_threshold) {
  std::set<std::string> predicted;
  for (const auto& p : preds) {
    if (p.label == label && p.score >= score_threshold) predicted.insert(p.image_id);
  }
  std::vector<image_outcome> out;
  out.reserve(index.size());
  for (const auto& [id, image] : index) {
    out.push_back({id, predicted.count(id) > 0, image.any_label(label)});
  }
  return out;
}

std::string_view metric_name(parity_metric m) {
  switch (m) {
    case parity_metric::ppv: return "ppv";
    case parity_metric::tpr: return "tpr";
    case parity_metric::fpr: return "fpr";
    case parity_metric::positive_rate: return "positive_rate";
  }
  return "ppv";
}

std::optional<double> ratio::value() const {
  if (denominator == 0) return std::nullopt;
  return static_cast<double>(numerator) / static_cast<double>(denominator);
}

ratio subgroup_metrics::metric(parity_metric m) const {
  switch (m) {
    case parity_metric::ppv: return ppv();
    case parity_metric::tpr: return tpr();
    case parity_metric::fpr: return fpr();
    case parity_metric::positive_rate: return positive_rate();
  }
  return ppv();
}

namespace {

metric_gap compute_gap(const std::map<std::string, subgroup_metrics>& subgroups,
                       const std::vector<std::string>& order, parity_metric metric,
                       std::size_t min_support) {
  metric_gap gap;
  gap.metric = metric;
  bool first = true;
  for (const auto& name : order) {
    const auto& m = subgroups.at(name);
    if (m.counts.support() < min_support) continue;
    const auto v = m.metric(metric).value();
    if (!v) continue;
    ++gap.n_qualifying;
    if (first || *v < gap.low_value) {
      gap.low_value = *v;
      gap.low_group = name;
    }
    if (first || *v > gap.high_value) {
      gap.high_value = *v;
      gap.high_group = name;
    }
    first = false;
  }
  if (gap.n_qualifying >= 2) gap.gap = gap.high_value - gap.low_value;
  return gap;
}

}  // namespace

feature_parity parity_metrics(std::span<const image_outcome> outcomes,
                              const std::map<std::string, std::string>& subgroup_of,
                              subgroup_feature feature, std::size_t min_support) {
  feature_parity fp;
  fp.feature = feature;
  const auto names = subgroup_names(feature);
  for (const auto& n : names) fp.subgroups[n];
  for (const auto& o : outcomes) {
    const auto it = subgroup_of.find(o.image_id);
    if (it == subgroup_of.end()) {
      throw std::invalid_argument("image " + o.image_id + " has no subgroup");
    }
    const auto sg = fp.subgroups.find(it->second);
    if (sg == fp.subgroups.end()) {
      throw std::invalid_argument("unknown subgroup '" + it->second + "'");
    }
    auto& c = sg->second.counts;
    if (o.predicted && o.actual) ++c.tp;
    else if (o.predicted) ++c.fp;
    else if (o.actual) ++c.fn;
    else ++c.tn;
  }
  for (parity_metric m : kParityMetrics) {
    fp.gaps.push_back(compute_gap(fp.subgroups, names, m, min_support));
  }
  return fp;
}

parity_report audit_fairness(std::span<const prediction> preds, const image_index& index,
                             const header_map& headers, double score_threshold,
                             std::size_t min_support, const subgroup_spec& spec) {
  parity_report report;
  report.score_threshold = score_threshold;
  report.min_support = min_support;

  std::map<std::string, std::string> age_of;
  std::map<std::string, std::string> sex_of;
  for (const auto& [id, image] : index) {
    const auto it = headers.find(id);
    const dicom_header* h = it == headers.end() ? nullptr : &it->second;
    age_of[id] = subgroup_assign(h, subgroup_feature::age, spec);
    sex_of[id] = subgroup_assign(h, subgroup_feature::sex, spec);
  }

  for (class_label label : lesion_labels()) {
    const auto outcomes = binarize_image_level(preds, index, label, score_threshold);
    class_parity cp;
    cp.label = label;
    cp.features.push_back(parity_metrics(outcomes, age_of, subgroup_feature::age, min_support));
    cp.features.push_back(parity_metrics(outcomes, sex_of, subgroup_feature::sex, min_support));
    report.classes.push_back(std::move(cp));
  }
  return report;
}

std::vector<parity_flag> parity_flags(const parity_report& report, double gap_threshold,
                                      std::size_t min_support) {
  std::vector<parity_flag> flags;
  for (const auto& cp : report.classes) {
    for (const auto& fp : cp.features) {
      const auto names = subgroup_names(fp.feature);
      for (parity_metric m : kParityMetrics) {
        const metric_gap g = compute_gap(fp.subgroups, names, m, min_support);
        if (g.gap && *g.gap > gap_threshold) {
          flags.push_back({cp.label, fp.feature, m, *g.gap, g.low_group, g.low_value,
                           g.high_group, g.high_value});
        }
      }
    }
  }
  return flags;
}

}  // namespace cxr_audit
