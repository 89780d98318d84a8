#include "cxr_audit/report.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

namespace cxr_audit {
namespace {

using nlohmann::json;

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json box_json(const bbox& b) { return json::array({b.x_min, b.y_min, b.x_max, b.y_max}); }

report_flag flag(std::string section, std::string severity, std::string message, json evidence) {
  return {std::move(section), std::move(severity), std::move(message), std::move(evidence)};
}

json curve_summary(const density_curve& c) {
  return {{"n_samples", c.n_samples},
          {"bandwidth", c.bandwidth},
          {"sample_mean", c.sample_mean},
          {"curve_mean", c.mean()},
          {"mode_age", c.argmax()},
          {"integral", c.integral()}};
}

json histogram_json(const age_histogram& h) {
  json j = json::array();
  for (std::size_t b = 0; b < h.counts.size(); ++b) {
    j.push_back({{"from", static_cast<int>(b) * age_histogram::kBinWidth},
                 {"to", static_cast<int>(b + 1) * age_histogram::kBinWidth},
                 {"count", h.counts[b]}});
  }
  return j;
}

}  // namespace

std::string_view tool_version() { return CXR_AUDIT_VERSION; }

// ---------------------------------------------------------------------------

section_result metadata_section(std::span<const scan_entry> entries,
                                const age_density_result* density,
                                const std::string& density_skip_reason) {
  const metadata_report r = metadata_validity_report(entries);
  section_result s{"metadata", json::object(), {}};
  json& b = s.body;
  b["n_images"] = r.n_images;
  b["n_parse_errors"] = r.n_parse_errors;
  json errors = json::array();
  for (const auto& e : entries) {
    if (const auto* f = e.failure()) {
      errors.push_back({{"image_id", e.image_id},
                        {"path", e.path.filename().string()},
                        {"kind", error_kind_name(f->kind)},
                        {"offset", f->offset},
                        {"message", f->message}});
    }
  }
  b["parse_errors"] = errors;
  b["age"] = {{"valid", r.age_valid},
              {"out_of_range", r.age_out_of_range},
              {"malformed", r.age_malformed},
              {"missing", r.age_missing},
              {"missing_or_malformed_frac", opt(r.missing_age_frac())},
              {"valid_frac", opt(r.valid_age_frac())},
              {"out_of_range_frac", opt(r.out_of_range_frac())}};
  json sex_counts = json::object();
  json sex_fracs = json::object();
  for (int i = 0; i < kNumSexCategories; ++i) {
    const auto cat = static_cast<sex_category>(i);
    const std::string name(sex_category_name(cat));
    sex_counts[name] = r.sex_counts[static_cast<std::size_t>(i)];
    sex_fracs[name] = opt(r.sex_fraction(cat));
  }
  b["sex"] = {{"counts", sex_counts}, {"fractions", sex_fracs}};
  json photo_fracs = json::object();
  for (const auto& [k, v] : r.photometric_counts) photo_fracs[k] = opt(r.photometric_fraction(k));
  b["photometric"] = {{"counts", r.photometric_counts}, {"fractions", photo_fracs}};
  b["children"] = r.children;
  json oor = json::array();
  for (const auto& [id, age] : r.out_of_range_ages) oor.push_back({{"image_id", id}, {"age", age}});
  b["out_of_range_ages"] = oor;

  if (density) {
    b["age_density"] = {{"status", "ok"},
                        {"finding", curve_summary(density->finding)},
                        {"no_finding", curve_summary(density->no_finding)},
                        {"excluded_invalid_age", density->excluded_invalid_age},
                        {"finding_histogram", histogram_json(density->finding_histogram)},
                        {"no_finding_histogram", histogram_json(density->no_finding_histogram)}};
  } else {
    b["age_density"] = {{"status", "skipped"}, {"reason", density_skip_reason}};
  }

  if (r.n_parse_errors > 0) {
    s.flags.push_back(flag("metadata", "warning",
                           std::to_string(r.n_parse_errors) + " file(s) failed header parsing",
                           {{"count", r.n_parse_errors}}));
  }
  if (!r.children.empty()) {
    s.flags.push_back(flag("metadata", "warning",
                           std::to_string(r.children.size()) + " image(s) of pediatric patients (age <= " +
                               std::to_string(kChildMaxAge) + ")",
                           {{"count", r.children.size()}, {"image_ids", r.children}}));
  }
  if (r.age_out_of_range > 0) {
    s.flags.push_back(flag("metadata", "warning",
                           std::to_string(r.age_out_of_range) + " image(s) with out-of-range age",
                           {{"count", r.age_out_of_range}}));
  }
  if (r.age_missing + r.age_malformed > 0) {
    s.flags.push_back(flag("metadata", "warning",
                           std::to_string(r.age_missing + r.age_malformed) +
                               " image(s) with missing or malformed age",
                           {{"count", r.age_missing + r.age_malformed},
                            {"fraction", opt(r.missing_age_frac())}}));
  }
  const auto missing_sex = r.sex_counts[static_cast<std::size_t>(sex_category::missing)];
  if (missing_sex > 0) {
    s.flags.push_back(flag("metadata", "warning",
                           std::to_string(missing_sex) + " image(s) with missing sex",
                           {{"count", missing_sex}, {"fraction", opt(r.missing_sex_frac())}}));
  }
  if (r.photometric_counts.size() > 1) {
    s.flags.push_back(flag("metadata", "warning", "mixed photometric interpretations",
                           {{"counts", r.photometric_counts}}));
  }
  return s;
}

// ---------------------------------------------------------------------------

section_result consistency_section(const image_index& index, const header_map& headers,
                                   const audit_config& config) {
  section_result s{"consistency", json::object(), {}};
  json& b = s.body;

  json workload = json::object();
  for (const auto& [rad, w] : compute_workload(index, headers, config.age_split)) {
    json sex = json::object();
    for (int i = 0; i < kNumSexCategories; ++i) {
      const auto cat = static_cast<sex_category>(i);
      sex[std::string(sex_category_name(cat))] = w.by_sex(cat);
    }
    json age = json::object();
    for (int i = 0; i < kNumAgeBins; ++i) {
      const auto bin = static_cast<age_bin>(i);
      age[std::string(age_bin_name(bin))] = w.by_age(bin);
    }
    workload[rad] = {{"total", w.total},
                     {"finding", w.finding()},
                     {"no_finding", w.no_finding()},
                     {"sex", sex},
                     {"age", age}};
  }
  b["workload"] = workload;

  const auto agreement = compute_agreement(index, config.group_of());
  json per_rad = json::object();
  for (const auto& a : agreement.per_rad) {
    per_rad[a.rad_id] = {{"n_images", a.n_images},
                         {"n_at_least_one", a.n_at_least_one},
                         {"n_both_all", a.n_both_all},
                         {"at_least_one", opt(a.at_least_one())},
                         {"both_all", opt(a.both_all())}};
  }
  json groups = json::object();
  for (const auto& g : agreement.groups) {
    groups[g.group] = {{"members", g.members},
                       {"n_images", g.n_images},
                       {"n_at_least_one", g.n_at_least_one},
                       {"n_both_all", g.n_both_all},
                       {"at_least_one", opt(g.at_least_one())},
                       {"both_all", opt(g.both_all())}};
  }
  b["agreement"] = {{"per_rad", per_rad}, {"groups", groups}};

  const auto co = class_cooccurrence(index, config.tax, config.thresholds.colocation);
  const auto sym = co.symmetrized();
  json cells = json::array();
  for (int i = 0; i < kNumLabels; ++i) {
    for (int j = i + 1; j < kNumLabels; ++j) {
      if (sym[i][j] == 0) continue;
      cells.push_back({{"a", label_name(static_cast<class_label>(i))},
                       {"b", label_name(static_cast<class_label>(j))},
                       {"events", sym[i][j]}});
    }
  }
  json pairs = json::array();
  std::size_t flagged_events = 0;
  for (const auto& p : co.flagged) {
    flagged_events += p.events;
    pairs.push_back({{"a", label_name(p.a)},
                     {"b", label_name(p.b)},
                     {"events", p.events},
                     {"mean_iou", opt(p.mean_iou())}});
  }
  b["cooccurrence"] = {{"colocation_iou", co.colocation_iou},
                       {"total_events", co.total_events()},
                       {"pairs", cells},
                       {"flagged_pairs", pairs}};

  const auto conflicts = granularity_conflicts(index, config.thresholds.containment);
  json conflict_list = json::array();
  for (const auto& c : conflicts) {
    json contained = json::array();
    for (const auto& box : c.contained_boxes) contained.push_back(box_json(box));
    conflict_list.push_back({{"image_id", c.image_id},
                             {"class", label_name(c.label)},
                             {"coarse_rad", c.coarse_rad},
                             {"fine_rad", c.fine_rad},
                             {"coarse_box", box_json(c.coarse_box)},
                             {"contained_boxes", contained}});
  }
  b["granularity"] = {{"containment", config.thresholds.containment},
                      {"n_conflicts", conflicts.size()},
                      {"conflicts", conflict_list}};

  const auto review = sample_no_finding_review(index, config.review_n, config.seed);
  json sampled = json::object();
  for (const auto& [rad, ids] : review.samples) sampled[rad] = ids.size();
  b["no_finding_review"] = {{"seed", review.seed}, {"n_per_rad", review.n_per_rad},
                            {"n_sampled", sampled}};

  if (!conflicts.empty()) {
    s.flags.push_back(flag("consistency", "warning",
                           std::to_string(conflicts.size()) + " box granularity conflict(s)",
                           {{"count", conflicts.size()}}));
  }
  for (const auto& p : co.flagged) {
    if (p.events == 0) continue;
    s.flags.push_back(flag("consistency", "warning",
                           std::to_string(p.events) + " co-located label conflict(s) between " +
                               std::string(label_name(p.a)) + " and " + std::string(label_name(p.b)),
                           {{"a", label_name(p.a)}, {"b", label_name(p.b)}, {"events", p.events},
                            {"mean_iou", opt(p.mean_iou())}}));
  }
  return s;
}

// ---------------------------------------------------------------------------

std::vector<heatmap> class_heatmaps(const image_index& index, const header_map& headers,
                                    const audit_config& config) {
  std::vector<heatmap> maps;
  for (class_label label : lesion_labels()) {
    maps.push_back(accumulate_heatmap(index, headers, label, config.grid, config.deposit));
  }
  return maps;
}

section_result spatial_section(std::span<const heatmap> maps, const audit_config& config) {
  section_result s{"spatial", json::object(), {}};
  std::vector<symmetry_score> scores;
  json classes = json::object();
  for (const auto& h : maps) {
    const auto sc = score_symmetry(h, config.symmetry_exempt);
    scores.push_back(sc);
    classes[std::string(label_name(h.label))] = {{"n_boxes", h.n_boxes},
                                                 {"n_images_skipped", h.n_images_skipped},
                                                 {"total_mass", h.total()},
                                                 {"symmetry_score", sc.score},
                                                 {"exempt", sc.exempt},
                                                 {"heatmap", "heatmaps/" + heatmap_file_name(h.label)}};
  }
  s.body = {{"grid", {{"width", config.grid.width}, {"height", config.grid.height}}},
            {"deposit", config.deposit == deposit_mode::binary ? "binary" : "area_weighted"},
            {"asymmetry_threshold", config.thresholds.asymmetry},
            {"classes", classes}};
  for (class_label l : asymmetry_flags(scores, config.thresholds.asymmetry)) {
    const auto it = std::find_if(scores.begin(), scores.end(),
                                 [&](const symmetry_score& sc) { return sc.label == l; });
    s.flags.push_back(flag("spatial", "info",
                           "left-right asymmetric placement of " + std::string(label_name(l)),
                           {{"class", label_name(l)}, {"symmetry_score", it->score}}));
  }
  return s;
}

// ---------------------------------------------------------------------------

section_result detection_section(const detection_result& result) {
  section_result s{"detection", json::object(), {}};
  json classes = json::object();
  for (const auto& c : result.per_class) {
    classes[std::string(label_name(c.label))] = {{"ap", c.evaluable() ? json(c.ap) : json(nullptr)},
                                                 {"n_gt", c.n_gt},
                                                 {"n_predictions", c.n_predictions},
                                                 {"n_tp", c.n_tp},
                                                 {"evaluable", c.evaluable()}};
  }
  json excluded = json::array();
  for (auto l : result.excluded) excluded.push_back(label_name(l));
  s.body = {{"iou_threshold", result.iou_threshold},
            {"map", opt(result.map)},
            {"classes", classes},
            {"excluded", excluded}};
  return s;
}

// ---------------------------------------------------------------------------

section_result fairness_section(const parity_report& report, const audit_config& config) {
  section_result s{"fairness", json::object(), {}};
  json classes = json::object();
  for (const auto& cp : report.classes) {
    json features = json::object();
    for (const auto& fp : cp.features) {
      json groups = json::object();
      for (const auto& [name, m] : fp.subgroups) {
        json g = {{"tp", m.counts.tp}, {"fp", m.counts.fp}, {"tn", m.counts.tn},
                  {"fn", m.counts.fn}, {"support", m.counts.support()}};
        for (auto metric : kParityMetrics) {
          // Undefined cells are left out rather than written as zero.
          if (const auto v = m.metric(metric).value()) g[std::string(metric_name(metric))] = *v;
        }
        groups[name] = g;
      }
      json gaps = json::object();
      for (const auto& gap : fp.gaps) {
        json g = {{"n_qualifying", gap.n_qualifying}};
        if (gap.gap) {
          g["gap"] = *gap.gap;
          g["low_group"] = gap.low_group;
          g["low_value"] = gap.low_value;
          g["high_group"] = gap.high_group;
          g["high_value"] = gap.high_value;
        }
        gaps[std::string(metric_name(gap.metric))] = g;
      }
      features[std::string(feature_name(fp.feature))] = {{"subgroups", groups}, {"gaps", gaps}};
    }
    classes[std::string(label_name(cp.label))] = features;
  }
  s.body = {{"score_threshold", report.score_threshold},
            {"min_support", report.min_support},
            {"gap_threshold", config.thresholds.gap},
            {"age_split", config.age_split},
            {"classes", classes}};
  for (const auto& f : parity_flags(report, config.thresholds.gap, report.min_support)) {
    s.flags.push_back(flag("fairness", "warning",
                           std::string(metric_name(f.metric)) + " gap for " +
                               std::string(label_name(f.label)) + " across " +
                               std::string(feature_name(f.feature)) + " subgroups",
                           {{"class", label_name(f.label)},
                            {"feature", feature_name(f.feature)},
                            {"metric", metric_name(f.metric)},
                            {"gap", f.gap},
                            {"low_group", f.low_group},
                            {"low_value", f.low_value},
                            {"high_group", f.high_group},
                            {"high_value", f.high_value}}));
  }
  return s;
}

// ---------------------------------------------------------------------------

json merge_report(std::span<const section_result> sections,
                  const std::map<std::string, std::string>& skip_reasons,
                  const json& config_echo) {
  json report;
  report["tool"] = {{"name", "cxr-audit"}, {"version", std::string(tool_version())}};
  report["config"] = config_echo;
  json out_sections = json::object();
  json flags = json::array();
  for (std::string_view name : kSectionNames) {
    const auto it = std::find_if(sections.begin(), sections.end(),
                                 [&](const section_result& s) { return s.name == name; });
    if (it == sections.end()) {
      const auto reason = skip_reasons.find(std::string(name));
      out_sections[std::string(name)] = {
          {"status", "skipped"},
          {"reason", reason == skip_reasons.end() ? "not requested" : reason->second}};
      continue;
    }
    json body = it->body;
    body["status"] = "ok";
    out_sections[std::string(name)] = body;
    for (const auto& f : it->flags) {
      flags.push_back({{"section", f.section},
                       {"severity", f.severity},
                       {"message", f.message},
                       {"evidence", f.evidence}});
    }
  }
  report["sections"] = out_sections;
  report["flags"] = flags;
  report["notes"] = json::array({
      "age fractions count malformed values with missing ones; unreadable files count as missing",
      "agreement: an image read by a single annotator counts as agreeing",
      "group agreement rates pool images over the group's annotators",
      "co-occurrence counts box pairs from different annotators with different labels at or above the co-location IoU",
      "AP is the all-points interpolated area; a class with predictions but no ground truth scores 0 and stays in the mean",
      "fairness uses image-level presence: predicted when some box scores at or above the score threshold",
      "undefined fairness metrics are omitted",
  });
  return report;
}

std::string render_json(const json& report) { return report.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Markdown

namespace {

std::string text(const json& v) {
  if (v.is_null()) return "n/a";
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

std::string at_or_na(const json& obj, const std::string& key) {
  return obj.contains(key) ? text(obj[key]) : "n/a";
}

class md_writer {
 public:
  void heading(int level, const std::string& title) {
    out_ << std::string(static_cast<std::size_t>(level), '#') << ' ' << title << "\n\n";
  }
  void para(const std::string& s) { out_ << s << "\n\n"; }
  void table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
    row(header);
    out_ << '|';
    for (std::size_t i = 0; i < header.size(); ++i) out_ << " --- |";
    out_ << '\n';
    for (const auto& r : rows) row(r);
    out_ << '\n';
  }
  std::string str() const { return out_.str(); }

 private:
  void row(const std::vector<std::string>& cells) {
    out_ << '|';
    for (const auto& c : cells) out_ << ' ' << c << " |";
    out_ << '\n';
  }
  std::ostringstream out_;
};

void render_metadata(md_writer& md, const json& s) {
  md.para("Images: " + text(s["n_images"]) + ", header parse errors: " + text(s["n_parse_errors"]));
  const auto& age = s["age"];
  md.table({"Age", "Count", "Fraction"},
           {{"valid", text(age["valid"]), text(age["valid_frac"])},
            {"out of range", text(age["out_of_range"]), text(age["out_of_range_frac"])},
            {"malformed", text(age["malformed"]), ""},
            {"missing", text(age["missing"]), ""},
            {"missing or malformed", "", text(age["missing_or_malformed_frac"])}});
  std::vector<std::vector<std::string>> sex_rows;
  for (const auto& [k, v] : s["sex"]["counts"].items()) {
    sex_rows.push_back({k, text(v), text(s["sex"]["fractions"][k])});
  }
  md.table({"Sex", "Count", "Fraction"}, sex_rows);
  std::vector<std::vector<std::string>> photo_rows;
  for (const auto& [k, v] : s["photometric"]["counts"].items()) {
    photo_rows.push_back({k, text(v), text(s["photometric"]["fractions"][k])});
  }
  md.table({"Photometric interpretation", "Count", "Fraction"}, photo_rows);
  md.para("Pediatric images: " + std::to_string(s["children"].size()) +
          ", out-of-range ages: " + std::to_string(s["out_of_range_ages"].size()));
  if (!s["parse_errors"].empty()) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& e : s["parse_errors"]) {
      rows.push_back({text(e["image_id"]), text(e["kind"]), text(e["offset"])});
    }
    md.table({"Unreadable file", "Error", "Byte offset"}, rows);
  }
  const auto& d = s["age_density"];
  if (d["status"] == "ok") {
    std::vector<std::vector<std::string>> rows;
    for (const char* g : {"finding", "no_finding"}) {
      const auto& c = d[g];
      rows.push_back({g, text(c["n_samples"]), text(c["bandwidth"]), text(c["sample_mean"]),
                      text(c["curve_mean"]), text(c["mode_age"])});
    }
    md.table({"Age density", "Images", "Bandwidth", "Sample mean", "Curve mean", "Mode"}, rows);
    md.para("Excluded for invalid age: " + text(d["excluded_invalid_age"]));
  } else {
    md.para("Age density skipped: " + text(d["reason"]));
  }
}

void render_consistency(md_writer& md, const json& s) {
  md.heading(3, "Workload");
  std::vector<std::vector<std::string>> rows;
  for (const auto& [rad, w] : s["workload"].items()) {
    rows.push_back({rad, text(w["total"]), text(w["finding"]), text(w["no_finding"]),
                    text(w["sex"]["Male"]), text(w["sex"]["Female"]), text(w["sex"]["Other"]),
                    text(w["sex"]["Missing"]), text(w["age"]["young"]), text(w["age"]["old"]),
                    text(w["age"]["missing"])});
  }
  md.table({"Annotator", "Images", "Finding", "No finding", "Male", "Female", "Other",
            "Sex missing", "Young", "Old", "Age missing"},
           rows);

  md.heading(3, "Agreement");
  rows.clear();
  for (const auto& [rad, a] : s["agreement"]["per_rad"].items()) {
    rows.push_back({rad, text(a["n_images"]), text(a["n_at_least_one"]), text(a["at_least_one"]),
                    text(a["n_both_all"]), text(a["both_all"])});
  }
  md.table({"Annotator", "Images", "Agrees with one", "Rate", "Agrees with all", "Rate"}, rows);
  if (!s["agreement"]["groups"].empty()) {
    rows.clear();
    for (const auto& [g, a] : s["agreement"]["groups"].items()) {
      rows.push_back({g, text(a["n_images"]), text(a["at_least_one"]), text(a["both_all"])});
    }
    md.table({"Group", "Image reads", "Agrees with one", "Agrees with all"}, rows);
  }

  md.heading(3, "Label co-occurrence");
  const auto& co = s["cooccurrence"];
  md.para("Co-location IoU: " + text(co["colocation_iou"]) + ", events: " + text(co["total_events"]));
  rows.clear();
  for (const auto& p : co["flagged_pairs"]) {
    rows.push_back({text(p["a"]) + " / " + text(p["b"]), text(p["events"]), text(p["mean_iou"])});
  }
  md.table({"Overlapping pair", "Events", "Mean IoU"}, rows);
  rows.clear();
  for (const auto& p : co["pairs"]) {
    rows.push_back({text(p["a"]) + " / " + text(p["b"]), text(p["events"])});
  }
  if (!rows.empty()) md.table({"Class pair", "Events"}, rows);

  md.heading(3, "Box granularity");
  md.para("Containment threshold: " + text(s["granularity"]["containment"]) +
          ", conflicts: " + text(s["granularity"]["n_conflicts"]));

  const auto& review = s["no_finding_review"];
  md.para("No-finding review sample: " + text(review["n_per_rad"]) + " per annotator, seed " +
          text(review["seed"]));
}

void render_spatial(md_writer& md, const json& s) {
  md.para("Grid " + text(s["grid"]["width"]) + "x" + text(s["grid"]["height"]) + ", " +
          text(s["deposit"]) + " deposit, asymmetry threshold " + text(s["asymmetry_threshold"]));
  std::vector<std::vector<std::string>> rows;
  for (const auto& [name, c] : s["classes"].items()) {
    rows.push_back({name, text(c["n_boxes"]), text(c["symmetry_score"]),
                    c["exempt"].get<bool>() ? "yes" : "no", text(c["heatmap"])});
  }
  md.table({"Class", "Boxes", "Symmetry score", "Exempt", "Heatmap"}, rows);
}

void render_detection(md_writer& md, const json& s) {
  md.para("IoU threshold: " + text(s["iou_threshold"]) + ", mAP: " + text(s["map"]));
  std::vector<std::vector<std::string>> rows;
  for (const auto& [name, c] : s["classes"].items()) {
    rows.push_back({name, text(c["ap"]), text(c["n_gt"]), text(c["n_predictions"]), text(c["n_tp"])});
  }
  md.table({"Class", "AP", "Ground truth", "Predictions", "True positives"}, rows);
}

void render_fairness(md_writer& md, const json& s) {
  md.para("Score threshold " + text(s["score_threshold"]) + ", minimum support " +
          text(s["min_support"]) + ", gap threshold " + text(s["gap_threshold"]) +
          ", age split " + text(s["age_split"]));
  for (const auto& [name, features] : s["classes"].items()) {
    md.heading(3, name);
    std::vector<std::vector<std::string>> rows;
    for (const auto& [feature, fp] : features.items()) {
      for (const auto& [group, g] : fp["subgroups"].items()) {
        rows.push_back({feature, group, text(g["support"]), text(g["tp"]), text(g["fp"]),
                        text(g["tn"]), text(g["fn"]), at_or_na(g, "ppv"), at_or_na(g, "tpr"),
                        at_or_na(g, "fpr"), at_or_na(g, "positive_rate")});
      }
    }
    md.table({"Feature", "Subgroup", "Support", "TP", "FP", "TN", "FN", "PPV", "TPR", "FPR",
              "Positive rate"},
             rows);
    rows.clear();
    for (const auto& [feature, fp] : features.items()) {
      for (const auto& [metric, g] : fp["gaps"].items()) {
        if (!g.contains("gap")) continue;
        rows.push_back({feature, metric, text(g["gap"]),
                        text(g["low_group"]) + " " + text(g["low_value"]),
                        text(g["high_group"]) + " " + text(g["high_value"])});
      }
    }
    if (!rows.empty()) md.table({"Feature", "Metric", "Gap", "Lowest", "Highest"}, rows);
  }
}

}  // namespace

std::string render_markdown(const json& report) {
  md_writer md;
  md.heading(1, "Chest X-ray dataset audit");
  md.para("Tool version " + text(report["tool"]["version"]));

  md.heading(2, "Flags");
  if (report["flags"].empty()) {
    md.para("No flags raised.");
  } else {
    std::vector<std::vector<std::string>> rows;
    for (const auto& f : report["flags"]) {
      std::string evidence;
      for (const auto& [k, v] : f["evidence"].items()) {
        if (v.is_array() || v.is_object()) continue;
        if (!evidence.empty()) evidence += ", ";
        evidence += k + "=" + text(v);
      }
      rows.push_back({text(f["section"]), text(f["severity"]), text(f["message"]), evidence});
    }
    md.table({"Section", "Severity", "Message", "Evidence"}, rows);
  }

  static const std::map<std::string, std::string> titles = {
      {"metadata", "Metadata"}, {"consistency", "Annotation consistency"},
      {"spatial", "Spatial distribution"}, {"detection", "Detection"}, {"fairness", "Fairness"}};
  for (std::string_view name : kSectionNames) {
    const std::string key(name);
    const auto& s = report["sections"][key];
    md.heading(2, titles.at(key));
    if (s["status"] != "ok") {
      md.para("Skipped: " + text(s["reason"]));
      continue;
    }
    if (key == "metadata") render_metadata(md, s);
    else if (key == "consistency") render_consistency(md, s);
    else if (key == "spatial") render_spatial(md, s);
    else if (key == "detection") render_detection(md, s);
    else render_fairness(md, s);
  }

  md.heading(2, "Configuration");
  md.para("```json\n" + report["config"].dump(2) + "\n```");
  md.heading(2, "Notes");
  std::string notes;
  for (const auto& n : report["notes"]) notes += "- " + text(n) + "\n";
  md.para(notes.empty() ? "none" : notes.substr(0, notes.size() - 1));
  std::string out = md.str();
  while (out.size() > 1 && out[out.size() - 1] == '\n' && out[out.size() - 2] == '\n') out.pop_back();
  return out;
}

std::string age_density_csv(const age_density_result& density) {
  std::string out = "age,density_finding,density_nofinding\n";
  const auto& f = density.finding;
  const auto& n = density.no_finding;
  for (std::size_t i = 0; i < f.ages.size(); ++i) {
    out += std::to_string(f.ages[i]) + ',' + json(f.density[i]).dump() + ',' +
           json(n.density[i]).dump() + '\n';
  }
  return out;
}

}  // namespace cxr_audit
