#include <gtest/gtest.h>

#include "cxr_audit/config.hpp"
#include "cxr_audit/report.hpp"
#include "cxr_audit/synthgen.hpp"
#include "fixtures.hpp"

using namespace cxr_audit;
using nlohmann::json;

namespace {

struct built {
  synth::synthetic_corpus corpus;
  std::vector<scan_entry> entries;
  header_map headers;
  image_index index;
};

built build(const synth::corpus_spec& spec) {
  built b{synth::build_corpus(spec), {}, {}, {}};
  for (const auto& d : b.corpus.dicoms) {
    scan_entry e{d.image_id, d.image_id + ".dicom", scan_failure{}};
    try {
      e.result = parse_dicom_header(d.bytes, d.image_id);
    } catch (const dicom_parse_error& err) {
      e.result = scan_failure{err.kind(), err.offset(), err.what()};
    }
    b.entries.push_back(std::move(e));
  }
  b.headers = headers_by_id(b.entries);
  b.index = build_image_index(b.corpus.annotations);
  return b;
}

std::vector<section_result> all_sections(const built& b, const audit_config& c) {
  const auto density = age_illness_density(b.headers, b.index);
  const auto maps = class_heatmaps(b.index, b.headers, c);
  return {metadata_section(b.entries, &density), consistency_section(b.index, b.headers, c),
          spatial_section(maps, c),
          detection_section(evaluate_detections(b.corpus.predictions, b.index, c.thresholds.iou)),
          fairness_section(audit_fairness(b.corpus.predictions, b.index, b.headers, c.thresholds.score,
                                          c.thresholds.min_support, {c.age_split}),
                           c)};
}

// Number text as render_json prints it.
std::string num(const json& v) { return v.dump(); }

// `v` occurs in `text` as a whole token, not as part of a longer number.
bool contains_number(const std::string& text, const std::string& v) {
  auto numeric = [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)) || ch == '.' || ch == 'e'; };
  for (auto pos = text.find(v); pos != std::string::npos; pos = text.find(v, pos + 1)) {
    const bool left_ok = pos == 0 || !(numeric(text[pos - 1]) || text[pos - 1] == '-');
    const bool right_ok = pos + v.size() == text.size() || !numeric(text[pos + v.size()]);
    if (left_ok && right_ok) return true;
  }
  return false;
}

}  // namespace

TEST(Config, DefaultsValidateAndRoundTrip) {
  const audit_config c;
  EXPECT_NO_THROW(c.validate());
  const json j = to_json(c);
  EXPECT_EQ(to_json(config_from_json(j)), j);
  EXPECT_EQ(c.thresholds.iou, 0.4);
  EXPECT_EQ(c.thresholds.min_support, 30u);
}

TEST(Config, UnknownKeysAndBadDomainsAreRejected) {
  EXPECT_THROW(config_from_json({{"thresholdz", {}}}), config_error);
  EXPECT_THROW(config_from_json({{"thresholds", {{"ioux", 0.5}}}}), config_error);
  EXPECT_THROW(config_from_json({{"thresholds", {{"iou", 0.0}}}}), config_error);
  EXPECT_THROW(config_from_json({{"thresholds", {{"gap", 1.5}}}}), config_error);
  EXPECT_THROW(config_from_json({{"symmetry_exempt", {"Heart"}}}), config_error);
  EXPECT_THROW(config_from_json({{"annotator_groups", {{"a", {"R1"}}, {"b", {"R1"}}}}}), config_error);
  EXPECT_THROW(config_from_json({{"taxonomy", {{"overlap_pairs", {{"ILD", "No finding"}}}}}}), config_error);
}

TEST(Config, Overrides) {
  audit_config c;
  apply_override(c, "thresholds.iou=0.5");
  apply_override(c, "seed=7");
  apply_override(c, "grid.deposit=area_weighted");
  apply_override(c, "symmetry_exempt=[]");
  EXPECT_EQ(c.thresholds.iou, 0.5);
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.deposit, deposit_mode::area_weighted);
  EXPECT_TRUE(c.symmetry_exempt.empty());
  EXPECT_THROW(apply_override(c, "thresholds.nope=1"), config_error);
  EXPECT_THROW(apply_override(c, "thresholds.iou"), config_error);
  EXPECT_THROW(apply_override(c, "thresholds.iou=2"), config_error);
}

TEST(MergeReport, AllSectionsPopulated) {
  const auto b = build(synth::corpus_spec::clean());
  const audit_config c;
  const auto r = merge_report(all_sections(b, c), {}, to_json(c));
  for (auto name : kSectionNames) EXPECT_EQ(r["sections"][std::string(name)]["status"], "ok") << name;
  EXPECT_TRUE(r["flags"].empty());
  EXPECT_EQ(r["config"], to_json(c));
  EXPECT_EQ(r["tool"]["version"], std::string(tool_version()));
}

TEST(MergeReport, MetadataOnly) {
  const auto b = build(synth::corpus_spec::clean());
  const std::vector<section_result> s = {metadata_section(b.entries, nullptr)};
  const auto r = merge_report(s, {{"detection", "no predictions given"}}, json::object());
  int populated = 0, skipped = 0;
  for (const auto& [k, v] : r["sections"].items()) (v["status"] == "ok" ? populated : skipped)++;
  EXPECT_EQ(populated, 1);
  EXPECT_EQ(skipped, 4);
  EXPECT_EQ(r["sections"]["detection"]["reason"], "no predictions given");
  EXPECT_EQ(r["sections"]["fairness"]["reason"], "not requested");
}

TEST(MergeReport, DeterministicAndFlagsAreUnionOfSections) {
  const auto b = build(synth::corpus_spec::flawed_metadata());
  const audit_config c;
  const auto sections = all_sections(b, c);
  const auto r1 = merge_report(sections, {}, to_json(c));
  const auto r2 = merge_report(all_sections(b, c), {}, to_json(c));
  EXPECT_EQ(render_json(r1), render_json(r2));
  EXPECT_EQ(render_markdown(r1), render_markdown(r2));
  std::size_t n = 0;
  for (const auto& s : sections) n += s.flags.size();
  EXPECT_EQ(r1["flags"].size(), n);
  EXPECT_GT(n, 0u);
}

TEST(MergeReport, MarkdownCarriesTheSameNumbers) {
  const auto b = build(synth::corpus_spec::parity_gap());
  const audit_config c;
  const auto r = merge_report(all_sections(b, c), {}, to_json(c));
  const std::string md = render_markdown(r);
  std::vector<std::string> values;
  const auto& s = r["sections"];
  for (const char* k : {"valid_frac", "out_of_range_frac", "missing_or_malformed_frac", "valid", "missing"})
    values.push_back(num(s["metadata"]["age"][k]));
  for (const auto& [k, v] : s["metadata"]["sex"]["fractions"].items()) values.push_back(num(v));
  for (const char* g : {"finding", "no_finding"})
    for (const char* k : {"bandwidth", "sample_mean", "curve_mean"})
      values.push_back(num(s["metadata"]["age_density"][g][k]));
  for (const auto& [rad, a] : s["consistency"]["agreement"]["per_rad"].items()) {
    values.push_back(num(a["at_least_one"]));
    values.push_back(num(a["both_all"]));
  }
  for (const auto& [k, v] : s["spatial"]["classes"].items()) values.push_back(num(v["symmetry_score"]));
  values.push_back(num(s["detection"]["map"]));
  for (const auto& [k, v] : s["detection"]["classes"].items()) values.push_back(v["ap"].is_null() ? "n/a" : num(v["ap"]));
  for (const auto& [cls, features] : s["fairness"]["classes"].items()) {
    for (const auto& [f, fp] : features.items()) {
      for (const auto& [g, m] : fp["subgroups"].items())
        for (const char* k : {"ppv", "tpr", "fpr", "positive_rate"})
          if (m.contains(k)) values.push_back(num(m[k]));
      for (const auto& [metric, gap] : fp["gaps"].items())
        if (gap.contains("gap")) values.push_back(num(gap["gap"]));
    }
  }
  ASSERT_GT(values.size(), 100u);
  for (const auto& v : values) {
    EXPECT_TRUE(contains_number(md, v)) << v;
  }
}

TEST(AgeDensityCsv, Layout) {
  const auto b = build(synth::corpus_spec::clean());
  const auto csv = age_density_csv(age_illness_density(b.headers, b.index));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "age,density_finding,density_nofinding");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 100);
}
