#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "cxr_audit/metadata_audit.hpp"
#include "cxr_audit/synthgen.hpp"
#include "fixtures.hpp"

using namespace cxr_audit;
using fixtures::rec;

namespace {

std::vector<scan_entry> entries_of(const synth::synthetic_corpus& corpus) {
  std::vector<scan_entry> out;
  for (const auto& d : corpus.dicoms) {
    scan_entry e{d.image_id, d.image_id + ".dicom", scan_failure{}};
    try {
      e.result = parse_dicom_header(d.bytes, d.image_id);
    } catch (const dicom_parse_error& err) {
      e.result = scan_failure{err.kind(), err.offset(), err.what()};
    }
    out.push_back(std::move(e));
  }
  return out;
}

scan_entry header_entry(const std::string& id, std::optional<std::string> age,
                        std::optional<std::string> sex = std::nullopt) {
  dicom_header h;
  h.image_id = id;
  h.patient_age_raw = std::move(age);
  h.patient_sex_raw = std::move(sex);
  return {id, id + ".dicom", h};
}

}  // namespace

TEST(MetadataReport, EmptyCorpusHasUndefinedFractions) {
  const auto r = metadata_validity_report({});
  EXPECT_EQ(r.n_images, 0u);
  EXPECT_FALSE(r.missing_age_frac().has_value());
  EXPECT_FALSE(r.missing_sex_frac().has_value());
  EXPECT_FALSE(r.photometric_fraction("MONOCHROME2").has_value());
  EXPECT_TRUE(r.children.empty());
  EXPECT_TRUE(r.out_of_range_ages.empty());
}

TEST(MetadataReport, TenYearOldIsAChild) {
  const std::vector<scan_entry> e = {header_entry("kid", "010Y")};
  const auto r = metadata_validity_report(e);
  EXPECT_EQ(r.children, (std::vector<std::string>{"kid"}));
  EXPECT_EQ(r.age_valid, 1u);
}

TEST(MetadataReport, CategoriesPartitionTheCorpus) {
  const std::vector<scan_entry> e = {header_entry("a", "045Y", "M"), header_entry("b", "238", "F"),
                                     header_entry("c", "XXXY", "O"), header_entry("d", std::nullopt),
                                     header_entry("e", "", "")};
  const auto r = metadata_validity_report(e);
  EXPECT_EQ(r.age_valid, 1u);
  EXPECT_EQ(r.age_out_of_range, 1u);
  EXPECT_EQ(r.age_malformed, 1u);
  EXPECT_EQ(r.age_missing, 2u);
  EXPECT_EQ(r.out_of_range_ages, (std::vector<std::pair<std::string, int>>{{"b", 238}}));
  EXPECT_DOUBLE_EQ(*r.missing_age_frac(), 3.0 / 5.0);
  EXPECT_DOUBLE_EQ(*r.missing_sex_frac(), 2.0 / 5.0);
  EXPECT_EQ(r.photometric_counts.at(kMissingKey), 5u);
}

TEST(MetadataReport, MatchesManifestWithCorruptions) {
  synth::corpus_spec spec = synth::corpus_spec::flawed_metadata();
  spec.n_images = 300;
  spec.corruptions = {{3, synth::corruption_kind::truncate},
                      {10, synth::corruption_kind::bad_magic},
                      {20, synth::corruption_kind::bad_syntax}};
  const auto corpus = synth::build_corpus(spec);
  const auto r = metadata_validity_report(entries_of(corpus));
  const auto& m = corpus.manifest["metadata"];
  EXPECT_EQ(r.n_parse_errors, 3u);
  EXPECT_EQ(r.age_valid, m["age"]["valid"].get<std::size_t>());
  EXPECT_EQ(r.age_out_of_range, m["age"]["out_of_range"].get<std::size_t>());
  EXPECT_EQ(r.age_malformed, m["age"]["malformed"].get<std::size_t>());
  EXPECT_EQ(r.age_missing, m["age"]["missing"].get<std::size_t>());
  EXPECT_EQ(r.children, m["children"].get<std::vector<std::string>>());
  for (int s = 0; s < kNumSexCategories; ++s) {
    EXPECT_EQ(r.sex_counts[s], m["sex"][std::string(sex_category_name(static_cast<sex_category>(s)))].get<std::size_t>());
  }
  EXPECT_EQ(r.photometric_counts, (m["photometric"].get<std::map<std::string, std::size_t>>()));
}

TEST(MetadataReport, ExactPlantingOfMissingAge) {
  synth::corpus_spec spec;
  spec.n_images = 100;
  spec.age_missing_rate = 0.68;
  const auto corpus = synth::build_corpus(spec);
  EXPECT_EQ(corpus.manifest["metadata"]["age"]["missing"].get<std::size_t>(), 68u);
  EXPECT_EQ(metadata_validity_report(entries_of(corpus)).age_missing, 68u);
}

TEST(Kde, SilvermanBandwidth) {
  const std::vector<double> xs = {20, 30, 40, 50, 60};
  // sd = sqrt(250) = 15.81..., IQR = 20 -> 20/1.34 = 14.925...
  const double expected = 0.9 * (20.0 / 1.34) * std::pow(5.0, -0.2);
  EXPECT_NEAR(silverman_bandwidth(xs), expected, 1e-12);
  const std::vector<double> same = {40, 40, 40};
  EXPECT_EQ(silverman_bandwidth(same), 1.0);
}

TEST(Kde, SingleAgeIsOneBumpAtThatAge) {
  const std::vector<double> xs = {40};
  const auto c = gaussian_kde_on_grid(xs);
  EXPECT_EQ(c.argmax(), 40);
  EXPECT_NEAR(c.integral(), 1.0, 1e-12);
  for (std::size_t i = 1; i < c.density.size(); ++i) {
    if (c.ages[i] <= 40) EXPECT_GE(c.density[i], c.density[i - 1]);
    else EXPECT_LE(c.density[i], c.density[i - 1]);
  }
}

TEST(Kde, CurveIsNormalizedAndNonNegative) {
  std::mt19937_64 gen(9);
  std::normal_distribution<double> d(50, 15);
  std::vector<double> xs;
  for (int i = 0; i < 500; ++i) xs.push_back(std::clamp(std::round(d(gen)), 1.0, 99.0));
  const auto c = gaussian_kde_on_grid(xs);
  EXPECT_EQ(c.ages.front(), 1);
  EXPECT_EQ(c.ages.back(), 99);
  EXPECT_NEAR(c.integral(), 1.0, 1e-12);
  for (double v : c.density) EXPECT_GE(v, 0.0);
  EXPECT_NEAR(c.mean(), c.sample_mean, 1.5);
}

TEST(AgeDensity, IdenticalGroupsGiveIdenticalCurves) {
  std::vector<annotation_record> rs;
  header_map headers;
  const std::vector<std::string> ages = {"030Y", "045Y", "061Y", "072Y"};
  for (std::size_t i = 0; i < ages.size(); ++i) {
    for (const char* group : {"f", "n"}) {
      const std::string id = std::string(group) + std::to_string(i);
      headers[id].patient_age_raw = ages[i];
      if (*group == 'f') rs.push_back(rec(id, "R1", class_label::cardiomegaly, {1, 1, 5, 5}));
      else rs.push_back(rec(id, "R1", class_label::no_finding));
    }
  }
  const auto d = age_illness_density(headers, fixtures::index_of(rs));
  EXPECT_EQ(d.finding.density, d.no_finding.density);
  EXPECT_EQ(d.finding_histogram.counts, d.no_finding_histogram.counts);
}

TEST(AgeDensity, EmptyGroupThrows) {
  header_map headers;
  headers["a"].patient_age_raw = "045Y";
  const auto index = fixtures::index_of({rec("a", "R1", class_label::no_finding)});
  EXPECT_THROW(age_illness_density(headers, index), empty_group_error);
}

TEST(AgeDensity, OlderFindingGroupShiftsTheCurve) {
  const auto corpus = synth::build_corpus(synth::corpus_spec::parity_gap());
  header_map headers;
  for (const auto& d : corpus.dicoms) headers[d.image_id] = parse_dicom_header(d.bytes, d.image_id);
  const auto d = age_illness_density(headers, build_image_index(corpus.annotations));
  EXPECT_GT(d.finding.mean(), d.no_finding.mean());
  const auto& m = corpus.manifest["density"];
  EXPECT_NEAR(d.finding.sample_mean, m["finding"]["sample_mean"].get<double>(), 1e-9);
  EXPECT_NEAR(d.no_finding.sample_mean, m["no_finding"]["sample_mean"].get<double>(), 1e-9);
  EXPECT_EQ(d.finding.n_samples, m["finding"]["n"].get<std::size_t>());
  EXPECT_EQ(d.no_finding.n_samples, m["no_finding"]["n"].get<std::size_t>());
}
