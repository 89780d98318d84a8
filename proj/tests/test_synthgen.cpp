#include <gtest/gtest.h>

#include "cxr_audit/synthgen.hpp"
#include "fixtures.hpp"

using namespace cxr_audit;

TEST(Synthgen, EmptyCorpus) {
  synth::corpus_spec spec;
  spec.n_images = 0;
  const auto c = synth::build_corpus(spec);
  EXPECT_TRUE(c.dicoms.empty());
  EXPECT_TRUE(c.annotations.empty());
  EXPECT_TRUE(c.predictions.empty());
  EXPECT_TRUE(c.manifest["images"].empty());
  EXPECT_EQ(c.manifest["metadata"]["n_images"], 0);
}

TEST(Synthgen, ByteIdenticalTrees) {
  fixtures::temp_dir a("synth_a"), b("synth_b");
  const auto spec = synth::corpus_spec::flawed_metadata();
  synth::generate_corpus(spec, a.path());
  synth::generate_corpus(spec, b.path());
  std::vector<std::string> names;
  for (const auto& e : std::filesystem::recursive_directory_iterator(a.path())) {
    if (!e.is_regular_file()) continue;
    const auto rel = std::filesystem::relative(e.path(), a.path());
    names.push_back(rel.string());
    EXPECT_EQ(fixtures::read_file(e.path()), fixtures::read_file(b.path() / rel)) << rel;
  }
  EXPECT_EQ(names.size(), spec.n_images + 3);
}

TEST(Synthgen, SeedChangesTheCorpus) {
  auto spec = synth::corpus_spec::flawed_metadata();
  const auto a = synth::build_corpus(spec);
  spec.seed += 1;
  EXPECT_NE(a.manifest, synth::build_corpus(spec).manifest);
}

TEST(Synthgen, ExactCountPlanting) {
  synth::corpus_spec spec;
  spec.n_images = 100;
  spec.age_missing_rate = 0.68;
  spec.sex_missing_rate = 0.17;
  spec.sex_other_rate = 0.34;
  spec.sex_male_rate = 0.26;
  spec.photometric_mix = {{"MONOCHROME1", 0.17}, {"MONOCHROME2", 0.83}};
  const auto m = synth::build_corpus(spec).manifest["metadata"];
  EXPECT_EQ(m["age"]["missing"], 68);
  EXPECT_EQ(m["sex"]["Missing"], 17);
  EXPECT_EQ(m["sex"]["Other"], 34);
  EXPECT_EQ(m["photometric"]["MONOCHROME1"], 17);
  EXPECT_EQ(m["photometric"]["MONOCHROME2"], 83);
}

TEST(Synthgen, CorruptionsAreRecordedAsErrors) {
  auto spec = synth::corpus_spec::clean();
  spec.corruptions = {{0, synth::corruption_kind::bad_magic}, {5, synth::corruption_kind::bad_syntax}};
  const auto c = synth::build_corpus(spec);
  ASSERT_EQ(c.manifest["errors"].size(), 2u);
  for (const auto& e : c.manifest["errors"]) {
    const auto& file = *std::find_if(c.dicoms.begin(), c.dicoms.end(),
                                     [&](const auto& d) { return d.image_id == e["image_id"]; });
    try {
      parse_dicom_header(file.bytes);
      ADD_FAILURE() << "no error for " << e["image_id"];
    } catch (const dicom_parse_error& err) {
      EXPECT_EQ(std::string(error_kind_name(err.kind())), e["kind"].get<std::string>());
      EXPECT_EQ(err.offset(), e["offset"].get<std::uint64_t>());
    }
  }
}

TEST(Synthgen, SpecJsonRoundTripAndValidation) {
  for (const char* name : {"clean", "flawed", "parity"}) {
    const auto spec = *synth::preset(name);
    const auto j = synth::to_json(spec);
    EXPECT_EQ(synth::to_json(synth::spec_from_json(j)), j) << name;
  }
  EXPECT_THROW(synth::spec_from_json({{"n_imagez", 3}}), std::invalid_argument);
  EXPECT_THROW(synth::spec_from_json({{"age_missing_rate", 1.5}}), std::invalid_argument);
  EXPECT_THROW(synth::spec_from_json({{"photometric_mix", {{"MONOCHROME2", 0.5}}}}), std::invalid_argument);
  EXPECT_FALSE(synth::preset("nope").has_value());
  const auto s = synth::spec_from_json({{"preset", "flawed"}, {"n_images", 50}});
  EXPECT_EQ(s.n_images, 50u);
  EXPECT_EQ(s.age_missing_rate, 0.60);
}

TEST(Synthgen, InfeasibleParityPlantIsRejected) {
  auto spec = synth::corpus_spec::parity_gap();
  spec.n_images = 100;
  EXPECT_THROW(synth::build_corpus(spec), std::invalid_argument);
}

TEST(Synthgen, UnwritableOutput) {
  fixtures::temp_dir d("synth_ro");
  fixtures::write_file(d.path() / "file", "x");
  EXPECT_THROW(synth::generate_corpus(synth::corpus_spec::clean(), d.path() / "file" / "sub"),
               synth::output_not_writable);
}
