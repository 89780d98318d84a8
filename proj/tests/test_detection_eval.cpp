#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "cxr_audit/detection_eval.hpp"
#include "cxr_audit/synthgen.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace cxr_audit;
using fixtures::rec;

namespace {

const class_label L = class_label::nodule_mass;

prediction pred(const std::string& img, double score, bbox b, class_label label = L) {
  return {img, label, score, b};
}

std::vector<scored_outcome> pattern(const std::vector<bool>& tps) {
  std::vector<scored_outcome> out;
  double s = 1.0;
  for (bool tp : tps) {
    out.push_back({s, tp});
    s -= 0.1;
  }
  return out;
}

}  // namespace

TEST(ParsePredictions, StrictRows) {
  std::istringstream good(std::string(kPredictionHeader) + "\nimg,Nodule/Mass,0.5,1,2,3,4\n");
  const auto p = parse_prediction_csv(good);
  ASSERT_EQ(p.size(), 1u);
  EXPECT_EQ(p[0], pred("img", 0.5, {1, 2, 3, 4}));

  auto kind_of = [](const std::string& row) {
    std::istringstream in(std::string(kPredictionHeader) + "\n" + row + "\n");
    try {
      parse_prediction_csv(in);
    } catch (const prediction_error& e) {
      EXPECT_EQ(e.row(), 2u);
      return e.kind();
    }
    ADD_FAILURE() << row;
    return prediction_error_kind::malformed_row;
  };
  EXPECT_EQ(kind_of("img,Nodule/Mass,abc,1,2,3,4"), prediction_error_kind::malformed_row);
  EXPECT_EQ(kind_of("img,Nodule/Mass,0.5,1,2,3"), prediction_error_kind::malformed_row);
  EXPECT_EQ(kind_of("img,Nodules,0.5,1,2,3,4"), prediction_error_kind::unknown_class_name);
  EXPECT_EQ(kind_of("img,No finding,0.5,1,2,3,4"), prediction_error_kind::invalid_label);
  EXPECT_EQ(kind_of("img,Nodule/Mass,1.5,1,2,3,4"), prediction_error_kind::invalid_score);
  EXPECT_EQ(kind_of("img,Nodule/Mass,0.5,3,2,1,4"), prediction_error_kind::invalid_box);
}

TEST(ParsePredictions, SerializeRoundTrip) {
  const auto corpus = synth::build_corpus(synth::corpus_spec::parity_gap());
  std::istringstream in(serialize_prediction_csv(corpus.predictions));
  EXPECT_EQ(parse_prediction_csv(in), corpus.predictions);
}

TEST(Pooling, UnionOfAnnotatorBoxes) {
  const bbox b1{10, 10, 40, 40};
  const auto index = fixtures::index_of({rec("i", "A", L, b1), rec("i", "B", L, b1),
                                         rec("i", "C", class_label::no_finding)});
  EXPECT_EQ(pool_ground_truth(index.at("i"), L), (std::vector<bbox>{b1, b1}));
  EXPECT_TRUE(pool_ground_truth(index.at("i"), class_label::ild).empty());
}

TEST(Matching, ExactHitIsTruePositive) {
  const std::vector<prediction> p = {pred("i", 0.9, {0, 0, 10, 10})};
  const std::vector<bbox> gt = {{0, 0, 10, 10}};
  const auto m = match_detections(p, gt);
  EXPECT_TRUE(m.is_tp[0]);
  EXPECT_EQ(m.best_iou[0], 1.0);
}

TEST(Matching, OneToOne) {
  const std::vector<prediction> p = {pred("i", 0.3, {0, 0, 10, 10}), pred("i", 0.8, {0, 0, 10, 10})};
  const std::vector<bbox> gt = {{0, 0, 10, 10}};
  const auto m = match_detections(p, gt);
  EXPECT_FALSE(m.is_tp[0]);
  EXPECT_TRUE(m.is_tp[1]);
  EXPECT_EQ(m.gt_matched_by[0], 1u);
}

TEST(Matching, ThreePredictionsTwoBoxesMatchOracle) {
  const std::vector<prediction> p = {pred("i", 0.9, {0, 0, 10, 10}), pred("i", 0.8, {2, 0, 12, 10}),
                                     pred("i", 0.7, {20, 0, 30, 10})};
  const std::vector<bbox> gt = {{1, 0, 11, 10}, {3, 0, 13, 10}};
  const auto m = match_detections(p, gt);
  std::vector<oracle::det> od;
  for (const auto& x : p) od.push_back({x.image_id, x.score, {x.box.x_min, x.box.y_min, x.box.x_max, x.box.y_max}});
  std::vector<oracle::box> og;
  for (const auto& g : gt) og.push_back({g.x_min, g.y_min, g.x_max, g.y_max});
  const auto want = oracle::greedy_match(od, og, kDefaultMatchIou);
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_EQ(m.matched_gt[i], want[i]) << i;
  EXPECT_EQ(m.matched_gt[0], 0u);
  EXPECT_EQ(m.matched_gt[1], 1u);
  EXPECT_FALSE(m.is_tp[2]);
}

TEST(AveragePrecision, AllTruePositivesCoveringGtIsOne) {
  EXPECT_EQ(average_precision(pattern({true, true, true}), 3).ap, 1.0);
}

TEST(AveragePrecision, NoPredictionsIsZero) {
  const auto r = average_precision({}, 4);
  EXPECT_EQ(r.ap, 0.0);
  EXPECT_TRUE(r.evaluable());
}

TEST(AveragePrecision, HandComputedFiveNinths) {
  const std::vector<bool> tps = {true, false, true, false, false};
  const double ap = average_precision(pattern(tps), 3).ap;
  EXPECT_NEAR(ap, 5.0 / 9.0, 1e-15);
  EXPECT_NEAR(oracle::envelope_ap(tps, 3), 5.0 / 9.0, 1e-15);
}

TEST(AveragePrecision, RandomPatternsMatchEnvelopeOracle) {
  std::mt19937_64 gen(23);
  for (int t = 0; t < 2000; ++t) {
    const std::size_t n = gen() % 30;
    std::vector<bool> tps;
    std::size_t n_tp = 0;
    for (std::size_t i = 0; i < n; ++i) {
      tps.push_back(gen() % 2);
      n_tp += tps.back();
    }
    const std::size_t n_gt = n_tp + gen() % 5;
    if (n_gt == 0) continue;
    EXPECT_NEAR(average_precision(pattern(tps), n_gt).ap, oracle::envelope_ap(tps, n_gt), 1e-12);
  }
}

TEST(MeanAp, ExcludesNonEvaluableClasses) {
  std::vector<ap_result> rs(3);
  rs[0].ap = 0.2;
  rs[0].n_gt = 1;
  rs[1].ap = 0.4;
  rs[1].n_gt = 2;
  std::vector<class_label> excluded;
  EXPECT_NEAR(mean_ap(rs, &excluded), 0.3, 1e-15);
  EXPECT_EQ(excluded.size(), 1u);
  std::vector<ap_result> none(2);
  EXPECT_THROW(mean_ap(none), no_evaluable_classes);
}

TEST(MeanAp, PerfectClassesGiveOne) {
  std::vector<ap_result> rs(4);
  for (auto& r : rs) {
    r.ap = 1.0;
    r.n_gt = 3;
  }
  EXPECT_EQ(mean_ap(rs), 1.0);
}

TEST(EvaluateDetections, PerfectDetectorScoresOne) {
  const auto corpus = synth::build_corpus(synth::corpus_spec::flawed_metadata());
  const auto r = evaluate_detections(corpus.predictions, build_image_index(corpus.annotations));
  ASSERT_TRUE(r.map.has_value());
  EXPECT_EQ(*r.map, 1.0);
  for (const auto& c : r.per_class) {
    const std::string name(label_name(c.label));
    const auto& n_gt = corpus.manifest["detection"]["n_gt"];
    EXPECT_EQ(c.n_gt, n_gt.contains(name) ? n_gt[name].get<std::size_t>() : 0u) << name;
  }
}

TEST(EvaluateDetections, PredictionsOnUnknownImagesAreFalsePositives) {
  const auto index = fixtures::index_of({rec("i", "A", L, {0, 0, 10, 10})});
  const std::vector<prediction> p = {pred("ghost", 0.9, {0, 0, 10, 10}), pred("i", 0.8, {0, 0, 10, 10})};
  const auto r = evaluate_class(p, index, L);
  EXPECT_EQ(r.n_tp, 1u);
  EXPECT_DOUBLE_EQ(r.ap, 0.5);
}

TEST(EvaluateDetections, ApDoesNotIncreaseWithIouThreshold) {
  std::mt19937_64 gen(41);
  std::uniform_real_distribution<double> u(0, 80);
  for (int t = 0; t < 100; ++t) {
    std::vector<annotation_record> rs;
    std::vector<prediction> p;
    for (int i = 0; i < 5; ++i) {
      const std::string img = "i" + std::to_string(i);
      for (int k = 0; k < 3; ++k) {
        const double x = u(gen), y = u(gen);
        rs.push_back(rec(img, "A", L, {x, y, x + 20, y + 20}));
        p.push_back(pred(img, std::round(u(gen)) / 80.0, {x + u(gen) / 8, y + u(gen) / 8, x + 20 + u(gen) / 8, y + 20}));
      }
    }
    const auto index = fixtures::index_of(rs);
    double prev = 2;
    for (double thr : {0.1, 0.3, 0.5, 0.7, 0.9}) {
      const double ap = evaluate_class(p, index, L, thr).ap;
      EXPECT_LE(ap, prev + 1e-12);
      prev = ap;
    }
  }
}
