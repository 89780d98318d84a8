#include <benchmark/benchmark.h>

#include <random>

#include "cxr_audit/detection_eval.hpp"
#include "cxr_audit/synthgen.hpp"

using namespace cxr_audit;

namespace {

void BM_Iou(benchmark::State& state) {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(0, 500);
  std::vector<bbox> boxes;
  for (int i = 0; i < 1024; ++i) {
    const double x = u(gen), y = u(gen);
    boxes.push_back({x, y, x + 1 + u(gen) / 5, y + 1 + u(gen) / 5});
  }
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(iou(boxes[i % 1024], boxes[(i * 7 + 3) % 1024]));
    ++i;
  }
}
BENCHMARK(BM_Iou);

void BM_Match(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> u(0, 900);
  std::vector<bbox> gt;
  std::vector<prediction> preds;
  for (std::size_t k = 0; k < n; ++k) {
    const double x = u(gen), y = u(gen);
    gt.push_back({x, y, x + 60, y + 60});
    preds.push_back({"img", class_label::nodule_mass, u(gen) / 900, {x + 5, y + 5, x + 65, y + 65}});
  }
  for (auto _ : state) benchmark::DoNotOptimize(match_detections(preds, gt, kDefaultMatchIou));
  state.SetComplexityN(static_cast<std::int64_t>(n));
}
BENCHMARK(BM_Match)->RangeMultiplier(4)->Range(4, 256)->Complexity();

void BM_AveragePrecision(benchmark::State& state) {
  std::mt19937_64 gen(3);
  std::vector<scored_outcome> outcomes(static_cast<std::size_t>(state.range(0)));
  std::size_t tp = 0;
  for (auto& o : outcomes) {
    o.tp = gen() % 2;
    tp += o.tp;
  }
  for (auto _ : state) benchmark::DoNotOptimize(average_precision(outcomes, tp + 10));
}
BENCHMARK(BM_AveragePrecision)->Range(64, 1 << 16);

void BM_EvaluateDetections(benchmark::State& state) {
  const auto corpus = synth::build_corpus(synth::corpus_spec::flawed_metadata());
  const auto index = build_image_index(corpus.annotations);
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_detections(corpus.predictions, index));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(corpus.predictions.size()));
}
BENCHMARK(BM_EvaluateDetections)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
