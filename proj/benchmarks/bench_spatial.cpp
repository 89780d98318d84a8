#include <benchmark/benchmark.h>

#include "cxr_audit/dicom_meta.hpp"
#include "cxr_audit/spatial.hpp"
#include "cxr_audit/synthgen.hpp"

using namespace cxr_audit;

namespace {

void BM_DepositBox(benchmark::State& state) {
  const auto mode = state.range(0) ? deposit_mode::area_weighted : deposit_mode::binary;
  heatmap h = make_heatmap(class_label::nodule_mass, {64, 64});
  for (auto _ : state) {
    deposit_box(h, {120.5, 300.25, 610.75, 880.5}, 1024, 1024, mode);
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_DepositBox)->Arg(0)->Arg(1);

void BM_AccumulateAndScore(benchmark::State& state) {
  const auto corpus = synth::build_corpus(synth::corpus_spec::flawed_metadata());
  const auto index = build_image_index(corpus.annotations);
  header_map headers;
  for (const auto& d : corpus.dicoms) headers[d.image_id] = parse_dicom_header(d.bytes, d.image_id);
  for (auto _ : state) {
    for (class_label l : lesion_labels()) {
      benchmark::DoNotOptimize(score_symmetry(accumulate_heatmap(index, headers, l)));
    }
  }
}
BENCHMARK(BM_AccumulateAndScore)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
