#include <benchmark/benchmark.h>

#include "cxr_audit/dicom_meta.hpp"
#include "cxr_audit/metadata_audit.hpp"
#include "cxr_audit/synthgen.hpp"

using namespace cxr_audit;

namespace {

const synth::synthetic_corpus& corpus() {
  static const auto c = synth::build_corpus(synth::corpus_spec::flawed_metadata());
  return c;
}

void BM_ParseHeader(benchmark::State& state) {
  const auto& dicoms = corpus().dicoms;
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& d = dicoms[i++ % dicoms.size()];
    benchmark::DoNotOptimize(parse_dicom_header(d.bytes, d.image_id));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ParseHeader);

void BM_ValidityReport(benchmark::State& state) {
  std::vector<scan_entry> entries;
  for (const auto& d : corpus().dicoms) entries.push_back({d.image_id, {}, parse_dicom_header(d.bytes, d.image_id)});
  for (auto _ : state) benchmark::DoNotOptimize(metadata_validity_report(entries));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(entries.size()));
}
BENCHMARK(BM_ValidityReport);

}  // namespace

BENCHMARK_MAIN();
