#include <benchmark/benchmark.h>

#include "rdpscope/features.hpp"
#include "rdpscope/random.hpp"
#include "rdpscope/synthgen.hpp"
#include "rdpscope/transforms.hpp"
#include "support.hpp"

using namespace rdpscope;

namespace {

Window busy_window() {
  ActivityProfile p;
  p.activities[static_cast<int>(Activity::Notepad)] = true;
  p.activities[static_cast<int>(Activity::Download)] = true;
  p.typing_rate = 5.0;
  p.download_throughput = 200'000;
  p.seed = 1;
  const SyntheticTrace trace = generate_trace(p);
  const auto parsed = parse_pcap(trace.pcap, synth_local_endpoint());
  auto windows = segment_windows(assemble_conversations(parsed.records));
  return windows.at(0);
}

void BM_ParseTrace(benchmark::State& state) {
  ActivityProfile p;
  p.activities[static_cast<int>(Activity::Download)] = true;
  p.download_throughput = 500'000;
  p.seed = 2;
  const SyntheticTrace trace = generate_trace(p);
  for (auto _ : state) {
    benchmark::DoNotOptimize(parse_pcap(trace.pcap, synth_local_endpoint()));
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * trace.pcap.size()));
}
BENCHMARK(BM_ParseTrace);

void BM_BaseFeatures(benchmark::State& state) {
  const Window w = busy_window();
  for (auto _ : state) {
    benchmark::DoNotOptimize(compute_base_features(w));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * w.packet_count()));
}
BENCHMARK(BM_BaseFeatures);

void BM_DctRow(benchmark::State& state) {
  Rng rng(3);
  std::vector<double> row(87);
  for (double& v : row) v = rng.gaussian();
  for (auto _ : state) {
    benchmark::DoNotOptimize(dct_component(row, 1));
  }
}
BENCHMARK(BM_DctRow);

void BM_FitTransforms(benchmark::State& state) {
  Rng rng(4);
  FeatureTable base;
  base.schema = FeatureSchema::base();
  for (int i = 0; i < static_cast<int>(state.range(0)); ++i) {
    FeatureVector fv;
    fv.values.resize(base.schema.size());
    for (double& v : fv.values) v = rng.gaussian();
    base.rows.push_back(std::move(fv));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_transforms(base));
  }
}
BENCHMARK(BM_FitTransforms)->Arg(128)->Arg(512);

}  // namespace

BENCHMARK_MAIN();
