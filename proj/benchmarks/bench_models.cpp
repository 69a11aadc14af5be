#include <benchmark/benchmark.h>

#include "rdpscope/learners.hpp"
#include "rdpscope/random.hpp"
#include "rdpscope/shapley.hpp"

using namespace rdpscope;

namespace {

void make_blobs(std::size_t n, std::size_t d, Rng& rng, Rows& rows, std::vector<bool>& labels) {
  rows.assign(n, std::vector<double>(d));
  labels.assign(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    const bool positive = i % 2 == 0;
    labels[i] = positive;
    for (double& v : rows[i]) v = rng.gaussian() + (positive ? 1.5 : -1.5);
  }
}

void BM_TrainForest(benchmark::State& state) {
  Rng rng(1);
  Rows rows;
  std::vector<bool> labels;
  make_blobs(static_cast<std::size_t>(state.range(0)), 20, rng, rows, labels);
  for (auto _ : state) {
    benchmark::DoNotOptimize(train(ModelSpec::random_forest(100, 0, 7), rows, labels));
  }
}
BENCHMARK(BM_TrainForest)->Arg(256)->Arg(512);

void BM_TrainAdaBoost(benchmark::State& state) {
  Rng rng(2);
  Rows rows;
  std::vector<bool> labels;
  make_blobs(static_cast<std::size_t>(state.range(0)), 20, rng, rows, labels);
  for (auto _ : state) {
    benchmark::DoNotOptimize(train(ModelSpec::adaboost(100, 7), rows, labels));
  }
}
BENCHMARK(BM_TrainAdaBoost)->Arg(256)->Arg(512);

void BM_ForestPredict(benchmark::State& state) {
  Rng rng(3);
  Rows rows;
  std::vector<bool> labels;
  make_blobs(512, 20, rng, rows, labels);
  const auto model = train(ModelSpec::random_forest(100, 0, 7), rows, labels);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(model->score(rows[i++ % rows.size()]));
  }
}
BENCHMARK(BM_ForestPredict);

void BM_ShapleySampled(benchmark::State& state) {
  Rng rng(4);
  Rows rows;
  std::vector<bool> labels;
  make_blobs(128, 20, rng, rows, labels);
  const auto model = train(ModelSpec::decision_tree(), rows, labels);
  ShapleyOptions opt;
  opt.samples_per_row = 16;
  opt.max_targets = 16;
  opt.max_background = 16;
  for (auto _ : state) {
    benchmark::DoNotOptimize(shapley_rank(*model, rows, rows, opt));
  }
}
BENCHMARK(BM_ShapleySampled);

}  // namespace
