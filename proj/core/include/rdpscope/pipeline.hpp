#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "rdpscope/ensemble.hpp"
#include "rdpscope/shapley.hpp"
#include "rdpscope/transforms.hpp"

namespace rdpscope {

// End-to-end modeling options. Every random choice derives from `seed`.
struct PipelineOptions {
  TransportProfile profile = TransportProfile::Tcp;
  int ensemble_folds = 5;   // outer evaluation folds
  int learner_folds = 10;   // inner folds for committee selection
  std::uint64_t seed = 1;
  TransformOptions transforms;
  double select_mass = 0.90;
  std::size_t select_cap = 20;
  ModelSpec shapley_backend = ModelSpec::random_forest(24, 0, 0);
  ShapleyOptions shapley{/*samples_per_row=*/16, /*seed=*/0, /*exact=*/false,
                         /*max_background=*/24, /*max_targets=*/80};
  std::vector<ModelSpec> candidates;  // empty = the 4 default learners

  static std::vector<ModelSpec> default_candidates(std::uint64_t seed);
};

struct CommitteeSummary {
  std::string class_name;
  std::vector<std::string> attributes;
  std::array<std::string, 3> member_specs;
  std::array<double, 3> member_precisions{};
};

struct FoldDetail {
  double score = 0;
  std::array<CommitteeSummary, 5> committees;
};

// The evaluation artifact: per-class pooled confusion metrics over the outer
// folds plus the per-fold ensemble scores and their average.
struct EvaluationReport {
  TransportProfile profile = TransportProfile::Tcp;
  std::uint64_t seed = 0;
  std::array<Metrics, 5> per_class;
  std::vector<double> fold_scores;
  double average_score = 0;
  std::vector<FoldDetail> folds;

  std::string render_text() const;
  std::string to_json(const std::string& config_hash) const;
};

// Outer-fold cross-validated evaluation of the full pipeline on base
// (untransformed) features. Derived attributes, attribute selection and
// committee training all happen inside each training fold; held-out rows are
// only ever projected.
EvaluationReport evaluate_dataset(const FeatureTable& base, const PipelineOptions& options);

// A deployable detector: the fitted transform stage plus the voting
// ensembles, trained on all provided rows.
struct TrainedPipeline {
  TransformSet transforms;
  EnsembleModel ensemble;

  LabelBits predict_base_row(std::span<const double> base_row) const;
  std::string to_json(const std::string& config_hash) const;
};

TrainedPipeline train_pipeline(const FeatureTable& base, const PipelineOptions& options);

// Outer fold assignment grouped by label combination so that every
// combination spreads near-evenly across folds.
std::vector<int> combination_folds(const std::vector<FeatureVector>& rows, int folds,
                                   std::uint64_t seed);

}  // namespace rdpscope
