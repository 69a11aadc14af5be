#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rdpscope/errors.hpp"

namespace rdpscope {

enum class LearnerKind { Knn, DecisionTree, RandomForest, AdaBoost };

std::string_view learner_kind_name(LearnerKind kind);
LearnerKind learner_kind_from_name(std::string_view name);  // throws ConfigError

// A learner recipe. Only the fields of the chosen kind matter.
struct ModelSpec {
  LearnerKind kind = LearnerKind::Knn;
  int neighbors = 5;        // kNN
  int max_depth = 12;       // tree (and the trees inside the forest)
  int min_leaf = 2;
  int tree_count = 100;     // forest
  int mtry = 0;             // forest attribute subsample per split; 0 = ceil(sqrt(d))
  int rounds = 100;         // AdaBoost
  std::uint64_t seed = 0;

  static ModelSpec knn(int k = 5, std::uint64_t seed = 0);
  static ModelSpec decision_tree(int max_depth = 12, int min_leaf = 2, std::uint64_t seed = 0);
  static ModelSpec random_forest(int trees = 100, int mtry = 0, std::uint64_t seed = 0);
  static ModelSpec adaboost(int rounds = 100, std::uint64_t seed = 0);

  std::string to_string() const;
};

// Row-major training data; every row aligned to one attribute list.
using Rows = std::vector<std::vector<double>>;

// A trained binary classifier. score() is in [0, 1]; predict() thresholds at
// 0.5. Models are immutable after training and safe to share across threads.
class TrainedModel {
 public:
  virtual ~TrainedModel() = default;

  virtual double score(std::span<const double> row) const = 0;
  bool predict(std::span<const double> row) const { return score(row) >= 0.5; }

  const ModelSpec& spec() const { return spec_; }
  const std::vector<std::string>& schema() const { return schema_; }

  std::string to_json() const;  // versioned manifest
  static std::unique_ptr<TrainedModel> from_json(std::string_view text);

 protected:
  TrainedModel(ModelSpec spec, std::vector<std::string> schema)
      : spec_(spec), schema_(std::move(schema)) {}

  ModelSpec spec_;
  std::vector<std::string> schema_;
};

// Trains one model. Throws EmptyData (< 2 rows), SingleClassData (one class
// only, for everything but kNN), ArityMismatch on ragged rows.
std::unique_ptr<TrainedModel> train(const ModelSpec& spec, const Rows& data,
                                    const std::vector<bool>& labels,
                                    std::vector<std::string> schema = {});

// Confusion counts plus the derived percentages. Zero denominators yield 0
// and set the corresponding flag.
struct Metrics {
  std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;
  double accuracy = 0, precision = 0, recall = 0, f1 = 0;
  bool precision_zero_denominator = false;
  bool recall_zero_denominator = false;
};

// accuracy = 100 (tp+tn)/total, precision = 100 tp/(tp+fp),
// recall = 100 tp/(tp+fn), f1 = 2PR/(P+R). Throws EmptyConfusion when the
// total is zero (or any count is negative).
Metrics compute_metrics(std::int64_t tp, std::int64_t fp, std::int64_t tn, std::int64_t fn);

// Stratified fold assignment: fold_of[i] in [0, folds); per-fold class
// counts differ by at most 1 from proportional. Throws StratificationError.
std::vector<int> stratified_folds(const std::vector<bool>& labels, int folds, std::uint64_t seed);

struct CrossValidation {
  std::vector<Metrics> folds;
  double mean_accuracy = 0;
  double std_accuracy = 0;  // sample standard deviation over folds
  double mean_precision = 0;
  double mean_recall = 0;
  double mean_f1 = 0;
};

// Stratified k-fold cross-validation of one spec. Throws StratificationError
// when folds < 2 or either class has fewer than `folds` members.
CrossValidation cross_validate(const ModelSpec& spec, const Rows& data,
                               const std::vector<bool>& labels, int folds, std::uint64_t seed);

}  // namespace rdpscope
