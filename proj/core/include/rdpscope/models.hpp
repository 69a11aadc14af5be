#pragma once

#include <vector>

#include "rdpscope/learners.hpp"
#include "rdpscope/transforms.hpp"
#include "rdpscope/tree.hpp"

namespace rdpscope {

// Concrete model classes. Most callers only need the TrainedModel interface;
// these are exposed for introspection (member votes, tree structure).

class KnnModel final : public TrainedModel {
 public:
  KnnModel(ModelSpec spec, std::vector<std::string> schema, Standardizer standardizer,
           Rows scaled_rows, std::vector<bool> labels);

  double score(std::span<const double> row) const override;

  const Standardizer& standardizer() const { return standardizer_; }
  const Rows& training_rows() const { return rows_; }
  const std::vector<bool>& training_labels() const { return labels_; }

 private:
  Standardizer standardizer_;
  Rows rows_;  // already standardized
  std::vector<bool> labels_;
};

class TreeModel final : public TrainedModel {
 public:
  TreeModel(ModelSpec spec, std::vector<std::string> schema, Cart tree);

  double score(std::span<const double> row) const override;
  const Cart& tree() const { return tree_; }
  Cart& mutable_tree() { return tree_; }

 private:
  Cart tree_;
};

class ForestModel final : public TrainedModel {
 public:
  ForestModel(ModelSpec spec, std::vector<std::string> schema, std::vector<Cart> trees);

  // Fraction of member trees voting positive.
  double score(std::span<const double> row) const override;
  bool tree_vote(std::size_t t, std::span<const double> row) const;
  const std::vector<Cart>& trees() const { return trees_; }
  std::vector<Cart>& mutable_trees() { return trees_; }

 private:
  std::vector<Cart> trees_;
};

class AdaBoostModel final : public TrainedModel {
 public:
  struct Round {
    Cart stump;
    double alpha = 0;
  };

  AdaBoostModel(ModelSpec spec, std::vector<std::string> schema, std::vector<Round> rounds,
                bool fallback_positive);

  // Weighted fraction of rounds voting positive.
  double score(std::span<const double> row) const override;
  const std::vector<Round>& rounds() const { return rounds_; }
  std::vector<Round>& mutable_rounds() { return rounds_; }
  bool fallback_positive() const { return fallback_positive_; }

 private:
  std::vector<Round> rounds_;
  bool fallback_positive_;  // constant answer when no usable round exists
};

}  // namespace rdpscope
