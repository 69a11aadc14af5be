#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rdpscope/learners.hpp"
#include "rdpscope/random.hpp"

namespace rdpscope {

// One node of a binary CART tree; attribute == -1 marks a leaf. Rows with
// value <= threshold go left.
struct TreeNode {
  int attribute = -1;
  double threshold = 0;
  int left = -1;
  int right = -1;
  double positive_fraction = 0;
  std::size_t count = 0;
};

struct CartParams {
  int max_depth = 12;
  int min_leaf = 2;
  int mtry = 0;  // attributes sampled per split; 0 = all
};

// Weighted Gini CART. Split choice is deterministic: the first best-decrease
// split in (attribute order, ascending threshold) wins ties.
class Cart {
 public:
  static Cart grow(const Rows& data, const std::vector<bool>& labels,
                   const std::vector<double>& weights, const std::vector<std::size_t>& row_indices,
                   const CartParams& params, Rng* rng);

  // Positive fraction at the leaf the row falls into.
  double leaf_score(std::span<const double> row) const;

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::vector<TreeNode>& mutable_nodes() { return nodes_; }

 private:
  std::vector<TreeNode> nodes_;
};

}  // namespace rdpscope
