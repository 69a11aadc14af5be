#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rdpscope/learners.hpp"

namespace rdpscope {

// Positive-class score of the model under attribution.
using ScoreFunction = std::function<double(std::span<const double>)>;

struct ShapleyOptions {
  int samples_per_row = 50;    // permutations sampled per target row (MC mode)
  std::uint64_t seed = 0;
  bool exact = false;          // subset enumeration; attribute count must be small
  std::size_t max_background = 256;  // background rows kept (seeded subsample)
  std::size_t max_targets = 0;       // 0 = attribute every target row
};

struct AttributeAttribution {
  std::string name;
  double mean_abs_contribution = 0;
  std::vector<double> per_row;  // signed contribution per attributed target row
};

struct AttributionReport {
  std::string class_name;
  std::vector<AttributeAttribution> per_attribute;  // schema order
  std::vector<std::string> ranking;                 // by mean |contribution|, descending
  bool degenerate = false;                          // all contributions zero

  std::string to_csv() const;  // attribute,mean_abs_contribution,rank
};

// Shapley attribution of f over the attributes. Monte-Carlo permutation
// sampling by default; exact subset enumeration (<= 16 attributes) computes
// the exact value against the whole background mean. Contributions of a row
// sum to f(row) - mean_background(f) in exact mode. Throws EmptyBackground,
// SchemaMismatch on ragged arities.
AttributionReport shapley_rank(const ScoreFunction& f, const Rows& background, const Rows& targets,
                               const std::vector<std::string>& attribute_names,
                               const ShapleyOptions& options = {}, std::string class_name = {});

// Convenience overload scoring with a trained model.
AttributionReport shapley_rank(const TrainedModel& model, const Rows& background,
                               const Rows& targets, const ShapleyOptions& options = {},
                               std::string class_name = {});

// The shortest ranking prefix reaching `mass` of the total mean
// |contribution|, truncated at `cap`. All-zero reports select nothing (the
// report's degenerate flag is set by shapley_rank).
std::vector<std::string> select_attributes(const AttributionReport& report, double mass = 0.90,
                                           std::size_t cap = 20);

}  // namespace rdpscope
