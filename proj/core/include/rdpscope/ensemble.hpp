#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "rdpscope/features.hpp"
#include "rdpscope/learners.hpp"

namespace rdpscope {

enum class TransportProfile { Tcp, Udp };

std::string_view transport_profile_name(TransportProfile profile);

// One evaluated candidate for a class committee.
struct CandidateResult {
  ModelSpec spec;
  CrossValidation cv;
};

// Three voting members for one activity class, all trained on the class's
// selected attribute subset.
struct ClassCommittee {
  std::string class_name;
  std::vector<std::string> attributes;           // subset of the full schema
  std::vector<std::size_t> attribute_indices;    // cached positions in the full schema
  std::array<std::unique_ptr<TrainedModel>, 3> members;
  std::array<double, 3> member_precision{};      // cross-validated mean precision
  std::array<ModelSpec, 3> member_specs{};
};

// Per-class 2-of-3 voting ensemble over the five activity classes.
class EnsembleModel {
 public:
  EnsembleModel(TransportProfile profile, FeatureSchema row_schema);

  TransportProfile profile() const { return profile_; }
  const FeatureSchema& row_schema() const { return row_schema_; }

  ClassCommittee& committee(std::size_t cls) { return committees_[cls]; }
  const ClassCommittee& committee(std::size_t cls) const { return committees_[cls]; }

  // Five independent class decisions: a class is present when at least two
  // of its three members predict it. Throws SchemaMismatch when the row does
  // not match the schema the ensemble was built on.
  LabelBits predict(std::span<const double> row) const;

  std::string to_json() const;  // manifest with inline member models

 private:
  TransportProfile profile_;
  FeatureSchema row_schema_;
  std::array<ClassCommittee, 5> committees_;
};

// Picks the 3 specs with highest mean cross-validated precision; ties break
// by recall, then F1, then candidate order. Returns indices into the
// candidate list. Throws InsufficientModels when fewer than 3 candidates.
std::array<std::size_t, 3> select_committee(const std::vector<CandidateResult>& candidates);

// The custom evaluation score: +1 per true positive, -2 per false positive,
// 0 otherwise, aggregated over all (row, class) pairs and normalized by the
// number of positive labels, times 100. Throws NoPositives / ArityMismatch.
double ensemble_score(const std::vector<LabelBits>& predictions,
                      const std::vector<LabelBits>& truths);

}  // namespace rdpscope
