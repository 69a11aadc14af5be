#include "rdpscope/ensemble.hpp"

#include <algorithm>
#include <numeric>

#include "json.hpp"

namespace rdpscope {

std::string_view transport_profile_name(TransportProfile profile) {
  return profile == TransportProfile::Tcp ? "tcp" : "udp";
}

EnsembleModel::EnsembleModel(TransportProfile profile, FeatureSchema row_schema)
    : profile_(profile), row_schema_(std::move(row_schema)) {
  for (std::size_t c = 0; c < 5; ++c) {
    committees_[c].class_name = std::string(kActivityNames[c]);
  }
}

LabelBits EnsembleModel::predict(std::span<const double> row) const {
  if (row.size() != row_schema_.size()) {
    throw SchemaMismatch("row arity " + std::to_string(row.size()) +
                         " does not match ensemble schema of " +
                         std::to_string(row_schema_.size()));
  }
  LabelBits bits{};
  std::vector<double> sub;
  for (std::size_t c = 0; c < 5; ++c) {
    const ClassCommittee& committee = committees_[c];
    sub.clear();
    sub.reserve(committee.attribute_indices.size());
    for (std::size_t idx : committee.attribute_indices) sub.push_back(row[idx]);
    int votes = 0;
    for (const auto& member : committee.members) {
      if (member->predict(sub)) ++votes;
    }
    bits[c] = votes >= 2;
  }
  return bits;
}

std::array<std::size_t, 3> select_committee(const std::vector<CandidateResult>& candidates) {
  if (candidates.size() < 3) {
    throw InsufficientModels("committee selection needs at least 3 evaluated specs, got " +
                             std::to_string(candidates.size()));
  }
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const CrossValidation& x = candidates[a].cv;
    const CrossValidation& y = candidates[b].cv;
    if (x.mean_precision != y.mean_precision) return x.mean_precision > y.mean_precision;
    if (x.mean_recall != y.mean_recall) return x.mean_recall > y.mean_recall;
    if (x.mean_f1 != y.mean_f1) return x.mean_f1 > y.mean_f1;
    return false;  // stable sort keeps candidate order
  });
  return {order[0], order[1], order[2]};
}

double ensemble_score(const std::vector<LabelBits>& predictions,
                      const std::vector<LabelBits>& truths) {
  if (predictions.size() != truths.size()) {
    throw ArityMismatch("prediction and truth lists differ in length");
  }
  std::int64_t points = 0;
  std::int64_t positives = 0;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    for (std::size_t c = 0; c < 5; ++c) {
      const bool predicted = predictions[i][c];
      const bool actual = truths[i][c];
      if (actual) ++positives;
      if (predicted && actual) points += 1;
      else if (predicted && !actual) points -= 2;
      // true negatives and false negatives score nothing
    }
  }
  if (positives == 0) throw NoPositives("test set has no positive labels");
  return 100.0 * static_cast<double>(points) / static_cast<double>(positives);
}

std::string EnsembleModel::to_json() const {
  nlohmann::json j;
  j["format"] = "rdp-ensemble-1";
  j["transport_profile"] = std::string(transport_profile_name(profile_));
  j["schema_version"] = row_schema_.version();
  j["schema"] = row_schema_.names();
  nlohmann::json classes = nlohmann::json::array();
  for (const ClassCommittee& committee : committees_) {
    nlohmann::json jc;
    jc["class"] = committee.class_name;
    jc["attributes"] = committee.attributes;
    nlohmann::json members = nlohmann::json::array();
    for (std::size_t m = 0; m < 3; ++m) {
      nlohmann::json jm;
      jm["precision"] = committee.member_precision[m];
      jm["spec"] = committee.member_specs[m].to_string();
      if (committee.members[m]) jm["model"] = nlohmann::json::parse(committee.members[m]->to_json());
      members.push_back(std::move(jm));
    }
    jc["members"] = std::move(members);
    classes.push_back(std::move(jc));
  }
  j["classes"] = std::move(classes);
  return j.dump(2);
}

}  // namespace rdpscope
