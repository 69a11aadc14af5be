#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rdpscope/windowing.hpp"

namespace rdpscope {

namespace detail {
struct StringHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view s) const noexcept {
    return std::hash<std::string_view>{}(s);
  }
};
}  // namespace detail

// Ordered, versioned attribute name list. Attribute strings are part of the
// on-disk CSV contract and never change spelling.
class FeatureSchema {
 public:
  FeatureSchema() = default;
  FeatureSchema(std::string version, std::vector<std::string> names);

  // The 87 per-window traffic attributes (flow statistics, frame-length
  // bins, PUSH counters).
  static const FeatureSchema& base();
  // base() plus the derived attributes: dct_col, svd0..svd19, ica0..ica19.
  static const FeatureSchema& full();

  const std::string& version() const { return version_; }
  const std::vector<std::string>& names() const { return names_; }
  std::size_t size() const { return names_.size(); }
  const std::string& name(std::size_t i) const { return names_[i]; }

  std::optional<std::size_t> find(std::string_view name) const;
  std::size_t index_of(std::string_view name) const;  // throws SchemaMismatch

  // Schema restricted to the given names (kept in the given order).
  FeatureSchema subset(const std::vector<std::string>& names) const;

  bool operator==(const FeatureSchema& other) const {
    return version_ == other.version_ && names_ == other.names_;
  }

 private:
  std::string version_;
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t, detail::StringHash, std::equal_to<>> index_;
};

// One row of a feature matrix, aligned to some FeatureSchema.
struct FeatureVector {
  std::vector<double> values;
  std::int64_t window_start_us = 0;
  LabelBits labels{};
};

// Schema + rows; the in-memory form of a feature CSV.
struct FeatureTable {
  FeatureSchema schema;
  std::vector<FeatureVector> rows;
};

struct FlowStatsOptions {
  std::int64_t activity_timeout_us = 5'000'000;  // active/idle split
  std::int64_t bulk_gap_us = 1'000'000;
  int bulk_min_packets = 4;
  std::int64_t subflow_gap_us = 1'000'000;
};

// Fills the flow-meter attribute block of base(): packet-length and
// inter-arrival statistics, rates, flag counts, header totals, initial TCP
// windows, active/idle, subflow and bulk averages, totals. Frame bins and
// PUSH counters stay zero. Throws EmptyWindow.
FeatureVector compute_flow_features(const Window& window, const FlowStatsOptions& options = {});

// Fills the frame-length bins (inclusive bounds on the on-wire frame length;
// overlapping bins each increment) and the per-direction PSH frame counters.
// Throws EmptyWindow.
FeatureVector compute_rdp_markers(const Window& window);

// Both blocks in one row.
FeatureVector compute_base_features(const Window& window, const FlowStatsOptions& options = {});

// CSV with header = schema names + the 5 label columns, one row per vector,
// reals at 17 significant digits. Optional "# key=value" comment lines go
// first. Throws SchemaMismatch on arity errors.
std::string export_features(const std::vector<FeatureVector>& vectors, const FeatureSchema& schema,
                            const std::vector<std::pair<std::string, std::string>>& meta = {});

// Inverse of export_features; leading comment lines are skipped.
FeatureTable read_feature_csv(std::string_view content);

// Deterministic float formatting used by every CSV writer (17 significant
// digits, enough to round-trip a double).
std::string format_real(double v);

}  // namespace rdpscope
