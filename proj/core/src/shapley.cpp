#include "rdpscope/shapley.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "rdpscope/features.hpp"
#include "rdpscope/random.hpp"

namespace rdpscope {

namespace {

void validate_rows(const Rows& rows, std::size_t d, const char* what) {
  for (const auto& r : rows) {
    if (r.size() != d) {
      throw SchemaMismatch(std::string(what) + " row arity " + std::to_string(r.size()) +
                           " != attribute count " + std::to_string(d));
    }
  }
}

Rows subsample(const Rows& rows, std::size_t cap, Rng& rng) {
  if (cap == 0 || rows.size() <= cap) return rows;
  Rows out;
  out.reserve(cap);
  for (std::size_t i : rng.sample_indices(rows.size(), cap)) out.push_back(rows[i]);
  return out;
}

// Exact Shapley values for one target row by subset enumeration:
//   phi_j = sum_{S not containing j} |S|!(d-|S|-1)!/d! (v(S u {j}) - v(S)),
// where v(S) composites the target on S over every background row and
// averages f. 2^d coalition values, memoized.
std::vector<double> exact_shapley(const ScoreFunction& f, const Rows& background,
                                  const std::vector<double>& target) {
  const std::size_t d = target.size();
  const std::size_t n_subsets = std::size_t{1} << d;

  std::vector<double> value(n_subsets, 0.0);
  std::vector<double> composite(d);
  for (std::size_t mask = 0; mask < n_subsets; ++mask) {
    double acc = 0;
    for (const auto& b : background) {
      for (std::size_t j = 0; j < d; ++j) {
        composite[j] = (mask >> j) & 1 ? target[j] : b[j];
      }
      acc += f(composite);
    }
    value[mask] = acc / static_cast<double>(background.size());
  }

  std::vector<double> factorial(d + 1, 1.0);
  for (std::size_t i = 1; i <= d; ++i) factorial[i] = factorial[i - 1] * static_cast<double>(i);

  std::vector<double> phi(d, 0.0);
  for (std::size_t mask = 0; mask < n_subsets; ++mask) {
    const auto s = static_cast<std::size_t>(std::popcount(mask));
    for (std::size_t j = 0; j < d; ++j) {
      if ((mask >> j) & 1) continue;
      const double weight = factorial[s] * factorial[d - s - 1] / factorial[d];
      phi[j] += weight * (value[mask | (std::size_t{1} << j)] - value[mask]);
    }
  }
  return phi;
}

// One Monte-Carlo estimate: average over sampled permutations of the
// marginal change when attribute j switches from a drawn background value to
// the target value, predecessors already switched.
std::vector<double> sampled_shapley(const ScoreFunction& f, const Rows& background,
                                    const std::vector<double>& target, int samples, Rng& rng) {
  const std::size_t d = target.size();
  std::vector<double> phi(d, 0.0);
  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> composite(d);

  for (int s = 0; s < samples; ++s) {
    const auto& base = background[rng.below(background.size())];
    rng.shuffle(order);
    composite = base;
    double previous = f(composite);
    for (std::size_t j : order) {
      composite[j] = target[j];
      const double current = f(composite);
      phi[j] += current - previous;
      previous = current;
    }
  }
  for (double& v : phi) v /= static_cast<double>(samples);
  return phi;
}

}  // namespace

AttributionReport shapley_rank(const ScoreFunction& f, const Rows& background, const Rows& targets,
                               const std::vector<std::string>& attribute_names,
                               const ShapleyOptions& options, std::string class_name) {
  if (background.empty()) throw EmptyBackground("background set is empty");
  const std::size_t d = attribute_names.size();
  if (d == 0) throw SchemaMismatch("no attributes to attribute over");
  validate_rows(background, d, "background");
  validate_rows(targets, d, "target");
  if (options.exact && d > 16) {
    throw SchemaMismatch("exact enumeration supports at most 16 attributes, got " +
                         std::to_string(d));
  }
  if (!options.exact && options.samples_per_row < 1) {
    throw ConfigError("samples_per_row must be >= 1");
  }

  Rng rng(options.seed);
  const Rows bg = subsample(background, options.max_background, rng);
  const Rows tg = subsample(targets, options.max_targets, rng);

  AttributionReport report;
  report.class_name = std::move(class_name);
  report.per_attribute.resize(d);
  for (std::size_t j = 0; j < d; ++j) {
    report.per_attribute[j].name = attribute_names[j];
    report.per_attribute[j].per_row.reserve(tg.size());
  }

  for (std::size_t t = 0; t < tg.size(); ++t) {
    Rng row_rng = rng.fork(t);
    const std::vector<double> phi =
        options.exact ? exact_shapley(f, bg, tg[t])
                      : sampled_shapley(f, bg, tg[t], options.samples_per_row, row_rng);
    for (std::size_t j = 0; j < d; ++j) report.per_attribute[j].per_row.push_back(phi[j]);
  }

  double total = 0;
  for (std::size_t j = 0; j < d; ++j) {
    double acc = 0;
    for (double v : report.per_attribute[j].per_row) acc += std::abs(v);
    report.per_attribute[j].mean_abs_contribution =
        tg.empty() ? 0.0 : acc / static_cast<double>(tg.size());
    total += report.per_attribute[j].mean_abs_contribution;
  }
  report.degenerate = total <= 0;

  // Rank by mean |contribution|, schema order on ties (stable).
  std::vector<std::size_t> idx(d);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return report.per_attribute[a].mean_abs_contribution >
           report.per_attribute[b].mean_abs_contribution;
  });
  report.ranking.reserve(d);
  for (std::size_t j : idx) report.ranking.push_back(attribute_names[j]);
  return report;
}

AttributionReport shapley_rank(const TrainedModel& model, const Rows& background,
                               const Rows& targets, const ShapleyOptions& options,
                               std::string class_name) {
  return shapley_rank([&model](std::span<const double> row) { return model.score(row); },
                      background, targets, model.schema(), options, std::move(class_name));
}

std::vector<std::string> select_attributes(const AttributionReport& report, double mass,
                                           std::size_t cap) {
  if (report.degenerate || report.per_attribute.empty()) return {};
  double total = 0;
  for (const auto& a : report.per_attribute) total += a.mean_abs_contribution;

  std::vector<std::pair<std::string, double>> ranked;
  ranked.reserve(report.ranking.size());
  for (const std::string& name : report.ranking) {
    for (const auto& a : report.per_attribute) {
      if (a.name == name) {
        ranked.emplace_back(name, a.mean_abs_contribution);
        break;
      }
    }
  }

  std::vector<std::string> selected;
  double cum = 0;
  for (const auto& [name, contribution] : ranked) {
    if (selected.size() >= cap) break;
    selected.push_back(name);
    cum += contribution;
    if (cum / total >= mass) break;
  }
  return selected;
}

std::string AttributionReport::to_csv() const {
  std::string out = "attribute,mean_abs_contribution,rank\n";
  for (std::size_t rank = 0; rank < ranking.size(); ++rank) {
    const std::string& name = ranking[rank];
    double value = 0;
    for (const auto& a : per_attribute) {
      if (a.name == name) {
        value = a.mean_abs_contribution;
        break;
      }
    }
    out += name + "," + format_real(value) + "," + std::to_string(rank + 1) + "\n";
  }
  return out;
}

}  // namespace rdpscope
