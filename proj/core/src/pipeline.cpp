#include "rdpscope/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>

#include "json.hpp"
#include "rdpscope/random.hpp"

namespace rdpscope {

namespace {

Rows table_rows(const FeatureTable& table) {
  Rows rows;
  rows.reserve(table.rows.size());
  for (const FeatureVector& fv : table.rows) rows.push_back(fv.values);
  return rows;
}

Rows subset_columns(const Rows& rows, const std::vector<std::size_t>& columns) {
  Rows out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    std::vector<double> sub;
    sub.reserve(columns.size());
    for (std::size_t c : columns) sub.push_back(row[c]);
    out.push_back(std::move(sub));
  }
  return out;
}

std::vector<bool> class_labels(const std::vector<FeatureVector>& rows, std::size_t cls) {
  std::vector<bool> y;
  y.reserve(rows.size());
  for (const FeatureVector& fv : rows) y.push_back(fv.labels[cls]);
  return y;
}

// Builds one class committee on already-augmented training rows: Shapley
// attribute selection, inner cross-validation of every candidate, top-3 by
// precision retrained on the full training set.
ClassCommittee build_committee(std::size_t cls, const Rows& full_train,
                               const std::vector<bool>& y, const FeatureSchema& full_schema,
                               const PipelineOptions& options, Rng& rng,
                               const std::vector<ModelSpec>& candidates) {
  ClassCommittee committee;
  committee.class_name = std::string(kActivityNames[cls]);

  ModelSpec backend = options.shapley_backend;
  backend.seed = rng.next();
  const auto backend_model = train(backend, full_train, y, full_schema.names());

  ShapleyOptions shapley = options.shapley;
  shapley.seed = rng.next();
  const AttributionReport report =
      shapley_rank(*backend_model, full_train, full_train, shapley, committee.class_name);
  std::vector<std::string> selected =
      select_attributes(report, options.select_mass, options.select_cap);
  if (selected.empty()) {
    // Degenerate attribution; keep the top of the ranking so training can
    // still proceed.
    const std::size_t fallback = std::min<std::size_t>(8, report.ranking.size());
    selected.assign(report.ranking.begin(), report.ranking.begin() + static_cast<long>(fallback));
  }
  committee.attributes = selected;
  committee.attribute_indices.reserve(selected.size());
  for (const std::string& name : selected) {
    committee.attribute_indices.push_back(full_schema.index_of(name));
  }

  const Rows sub_train = subset_columns(full_train, committee.attribute_indices);

  std::vector<CandidateResult> results;
  results.reserve(candidates.size());
  for (const ModelSpec& candidate : candidates) {
    ModelSpec spec = candidate;
    spec.seed = rng.next();
    CandidateResult r;
    r.spec = spec;
    r.cv = cross_validate(spec, sub_train, y, options.learner_folds, rng.next());
    results.push_back(std::move(r));
  }
  const std::array<std::size_t, 3> top = select_committee(results);
  for (std::size_t m = 0; m < 3; ++m) {
    const CandidateResult& r = results[top[m]];
    committee.member_specs[m] = r.spec;
    committee.member_precision[m] = r.cv.mean_precision;
    committee.members[m] = train(r.spec, sub_train, y, committee.attributes);
  }
  return committee;
}

std::string format_percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

std::vector<ModelSpec> PipelineOptions::default_candidates(std::uint64_t) {
  return {ModelSpec::knn(5), ModelSpec::decision_tree(12, 2), ModelSpec::random_forest(100, 0),
          ModelSpec::adaboost(100)};
}

std::vector<int> combination_folds(const std::vector<FeatureVector>& rows, int folds,
                                   std::uint64_t seed) {
  if (folds < 2) throw StratificationError("folds must be >= 2");
  std::map<LabelBits, std::vector<std::size_t>> by_combo;
  for (std::size_t i = 0; i < rows.size(); ++i) by_combo[rows[i].labels].push_back(i);

  Rng rng(seed);
  std::vector<int> fold_of(rows.size(), 0);
  int offset = 0;
  for (auto& [bits, members] : by_combo) {
    rng.shuffle(members);
    for (std::size_t i = 0; i < members.size(); ++i) {
      fold_of[members[i]] = static_cast<int>((i + static_cast<std::size_t>(offset)) %
                                             static_cast<std::size_t>(folds));
    }
    ++offset;  // stagger combos so small ones do not pile on fold 0
  }
  return fold_of;
}

EvaluationReport evaluate_dataset(const FeatureTable& base, const PipelineOptions& options) {
  if (base.rows.empty()) throw EmptyData("evaluation needs feature rows");
  const std::vector<ModelSpec> candidates =
      options.candidates.empty() ? PipelineOptions::default_candidates(options.seed)
                                 : options.candidates;

  EvaluationReport report;
  report.profile = options.profile;
  report.seed = options.seed;

  const std::vector<int> fold_of =
      combination_folds(base.rows, options.ensemble_folds, options.seed);

  std::array<std::int64_t, 5> tp{}, fp{}, tn{}, fn{};
  Rng rng(options.seed);

  for (int f = 0; f < options.ensemble_folds; ++f) {
    FeatureTable train_base{base.schema, {}};
    std::vector<const FeatureVector*> test_rows;
    for (std::size_t i = 0; i < base.rows.size(); ++i) {
      if (fold_of[i] == f) {
        test_rows.push_back(&base.rows[i]);
      } else {
        train_base.rows.push_back(base.rows[i]);
      }
    }
    if (train_base.rows.size() + test_rows.size() != base.rows.size()) {
      throw Error("fold partition lost rows");
    }

    Rng fold_rng = rng.fork(static_cast<std::uint64_t>(f));
    TransformOptions tf_options = options.transforms;
    tf_options.seed = fold_rng.next();
    const TransformSet transforms = fit_transforms(train_base, tf_options);
    if (transforms.fit_rows != train_base.rows.size()) {
      throw Error("transform stage saw rows outside the training fold");
    }

    const FeatureTable full_train = apply_transforms(transforms, train_base);
    const Rows train_rows = table_rows(full_train);

    EnsembleModel ensemble(options.profile, FeatureSchema::full());
    FoldDetail detail;
    for (std::size_t cls = 0; cls < 5; ++cls) {
      Rng class_rng = fold_rng.fork(cls);
      ClassCommittee committee =
          build_committee(cls, train_rows, class_labels(full_train.rows, cls),
                          full_train.schema, options, class_rng, candidates);
      CommitteeSummary& summary = detail.committees[cls];
      summary.class_name = committee.class_name;
      summary.attributes = committee.attributes;
      for (std::size_t m = 0; m < 3; ++m) {
        summary.member_specs[m] = committee.member_specs[m].to_string();
        summary.member_precisions[m] = committee.member_precision[m];
      }
      ensemble.committee(cls) = std::move(committee);
    }

    std::vector<LabelBits> predictions, truths;
    predictions.reserve(test_rows.size());
    truths.reserve(test_rows.size());
    for (const FeatureVector* row : test_rows) {
      FeatureVector augmented = *row;
      const std::vector<double> extra = transforms.derived(row->values);
      augmented.values.insert(augmented.values.end(), extra.begin(), extra.end());
      const LabelBits bits = ensemble.predict(augmented.values);
      predictions.push_back(bits);
      truths.push_back(row->labels);
      for (std::size_t cls = 0; cls < 5; ++cls) {
        if (bits[cls] && row->labels[cls]) ++tp[cls];
        else if (bits[cls] && !row->labels[cls]) ++fp[cls];
        else if (!bits[cls] && row->labels[cls]) ++fn[cls];
        else ++tn[cls];
      }
    }
    detail.score = ensemble_score(predictions, truths);
    report.fold_scores.push_back(detail.score);
    report.folds.push_back(std::move(detail));
  }

  for (std::size_t cls = 0; cls < 5; ++cls) {
    report.per_class[cls] = compute_metrics(tp[cls], fp[cls], tn[cls], fn[cls]);
  }
  double total = 0;
  for (double s : report.fold_scores) total += s;
  report.average_score = total / static_cast<double>(report.fold_scores.size());
  return report;
}

TrainedPipeline train_pipeline(const FeatureTable& base, const PipelineOptions& options) {
  if (base.rows.empty()) throw EmptyData("training needs feature rows");
  const std::vector<ModelSpec> candidates =
      options.candidates.empty() ? PipelineOptions::default_candidates(options.seed)
                                 : options.candidates;

  Rng rng(options.seed);
  TransformOptions tf_options = options.transforms;
  tf_options.seed = rng.next();
  TransformSet transforms = fit_transforms(base, tf_options);
  const FeatureTable full = apply_transforms(transforms, base);
  const Rows rows = table_rows(full);

  EnsembleModel ensemble(options.profile, FeatureSchema::full());
  for (std::size_t cls = 0; cls < 5; ++cls) {
    Rng class_rng = rng.fork(cls);
    ensemble.committee(cls) = build_committee(cls, rows, class_labels(full.rows, cls),
                                              full.schema, options, class_rng, candidates);
  }
  return TrainedPipeline{std::move(transforms), std::move(ensemble)};
}

LabelBits TrainedPipeline::predict_base_row(std::span<const double> base_row) const {
  std::vector<double> full(base_row.begin(), base_row.end());
  const std::vector<double> extra = transforms.derived(base_row);
  full.insert(full.end(), extra.begin(), extra.end());
  return ensemble.predict(full);
}

std::string EvaluationReport::render_text() const {
  std::string out;
  out += "Class               FP    TP    FN    TN     Accu.  Prec.   Rec.    F1\n";
  const std::string profile_name(transport_profile_name(profile));
  std::string upper = profile_name;
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  for (std::size_t cls = 0; cls < 5; ++cls) {
    const Metrics& m = per_class[cls];
    char line[160];
    std::string label = upper + " " + std::string(kActivityNames[cls]);
    std::snprintf(line, sizeof(line), "%-18s %5lld %5lld %5lld %5lld   %6.2f %6.2f %6.2f %6.2f\n",
                  label.c_str(), static_cast<long long>(m.fp), static_cast<long long>(m.tp),
                  static_cast<long long>(m.fn), static_cast<long long>(m.tn), m.accuracy,
                  m.precision, m.recall, m.f1);
    out += line;
  }
  out += "\nFold  Ensemble Score\n";
  for (std::size_t f = 0; f < fold_scores.size(); ++f) {
    char line[64];
    std::snprintf(line, sizeof(line), "%-5zu %s\n", f + 1, format_percent(fold_scores[f]).c_str());
    out += line;
  }
  out += "Avg   " + format_percent(average_score) + "\n";
  return out;
}

std::string EvaluationReport::to_json(const std::string& config_hash) const {
  nlohmann::json j;
  j["format"] = "rdp-evaluation-1";
  j["config_hash"] = config_hash;
  j["seed"] = seed;
  j["transport_profile"] = std::string(transport_profile_name(profile));
  nlohmann::json classes = nlohmann::json::array();
  for (std::size_t cls = 0; cls < 5; ++cls) {
    const Metrics& m = per_class[cls];
    classes.push_back(nlohmann::json{{"class", std::string(kActivityNames[cls])},
                                     {"tp", m.tp},
                                     {"fp", m.fp},
                                     {"tn", m.tn},
                                     {"fn", m.fn},
                                     {"accuracy", m.accuracy},
                                     {"precision", m.precision},
                                     {"recall", m.recall},
                                     {"f1", m.f1}});
  }
  j["classes"] = std::move(classes);
  j["fold_scores"] = fold_scores;
  j["average_score"] = average_score;
  nlohmann::json folds_json = nlohmann::json::array();
  for (const FoldDetail& fold : folds) {
    nlohmann::json jf;
    jf["score"] = fold.score;
    nlohmann::json committees = nlohmann::json::array();
    for (const CommitteeSummary& c : fold.committees) {
      committees.push_back(nlohmann::json{{"class", c.class_name},
                                          {"attributes", c.attributes},
                                          {"members", c.member_specs},
                                          {"precisions", c.member_precisions}});
    }
    jf["committees"] = std::move(committees);
    folds_json.push_back(std::move(jf));
  }
  j["folds"] = std::move(folds_json);
  return j.dump(2);
}

std::string TrainedPipeline::to_json(const std::string& config_hash) const {
  nlohmann::json j;
  j["format"] = "rdp-pipeline-1";
  j["config_hash"] = config_hash;
  j["dct_index"] = transforms.dct_index;
  j["standardizer"] = {{"mean", transforms.standardizer.mean},
                       {"scale", transforms.standardizer.scale}};
  j["svd"] = nlohmann::json::parse(transforms.svd.to_json());
  j["ica"] = nlohmann::json::parse(transforms.ica.to_json());
  j["ensemble"] = nlohmann::json::parse(ensemble.to_json());
  return j.dump(2);
}

}  // namespace rdpscope
