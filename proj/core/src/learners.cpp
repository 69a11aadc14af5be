#include "rdpscope/learners.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json.hpp"
#include "rdpscope/models.hpp"
#include "rdpscope/random.hpp"

namespace rdpscope {

namespace {

void validate_training_input(const Rows& data, const std::vector<bool>& labels) {
  if (data.size() < 2) {
    throw EmptyData("training requires at least 2 rows, got " + std::to_string(data.size()));
  }
  if (labels.size() != data.size()) {
    throw ArityMismatch("labels size " + std::to_string(labels.size()) + " != rows " +
                        std::to_string(data.size()));
  }
  const std::size_t d = data[0].size();
  if (d == 0) throw EmptyData("rows have no attributes");
  for (const auto& row : data) {
    if (row.size() != d) throw ArityMismatch("ragged training rows");
  }
}

bool single_class(const std::vector<bool>& labels) {
  return std::all_of(labels.begin(), labels.end(), [](bool b) { return b; }) ||
         std::all_of(labels.begin(), labels.end(), [](bool b) { return !b; });
}

Eigen::MatrixXd rows_to_matrix(const Rows& data) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(data.size()),
                    static_cast<Eigen::Index>(data[0].size()));
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t j = 0; j < data[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = data[i][j];
    }
  }
  return m;
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return idx;
}

std::unique_ptr<TrainedModel> train_knn(const ModelSpec& spec, const Rows& data,
                                        const std::vector<bool>& labels,
                                        std::vector<std::string> schema) {
  if (spec.neighbors < 1) throw ConfigError("kNN requires neighbors >= 1");
  const Standardizer st = Standardizer::fit(rows_to_matrix(data));
  Rows scaled;
  scaled.reserve(data.size());
  for (const auto& row : data) scaled.push_back(st.apply(row));
  return std::make_unique<KnnModel>(spec, std::move(schema), st, std::move(scaled), labels);
}

std::unique_ptr<TrainedModel> train_tree(const ModelSpec& spec, const Rows& data,
                                         const std::vector<bool>& labels,
                                         std::vector<std::string> schema) {
  if (single_class(labels)) throw SingleClassData("decision tree needs both classes");
  const std::vector<double> weights(data.size(), 1.0);
  CartParams params{spec.max_depth, spec.min_leaf, 0};
  Cart tree = Cart::grow(data, labels, weights, all_indices(data.size()), params, nullptr);
  return std::make_unique<TreeModel>(spec, std::move(schema), std::move(tree));
}

std::unique_ptr<TrainedModel> train_forest(const ModelSpec& spec, const Rows& data,
                                           const std::vector<bool>& labels,
                                           std::vector<std::string> schema) {
  if (single_class(labels)) throw SingleClassData("random forest needs both classes");
  if (spec.tree_count < 1) throw ConfigError("forest requires tree_count >= 1");
  const std::size_t d = data[0].size();
  const int mtry = spec.mtry > 0
                       ? spec.mtry
                       : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(d))));
  const std::vector<double> weights(data.size(), 1.0);
  Rng root(spec.seed);
  std::vector<Cart> trees;
  trees.reserve(static_cast<std::size_t>(spec.tree_count));
  for (int t = 0; t < spec.tree_count; ++t) {
    Rng tree_rng = root.fork(static_cast<std::uint64_t>(t));
    std::vector<std::size_t> boot(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
      boot[i] = static_cast<std::size_t>(tree_rng.below(data.size()));
    }
    std::sort(boot.begin(), boot.end());
    CartParams params{spec.max_depth, spec.min_leaf, mtry};
    trees.push_back(Cart::grow(data, labels, weights, boot, params, &tree_rng));
  }
  return std::make_unique<ForestModel>(spec, std::move(schema), std::move(trees));
}

std::unique_ptr<TrainedModel> train_adaboost(const ModelSpec& spec, const Rows& data,
                                             const std::vector<bool>& labels,
                                             std::vector<std::string> schema) {
  if (single_class(labels)) throw SingleClassData("AdaBoost needs both classes");
  if (spec.rounds < 1) throw ConfigError("AdaBoost requires rounds >= 1");
  const std::size_t n = data.size();
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  const auto indices = all_indices(n);

  std::vector<AdaBoostModel::Round> rounds;
  for (int t = 0; t < spec.rounds; ++t) {
    CartParams params{1, 1, 0};  // depth-1 stump
    Cart stump = Cart::grow(data, labels, w, indices, params, nullptr);

    double err = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool h = stump.leaf_score(data[i]) >= 0.5;
      if (h != labels[i]) err += w[i];
    }
    // SAMME weighting with two classes: alpha = ln((1 - err) / err).
    if (err >= 0.5 - 1e-12) break;
    const double safe_err = std::max(err, 1e-12);
    const double alpha = std::log((1.0 - safe_err) / safe_err);
    rounds.push_back(AdaBoostModel::Round{std::move(stump), alpha});
    if (err <= 1e-12) break;  // perfect stump, later rounds add nothing

    double total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool h = rounds.back().stump.leaf_score(data[i]) >= 0.5;
      if (h != labels[i]) w[i] *= std::exp(alpha);
      total += w[i];
    }
    for (double& wi : w) wi /= total;
  }

  std::size_t positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), true));
  const bool fallback = positives * 2 >= n;
  return std::make_unique<AdaBoostModel>(spec, std::move(schema), std::move(rounds), fallback);
}

}  // namespace

std::string_view learner_kind_name(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::Knn: return "knn";
    case LearnerKind::DecisionTree: return "tree";
    case LearnerKind::RandomForest: return "forest";
    case LearnerKind::AdaBoost: return "adaboost";
  }
  return "unknown";
}

LearnerKind learner_kind_from_name(std::string_view name) {
  if (name == "knn") return LearnerKind::Knn;
  if (name == "tree") return LearnerKind::DecisionTree;
  if (name == "forest") return LearnerKind::RandomForest;
  if (name == "adaboost") return LearnerKind::AdaBoost;
  throw ConfigError("unknown learner kind: " + std::string(name));
}

ModelSpec ModelSpec::knn(int k, std::uint64_t seed) {
  ModelSpec s;
  s.kind = LearnerKind::Knn;
  s.neighbors = k;
  s.seed = seed;
  return s;
}
ModelSpec ModelSpec::decision_tree(int max_depth, int min_leaf, std::uint64_t seed) {
  ModelSpec s;
  s.kind = LearnerKind::DecisionTree;
  s.max_depth = max_depth;
  s.min_leaf = min_leaf;
  s.seed = seed;
  return s;
}
ModelSpec ModelSpec::random_forest(int trees, int mtry, std::uint64_t seed) {
  ModelSpec s;
  s.kind = LearnerKind::RandomForest;
  s.tree_count = trees;
  s.mtry = mtry;
  s.seed = seed;
  return s;
}
ModelSpec ModelSpec::adaboost(int rounds, std::uint64_t seed) {
  ModelSpec s;
  s.kind = LearnerKind::AdaBoost;
  s.rounds = rounds;
  s.seed = seed;
  return s;
}

std::string ModelSpec::to_string() const {
  std::string out(learner_kind_name(kind));
  switch (kind) {
    case LearnerKind::Knn: out += "(k=" + std::to_string(neighbors) + ")"; break;
    case LearnerKind::DecisionTree:
      out += "(depth=" + std::to_string(max_depth) + ",min_leaf=" + std::to_string(min_leaf) + ")";
      break;
    case LearnerKind::RandomForest:
      out += "(trees=" + std::to_string(tree_count) + ",mtry=" + std::to_string(mtry) + ")";
      break;
    case LearnerKind::AdaBoost: out += "(rounds=" + std::to_string(rounds) + ")"; break;
  }
  return out;
}

KnnModel::KnnModel(ModelSpec spec, std::vector<std::string> schema, Standardizer standardizer,
                   Rows scaled_rows, std::vector<bool> labels)
    : TrainedModel(spec, std::move(schema)),
      standardizer_(std::move(standardizer)),
      rows_(std::move(scaled_rows)),
      labels_(std::move(labels)) {}

double KnnModel::score(std::span<const double> row) const {
  const std::vector<double> q = standardizer_.apply(row);
  const std::size_t n = rows_.size();
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(spec_.neighbors), n);

  // Distance ties break by row order.
  std::vector<std::pair<double, std::size_t>> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0;
    for (std::size_t j = 0; j < q.size(); ++j) {
      const double diff = rows_[i][j] - q[j];
      acc += diff * diff;
    }
    dist[i] = {acc, i};
  }
  std::partial_sort(dist.begin(), dist.begin() + static_cast<long>(k), dist.end());
  std::size_t pos = 0;
  for (std::size_t i = 0; i < k; ++i) {
    if (labels_[dist[i].second]) ++pos;
  }
  return static_cast<double>(pos) / static_cast<double>(k);
}

TreeModel::TreeModel(ModelSpec spec, std::vector<std::string> schema, Cart tree)
    : TrainedModel(spec, std::move(schema)), tree_(std::move(tree)) {}

double TreeModel::score(std::span<const double> row) const { return tree_.leaf_score(row); }

ForestModel::ForestModel(ModelSpec spec, std::vector<std::string> schema, std::vector<Cart> trees)
    : TrainedModel(spec, std::move(schema)), trees_(std::move(trees)) {}

bool ForestModel::tree_vote(std::size_t t, std::span<const double> row) const {
  return trees_[t].leaf_score(row) >= 0.5;
}

double ForestModel::score(std::span<const double> row) const {
  std::size_t votes = 0;
  for (const Cart& tree : trees_) {
    if (tree.leaf_score(row) >= 0.5) ++votes;
  }
  return static_cast<double>(votes) / static_cast<double>(trees_.size());
}

AdaBoostModel::AdaBoostModel(ModelSpec spec, std::vector<std::string> schema,
                             std::vector<Round> rounds, bool fallback_positive)
    : TrainedModel(spec, std::move(schema)),
      rounds_(std::move(rounds)),
      fallback_positive_(fallback_positive) {}

double AdaBoostModel::score(std::span<const double> row) const {
  if (rounds_.empty()) return fallback_positive_ ? 1.0 : 0.0;
  double total = 0, positive = 0;
  for (const Round& r : rounds_) {
    total += r.alpha;
    if (r.stump.leaf_score(row) >= 0.5) positive += r.alpha;
  }
  return total > 0 ? positive / total : 0.0;
}

std::unique_ptr<TrainedModel> train(const ModelSpec& spec, const Rows& data,
                                    const std::vector<bool>& labels,
                                    std::vector<std::string> schema) {
  validate_training_input(data, labels);
  switch (spec.kind) {
    case LearnerKind::Knn: return train_knn(spec, data, labels, std::move(schema));
    case LearnerKind::DecisionTree: return train_tree(spec, data, labels, std::move(schema));
    case LearnerKind::RandomForest: return train_forest(spec, data, labels, std::move(schema));
    case LearnerKind::AdaBoost: return train_adaboost(spec, data, labels, std::move(schema));
  }
  throw ConfigError("unknown learner kind");
}

Metrics compute_metrics(std::int64_t tp, std::int64_t fp, std::int64_t tn, std::int64_t fn) {
  if (tp < 0 || fp < 0 || tn < 0 || fn < 0) {
    throw EmptyConfusion("confusion counts must be non-negative");
  }
  const std::int64_t total = tp + fp + tn + fn;
  if (total == 0) throw EmptyConfusion("confusion matrix is empty");

  Metrics m;
  m.tp = tp;
  m.fp = fp;
  m.tn = tn;
  m.fn = fn;
  m.accuracy = 100.0 * static_cast<double>(tp + tn) / static_cast<double>(total);
  if (tp + fp > 0) {
    m.precision = 100.0 * static_cast<double>(tp) / static_cast<double>(tp + fp);
  } else {
    m.precision_zero_denominator = true;
  }
  if (tp + fn > 0) {
    m.recall = 100.0 * static_cast<double>(tp) / static_cast<double>(tp + fn);
  } else {
    m.recall_zero_denominator = true;
  }
  if (m.precision + m.recall > 0) {
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  }
  return m;
}

std::vector<int> stratified_folds(const std::vector<bool>& labels, int folds, std::uint64_t seed) {
  if (folds < 2) throw StratificationError("folds must be >= 2");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] ? pos : neg).push_back(i);
  if (pos.size() < static_cast<std::size_t>(folds) || neg.size() < static_cast<std::size_t>(folds)) {
    throw StratificationError("each class needs at least " + std::to_string(folds) +
                              " members (" + std::to_string(pos.size()) + " positive, " +
                              std::to_string(neg.size()) + " negative)");
  }
  Rng rng(seed);
  rng.shuffle(pos);
  rng.shuffle(neg);
  std::vector<int> fold_of(labels.size(), 0);
  for (std::size_t i = 0; i < pos.size(); ++i) fold_of[pos[i]] = static_cast<int>(i % folds);
  for (std::size_t i = 0; i < neg.size(); ++i) fold_of[neg[i]] = static_cast<int>(i % folds);
  return fold_of;
}

CrossValidation cross_validate(const ModelSpec& spec, const Rows& data,
                               const std::vector<bool>& labels, int folds, std::uint64_t seed) {
  validate_training_input(data, labels);
  const std::vector<int> fold_of = stratified_folds(labels, folds, seed);

  CrossValidation cv;
  for (int f = 0; f < folds; ++f) {
    Rows train_rows;
    std::vector<bool> train_labels;
    std::vector<std::size_t> test_idx;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (fold_of[i] == f) {
        test_idx.push_back(i);
      } else {
        train_rows.push_back(data[i]);
        train_labels.push_back(labels[i]);
      }
    }
    const auto model = train(spec, train_rows, train_labels);
    std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;
    for (std::size_t i : test_idx) {
      const bool predicted = model->predict(data[i]);
      if (predicted && labels[i]) ++tp;
      else if (predicted && !labels[i]) ++fp;
      else if (!predicted && labels[i]) ++fn;
      else ++tn;
    }
    cv.folds.push_back(compute_metrics(tp, fp, tn, fn));
  }

  double acc_sum = 0;
  for (const Metrics& m : cv.folds) {
    acc_sum += m.accuracy;
    cv.mean_precision += m.precision;
    cv.mean_recall += m.recall;
    cv.mean_f1 += m.f1;
  }
  const double nf = static_cast<double>(cv.folds.size());
  cv.mean_accuracy = acc_sum / nf;
  cv.mean_precision /= nf;
  cv.mean_recall /= nf;
  cv.mean_f1 /= nf;
  if (cv.folds.size() > 1) {
    double ss = 0;
    for (const Metrics& m : cv.folds) {
      ss += (m.accuracy - cv.mean_accuracy) * (m.accuracy - cv.mean_accuracy);
    }
    cv.std_accuracy = std::sqrt(ss / (nf - 1.0));
  }
  return cv;
}

namespace {

nlohmann::json spec_to_json(const ModelSpec& spec) {
  return nlohmann::json{{"kind", std::string(learner_kind_name(spec.kind))},
                        {"neighbors", spec.neighbors},
                        {"max_depth", spec.max_depth},
                        {"min_leaf", spec.min_leaf},
                        {"tree_count", spec.tree_count},
                        {"mtry", spec.mtry},
                        {"rounds", spec.rounds},
                        {"seed", spec.seed}};
}

ModelSpec spec_from_json(const nlohmann::json& j) {
  ModelSpec spec;
  spec.kind = learner_kind_from_name(j.at("kind").get<std::string>());
  spec.neighbors = j.at("neighbors").get<int>();
  spec.max_depth = j.at("max_depth").get<int>();
  spec.min_leaf = j.at("min_leaf").get<int>();
  spec.tree_count = j.at("tree_count").get<int>();
  spec.mtry = j.at("mtry").get<int>();
  spec.rounds = j.at("rounds").get<int>();
  spec.seed = j.at("seed").get<std::uint64_t>();
  return spec;
}

nlohmann::json cart_to_json(const Cart& tree) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const TreeNode& n : tree.nodes()) {
    nodes.push_back(nlohmann::json{{"attribute", n.attribute},
                                   {"threshold", n.threshold},
                                   {"left", n.left},
                                   {"right", n.right},
                                   {"positive_fraction", n.positive_fraction},
                                   {"count", n.count}});
  }
  return nodes;
}

Cart cart_from_json(const nlohmann::json& j) {
  Cart tree;
  for (const auto& jn : j) {
    TreeNode n;
    n.attribute = jn.at("attribute").get<int>();
    n.threshold = jn.at("threshold").get<double>();
    n.left = jn.at("left").get<int>();
    n.right = jn.at("right").get<int>();
    n.positive_fraction = jn.at("positive_fraction").get<double>();
    n.count = jn.at("count").get<std::size_t>();
    tree.mutable_nodes().push_back(n);
  }
  return tree;
}

}  // namespace

std::string TrainedModel::to_json() const {
  nlohmann::json j;
  j["format"] = "rdp-model-1";
  j["spec"] = spec_to_json(spec_);
  j["schema"] = schema_;

  if (const auto* knn = dynamic_cast<const KnnModel*>(this)) {
    j["standardizer"] = {{"mean", knn->standardizer().mean}, {"scale", knn->standardizer().scale}};
    j["rows"] = knn->training_rows();
    j["labels"] = std::vector<int>(knn->training_labels().begin(), knn->training_labels().end());
  } else if (const auto* tree = dynamic_cast<const TreeModel*>(this)) {
    j["tree"] = cart_to_json(tree->tree());
  } else if (const auto* forest = dynamic_cast<const ForestModel*>(this)) {
    nlohmann::json trees = nlohmann::json::array();
    for (const Cart& t : forest->trees()) trees.push_back(cart_to_json(t));
    j["trees"] = std::move(trees);
  } else if (const auto* ada = dynamic_cast<const AdaBoostModel*>(this)) {
    nlohmann::json rounds = nlohmann::json::array();
    for (const auto& r : ada->rounds()) {
      rounds.push_back(nlohmann::json{{"alpha", r.alpha}, {"stump", cart_to_json(r.stump)}});
    }
    j["rounds"] = std::move(rounds);
    j["fallback_positive"] = ada->fallback_positive();
  }
  return j.dump(2);
}

std::unique_ptr<TrainedModel> TrainedModel::from_json(std::string_view text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  if (j.at("format") != "rdp-model-1") {
    throw ConfigError("unsupported model manifest format");
  }
  const ModelSpec spec = spec_from_json(j.at("spec"));
  auto schema = j.at("schema").get<std::vector<std::string>>();

  switch (spec.kind) {
    case LearnerKind::Knn: {
      Standardizer st;
      st.mean = j.at("standardizer").at("mean").get<std::vector<double>>();
      st.scale = j.at("standardizer").at("scale").get<std::vector<double>>();
      auto rows = j.at("rows").get<Rows>();
      const auto label_ints = j.at("labels").get<std::vector<int>>();
      std::vector<bool> labels(label_ints.size());
      for (std::size_t i = 0; i < label_ints.size(); ++i) labels[i] = label_ints[i] != 0;
      return std::make_unique<KnnModel>(spec, std::move(schema), std::move(st), std::move(rows),
                                        std::move(labels));
    }
    case LearnerKind::DecisionTree:
      return std::make_unique<TreeModel>(spec, std::move(schema), cart_from_json(j.at("tree")));
    case LearnerKind::RandomForest: {
      std::vector<Cart> trees;
      for (const auto& jt : j.at("trees")) trees.push_back(cart_from_json(jt));
      return std::make_unique<ForestModel>(spec, std::move(schema), std::move(trees));
    }
    case LearnerKind::AdaBoost: {
      std::vector<AdaBoostModel::Round> rounds;
      for (const auto& jr : j.at("rounds")) {
        rounds.push_back(
            AdaBoostModel::Round{cart_from_json(jr.at("stump")), jr.at("alpha").get<double>()});
      }
      return std::make_unique<AdaBoostModel>(spec, std::move(schema), std::move(rounds),
                                             j.at("fallback_positive").get<bool>());
    }
  }
  throw ConfigError("unknown learner kind in manifest");
}

}  // namespace rdpscope
