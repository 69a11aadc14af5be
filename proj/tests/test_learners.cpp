#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "json.hpp"
#include "rdpscope/models.hpp"
#include "rdpscope/random.hpp"

using namespace rdpscope;

namespace {

// 2-D noisy XOR: the standard sanity problem a single split cannot solve.
void make_xor(std::size_t n, double noise, Rng& rng, Rows& rows, std::vector<bool>& labels) {
  rows.clear();
  labels.clear();
  for (std::size_t i = 0; i < n; ++i) {
    const double x = rng.range(-1, 1);
    const double y = rng.range(-1, 1);
    bool label = (x > 0) != (y > 0);
    if (rng.unit() < noise) label = !label;
    rows.push_back({x, y});
    labels.push_back(label);
  }
}

Rows threshold_data(std::vector<bool>& labels) {
  Rows rows;
  for (int i = 0; i < 20; ++i) {
    rows.push_back({static_cast<double>(i)});
    labels.push_back(i >= 10);
  }
  return rows;
}

// Walks the serialized tree by hand: an independent route to the leaf.
double json_tree_walk(const nlohmann::json& nodes, std::span<const double> row) {
  std::size_t i = 0;
  while (nodes[i].at("attribute").get<int>() >= 0) {
    const auto a = static_cast<std::size_t>(nodes[i].at("attribute").get<int>());
    const double th = nodes[i].at("threshold").get<double>();
    i = static_cast<std::size_t>(row[a] <= th ? nodes[i].at("left").get<int>()
                                              : nodes[i].at("right").get<int>());
  }
  return nodes[i].at("positive_fraction").get<double>();
}

}  // namespace

TEST_CASE("1-NN memorizes its training set") {
  Rng rng(1);
  Rows rows;
  std::vector<bool> labels;
  for (int i = 0; i < 40; ++i) {
    rows.push_back({rng.range(-5, 5), rng.range(-5, 5), rng.range(-5, 5)});
    labels.push_back(rng.unit() < 0.5);
  }
  const auto model = train(ModelSpec::knn(1), rows, labels);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(model->predict(rows[i]) == labels[i]);
  }
}

TEST_CASE("kNN with k = n reproduces the majority class everywhere") {
  Rng rng(2);
  Rows rows;
  std::vector<bool> labels;
  for (int i = 0; i < 30; ++i) {
    rows.push_back({rng.range(-5, 5), rng.range(-5, 5)});
    labels.push_back(i < 20);  // majority positive
  }
  const auto model = train(ModelSpec::knn(1'000'000), rows, labels);
  for (int i = 0; i < 10; ++i) {
    const std::vector<double> query = {rng.range(-20, 20), rng.range(-20, 20)};
    CHECK(model->predict(query) == true);
  }
}

TEST_CASE("kNN tolerates single-class data") {
  Rows rows = {{0.0}, {1.0}, {2.0}};
  std::vector<bool> labels = {true, true, true};
  const auto model = train(ModelSpec::knn(3), rows, labels);
  const std::vector<double> query = {5.0};
  CHECK(model->predict(query));
}

TEST_CASE("depth-1 tree separates threshold data perfectly") {
  std::vector<bool> labels;
  const Rows rows = threshold_data(labels);
  const auto model = train(ModelSpec::decision_tree(1, 1), rows, labels);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(model->predict(rows[i]) == labels[i]);
  }
  // The split must be the midpoint between the classes.
  const auto* tree = dynamic_cast<const TreeModel*>(model.get());
  REQUIRE(tree != nullptr);
  CHECK(tree->tree().nodes()[0].threshold == doctest::Approx(9.5));
}

TEST_CASE("tree training errors") {
  Rows rows = {{1.0}, {2.0}};
  std::vector<bool> one_class = {true, true};
  CHECK_THROWS_AS(train(ModelSpec::decision_tree(), rows, one_class), SingleClassData);
  CHECK_THROWS_AS(train(ModelSpec::random_forest(), rows, one_class), SingleClassData);
  CHECK_THROWS_AS(train(ModelSpec::adaboost(), rows, one_class), SingleClassData);
  CHECK_THROWS_AS(train(ModelSpec::decision_tree(), {}, {}), EmptyData);
  CHECK_THROWS_AS(train(ModelSpec::decision_tree(), {{1.0}}, {true}), EmptyData);
}

TEST_CASE("tree prediction equals a root-to-leaf walk over its manifest") {
  Rng rng(3);
  Rows rows;
  std::vector<bool> labels;
  make_xor(300, 0.05, rng, rows, labels);
  const auto model = train(ModelSpec::decision_tree(8, 2), rows, labels);
  const nlohmann::json manifest = nlohmann::json::parse(model->to_json());
  const auto& nodes = manifest.at("tree");
  for (int i = 0; i < 100; ++i) {
    const std::vector<double> row = {rng.range(-1.2, 1.2), rng.range(-1.2, 1.2)};
    CHECK(model->score(row) == json_tree_walk(nodes, row));
  }
}

TEST_CASE("random forest solves noisy XOR (seeded regression fixture)") {
  Rng rng(404);
  Rows train_rows, test_rows;
  std::vector<bool> train_labels, test_labels;
  make_xor(400, 0.10, rng, train_rows, train_labels);
  make_xor(200, 0.0, rng, test_rows, test_labels);

  const auto model = train(ModelSpec::random_forest(100, 0, 77), train_rows, train_labels);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < test_rows.size(); ++i) {
    if (model->predict(test_rows[i]) == test_labels[i]) ++correct;
  }
  const double accuracy = static_cast<double>(correct) / static_cast<double>(test_rows.size());
  CHECK(accuracy >= 0.90);
}

TEST_CASE("forest score is exactly the mean of member votes") {
  Rng rng(4);
  Rows rows;
  std::vector<bool> labels;
  make_xor(200, 0.1, rng, rows, labels);
  const auto model = train(ModelSpec::random_forest(25, 0, 5), rows, labels);
  const auto* forest = dynamic_cast<const ForestModel*>(model.get());
  REQUIRE(forest != nullptr);
  for (int i = 0; i < 50; ++i) {
    const std::vector<double> row = {rng.range(-1, 1), rng.range(-1, 1)};
    double votes = 0;
    for (std::size_t t = 0; t < forest->trees().size(); ++t) {
      if (forest->tree_vote(t, row)) votes += 1;
    }
    CHECK(std::abs(model->score(row) - votes / 25.0) <= 1e-12);
  }
}

TEST_CASE("adaboost: finite round weights, non-increasing error on separable data") {
  std::vector<bool> labels;
  const Rows rows = threshold_data(labels);
  std::vector<double> errors;
  for (int rounds : {1, 2, 4, 8, 16}) {
    const auto model = train(ModelSpec::adaboost(rounds, 1), rows, labels);
    const auto* ada = dynamic_cast<const AdaBoostModel*>(model.get());
    REQUIRE(ada != nullptr);
    for (const auto& round : ada->rounds()) CHECK(std::isfinite(round.alpha));
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (model->predict(rows[i]) != labels[i]) ++wrong;
    }
    errors.push_back(static_cast<double>(wrong) / static_cast<double>(rows.size()));
  }
  for (std::size_t i = 1; i < errors.size(); ++i) CHECK(errors[i] <= errors[i - 1] + 1e-12);
  CHECK(errors.back() == 0.0);
}

TEST_CASE("adaboost combines stumps on interval-structured data") {
  Rng rng(5);
  Rows rows;
  std::vector<bool> labels;
  // Not separable by one threshold; needs at least two stumps working together.
  for (int i = 0; i < 200; ++i) {
    const double x = rng.range(-3, 3);
    rows.push_back({x, rng.range(-1, 1)});
    labels.push_back(x > -1 && x < 1);
  }
  const auto one = train(ModelSpec::adaboost(1, 1), rows, labels);
  const auto many = train(ModelSpec::adaboost(64, 1), rows, labels);
  auto error_of = [&](const TrainedModel& m) {
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (m.predict(rows[i]) != labels[i]) ++wrong;
    }
    return static_cast<double>(wrong) / static_cast<double>(rows.size());
  };
  CHECK(error_of(*many) < error_of(*one));
  CHECK(error_of(*many) <= 0.05);
}

TEST_CASE("determinism: same spec, data and seed give identical predictions") {
  Rng rng(6);
  Rows rows;
  std::vector<bool> labels;
  make_xor(150, 0.1, rng, rows, labels);
  for (const ModelSpec& spec :
       {ModelSpec::knn(5), ModelSpec::decision_tree(), ModelSpec::random_forest(30, 0, 9),
        ModelSpec::adaboost(20, 9)}) {
    const auto a = train(spec, rows, labels);
    const auto b = train(spec, rows, labels);
    for (int i = 0; i < 40; ++i) {
      const std::vector<double> row = {rng.range(-1, 1), rng.range(-1, 1)};
      CHECK(a->score(row) == b->score(row));
    }
  }
}

TEST_CASE("model JSON manifests round trip exactly") {
  Rng rng(7);
  Rows rows;
  std::vector<bool> labels;
  make_xor(120, 0.1, rng, rows, labels);
  for (const ModelSpec& spec :
       {ModelSpec::knn(3), ModelSpec::decision_tree(6, 2), ModelSpec::random_forest(10, 0, 2),
        ModelSpec::adaboost(12, 3)}) {
    const auto model = train(spec, rows, labels, {"x", "y"});
    const auto restored = TrainedModel::from_json(model->to_json());
    CHECK(restored->spec().kind == spec.kind);
    CHECK(restored->schema() == std::vector<std::string>{"x", "y"});
    for (int i = 0; i < 40; ++i) {
      const std::vector<double> row = {rng.range(-1.5, 1.5), rng.range(-1.5, 1.5)};
      CHECK(model->score(row) == restored->score(row));
    }
  }
}

TEST_CASE("stratified folds: shape and coverage") {
  SUBCASE("100 rows, 10 folds: each fold has exactly 10 rows") {
    std::vector<bool> labels(100);
    for (int i = 0; i < 50; ++i) labels[static_cast<std::size_t>(i)] = true;
    const auto fold_of = stratified_folds(labels, 10, 1);
    std::vector<int> sizes(10, 0);
    for (int f : fold_of) ++sizes[static_cast<std::size_t>(f)];
    for (int s : sizes) CHECK(s == 10);
  }

  SUBCASE("30/70 split over 10 folds: 3 positives and 7 negatives per fold") {
    std::vector<bool> labels(100);
    for (int i = 0; i < 30; ++i) labels[static_cast<std::size_t>(i)] = true;
    const auto fold_of = stratified_folds(labels, 10, 2);
    std::vector<int> pos(10, 0), neg(10, 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
      (labels[i] ? pos : neg)[static_cast<std::size_t>(fold_of[i])] += 1;
    }
    for (int f = 0; f < 10; ++f) {
      CHECK(pos[static_cast<std::size_t>(f)] == 3);
      CHECK(neg[static_cast<std::size_t>(f)] == 7);
    }
  }

  SUBCASE("stratification errors") {
    std::vector<bool> labels = {true, false, false, false};
    CHECK_THROWS_AS(stratified_folds(labels, 2, 1), StratificationError);  // 1 positive < 2
    std::vector<bool> ok = {true, true, false, false};
    CHECK_THROWS_AS(stratified_folds(ok, 1, 1), StratificationError);
  }
}

TEST_CASE("cross_validate: constant model scores the majority share") {
  Rng rng(8);
  Rows rows;
  std::vector<bool> labels;
  for (int i = 0; i < 100; ++i) {
    rows.push_back({rng.range(-1, 1)});
    labels.push_back(i < 30);
  }
  // kNN with k >= n always answers the training majority (negative here).
  const auto cv = cross_validate(ModelSpec::knn(1'000'000), rows, labels, 10, 3);
  CHECK(cv.mean_accuracy == doctest::Approx(70.0));
  CHECK(cv.folds.size() == 10);
}

TEST_CASE("cross_validate covers every row exactly once") {
  Rng rng(9);
  Rows rows;
  std::vector<bool> labels;
  make_xor(120, 0.05, rng, rows, labels);
  const auto cv = cross_validate(ModelSpec::decision_tree(), rows, labels, 6, 4);
  std::int64_t total = 0;
  for (const Metrics& m : cv.folds) total += m.tp + m.fp + m.tn + m.fn;
  CHECK(total == 120);
  CHECK(cv.std_accuracy >= 0.0);
}

TEST_CASE("compute_metrics reproduces the published confusion rows") {
  SUBCASE("TCP Download row") {
    const Metrics m = compute_metrics(391, 1, 1062, 2);
    CHECK(m.accuracy == doctest::Approx(99.79).epsilon(1e-4));
    CHECK(m.precision == doctest::Approx(99.74).epsilon(1e-4));
    CHECK(m.recall == doctest::Approx(99.49).epsilon(1e-4));
    CHECK(m.f1 == doctest::Approx(99.62).epsilon(1e-4));
  }
  SUBCASE("UDP Clipboard row") {
    const Metrics m = compute_metrics(170, 4, 521, 9);
    CHECK(m.accuracy == doctest::Approx(98.15).epsilon(1e-4));
    CHECK(m.precision == doctest::Approx(97.70).epsilon(1e-4));
    CHECK(m.recall == doctest::Approx(94.97).epsilon(1e-4));
    CHECK(m.f1 == doctest::Approx(96.32).epsilon(1e-4));
  }
  SUBCASE("zero denominators flag instead of dividing") {
    const Metrics m = compute_metrics(0, 0, 10, 5);
    CHECK(m.precision == 0.0);
    CHECK(m.precision_zero_denominator);
    CHECK_FALSE(m.recall_zero_denominator);
    const Metrics m2 = compute_metrics(0, 3, 10, 0);
    CHECK(m2.recall == 0.0);
    CHECK(m2.recall_zero_denominator);
  }
  SUBCASE("empty confusion") {
    CHECK_THROWS_AS(compute_metrics(0, 0, 0, 0), EmptyConfusion);
    CHECK_THROWS_AS(compute_metrics(-1, 0, 1, 0), EmptyConfusion);
  }
}
