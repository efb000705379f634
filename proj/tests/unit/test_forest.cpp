#include <doctest.h>

#include <algorithm>
#include <random>

#include "vcml/classifiers.hpp"

using namespace vcml;

namespace {

ClassifierConfig forest_config(std::size_t n_trees = 500, SplitRule rule = SplitRule::gini) {
  ClassifierConfig c;
  c.family = Family::random_forest;
  c.random_forest.n_trees = n_trees;
  c.random_forest.split_rule = rule;
  c.random_forest.predictor_fraction = 0.8;
  c.random_forest.min_node_size = 5;
  c.random_forest.min_split_size = 8;
  c.seed = 99;
  return c;
}

// XOR quadrants with a little jitter.
void make_xor(std::size_t n, Matrix& X, std::vector<int>& y, std::uint64_t seed) {
  X = Matrix(n, 2);
  y.assign(n, 0);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.1, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double sx = i % 2 == 0 ? 1.0 : -1.0;
    const double sy = (i / 2) % 2 == 0 ? 1.0 : -1.0;
    X(i, 0) = sx * uniform(rng);
    X(i, 1) = sy * uniform(rng);
    y[i] = (sx * sy > 0) ? 1 : 0;
  }
}

}  // namespace

TEST_CASE("impurity formulas") {
  CHECK(impurity(SplitRule::gini, 0.5) == doctest::Approx(0.5));
  CHECK(impurity(SplitRule::entropy, 0.5) == doctest::Approx(1.0));  // one bit
  CHECK(impurity(SplitRule::gini, 0.0) == 0.0);
  CHECK(impurity(SplitRule::entropy, 1.0) == 0.0);
  CHECK(impurity(SplitRule::gini, 0.25) == doctest::Approx(2.0 * 0.25 * 0.75));
}

TEST_CASE("forest: constant target predicts that class with probability 1") {
  Matrix X(20, 2);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t i = 0; i < 20; ++i) {
    X(i, 0) = normal(rng);
    X(i, 1) = normal(rng);
  }
  const std::vector<int> ones(20, 1);
  const auto model = fit_random_forest(X, ones, forest_config(25));
  for (double p : model->predict_proba(X)) CHECK(p == 1.0);

  const std::vector<int> zeros(20, 0);
  const auto model0 = fit_random_forest(X, zeros, forest_config(25));
  for (double p : model0->predict_proba(X)) CHECK(p == 0.0);
}

TEST_CASE("forest: XOR out-of-bag accuracy above 0.95 with 500 trees") {
  Matrix X;
  std::vector<int> y;
  make_xor(400, X, y, 41);
  const auto model = fit_random_forest(X, y, forest_config(500), 0, 4);
  REQUIRE(model->metadata().oob_accuracy.has_value());
  CHECK(*model->metadata().oob_accuracy > 0.95);
}

TEST_CASE("forest: probability equals the hand mean of per-tree leaf frequencies") {
  // Three stump trees split on feature 0 at 0 with known leaf frequencies.
  auto stump = [](double left_p, double right_p) {
    DecisionTree t;
    t.nodes.resize(3);
    t.nodes[0] = {0, 0.0, 1, 2, 0.0};
    t.nodes[1] = {-1, 0.0, -1, -1, left_p};
    t.nodes[2] = {-1, 0.0, -1, -1, right_p};
    return t;
  };
  std::vector<DecisionTree> trees = {stump(0.1, 0.9), stump(0.2, 0.6), stump(0.0, 1.0)};
  ForestModel forest(trees, 1, 0, 0);
  Matrix X(2, 1);
  X(0, 0) = -1.0;
  X(1, 0) = 1.0;
  const auto p = forest.predict_proba(X);
  CHECK(p[0] == doctest::Approx((0.1 + 0.2 + 0.0) / 3.0));
  CHECK(p[1] == doctest::Approx((0.9 + 0.6 + 1.0) / 3.0));

  SUBCASE("mean is invariant to tree order") {
    std::vector<DecisionTree> shuffled = {trees[2], trees[0], trees[1]};
    ForestModel reordered(shuffled, 1, 0, 0);
    CHECK(reordered.predict_proba(X) == p);
  }
}

TEST_CASE("forest: deterministic under a fixed seed, probabilities stay in [0,1]") {
  Matrix X;
  std::vector<int> y;
  make_xor(120, X, y, 77);
  const auto a = fit_random_forest(X, y, forest_config(60));
  const auto b = fit_random_forest(X, y, forest_config(60));
  CHECK(a->predict_proba(X) == b->predict_proba(X));

  // Parallel fitting gives the same forest as serial.
  const auto parallel = fit_random_forest(X, y, forest_config(60), 0, 4);
  CHECK(parallel->predict_proba(X) == a->predict_proba(X));

  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> wild(-50.0, 50.0);
  Matrix probe(50, 2);
  for (std::size_t i = 0; i < 50; ++i) {
    probe(i, 0) = wild(rng);
    probe(i, 1) = wild(rng);
  }
  for (double p : a->predict_proba(probe)) {
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
  }
}

TEST_CASE("forest: min_node_size and min_split_size are honored") {
  Matrix X;
  std::vector<int> y;
  make_xor(60, X, y, 13);
  ClassifierConfig c = forest_config(20);
  c.random_forest.min_split_size = 1000;  // never split
  const auto model = fit_random_forest(X, y, c);
  const auto& forest = static_cast<const ForestModel&>(*model);
  for (const auto& tree : forest.trees()) CHECK(tree.nodes.size() == 1);
}
