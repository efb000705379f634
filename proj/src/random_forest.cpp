#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "vcml/classifiers.hpp"

namespace vcml {

double impurity(SplitRule rule, double p_positive) {
  const double p = std::clamp(p_positive, 0.0, 1.0);
  if (rule == SplitRule::gini) return 2.0 * p * (1.0 - p);
  if (p == 0.0 || p == 1.0) return 0.0;
  return -(p * std::log2(p) + (1.0 - p) * std::log2(1.0 - p));
}

double DecisionTree::predict(std::span<const double> x) const {
  std::int32_t idx = 0;
  while (nodes[static_cast<std::size_t>(idx)].feature >= 0) {
    const auto& node = nodes[static_cast<std::size_t>(idx)];
    idx = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
  }
  return nodes[static_cast<std::size_t>(idx)].p_positive;
}

ForestModel::ForestModel(std::vector<DecisionTree> trees, std::size_t input_dim,
                         std::uint64_t fingerprint, std::uint64_t seed)
    : TrainedClassifier(Family::random_forest, input_dim, fingerprint, seed), trees_(std::move(trees)) {}

void ForestModel::predict_impl(const Matrix& X, std::vector<double>& out) const {
  const double inv = 1.0 / static_cast<double>(trees_.size());
  for (std::size_t i = 0; i < X.rows(); ++i) {
    double sum = 0.0;
    for (const auto& t : trees_) sum += t.predict(X.row(i));
    out[i] = sum * inv;
  }
}

namespace {

struct TreeBuilder {
  const Matrix& X;
  const std::vector<int>& y;
  const RandomForestParams& params;
  std::size_t n_candidates;
  std::mt19937_64 rng;
  DecisionTree tree;

  std::int32_t build(std::vector<std::size_t>& rows) {
    const auto node_index = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.push_back({});

    std::size_t positives = 0;
    for (std::size_t r : rows) positives += static_cast<std::size_t>(y[r]);
    const double p = static_cast<double>(positives) / static_cast<double>(rows.size());
    tree.nodes[static_cast<std::size_t>(node_index)].p_positive = p;

    if (rows.size() < params.min_split_size || positives == 0 || positives == rows.size()) {
      return node_index;
    }

    // Sample candidate features without replacement; sorted so the best-split
    // scan order is deterministic.
    std::vector<std::size_t> features(X.cols());
    std::iota(features.begin(), features.end(), 0);
    for (std::size_t k = 0; k < n_candidates; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, features.size() - 1);
      std::swap(features[k], features[pick(rng)]);
    }
    features.resize(n_candidates);
    std::sort(features.begin(), features.end());

    const double parent_impurity = impurity(params.split_rule, p);
    double best_gain = 0.0;
    std::size_t best_feature = 0;
    double best_threshold = 0.0;

    std::vector<std::size_t> order(rows.size());
    for (std::size_t feature : features) {
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double va = X(rows[a], feature), vb = X(rows[b], feature);
        if (va != vb) return va < vb;
        return rows[a] < rows[b];
      });
      std::size_t left_pos = 0;
      for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
        left_pos += static_cast<std::size_t>(y[rows[order[k]]]);
        const double v = X(rows[order[k]], feature);
        const double v_next = X(rows[order[k + 1]], feature);
        if (v == v_next) continue;
        const std::size_t n_left = k + 1, n_right = rows.size() - n_left;
        if (n_left < params.min_node_size || n_right < params.min_node_size) continue;
        const double p_left = static_cast<double>(left_pos) / static_cast<double>(n_left);
        const double p_right = static_cast<double>(positives - left_pos) / static_cast<double>(n_right);
        const double child_impurity =
            (static_cast<double>(n_left) * impurity(params.split_rule, p_left) +
             static_cast<double>(n_right) * impurity(params.split_rule, p_right)) /
            static_cast<double>(rows.size());
        const double gain = parent_impurity - child_impurity;
        if (gain > best_gain + 1e-15) {
          best_gain = gain;
          best_feature = feature;
          best_threshold = 0.5 * (v + v_next);
        }
      }
    }

    if (best_gain <= 0.0) return node_index;

    std::vector<std::size_t> left_rows, right_rows;
    for (std::size_t r : rows) {
      (X(r, best_feature) <= best_threshold ? left_rows : right_rows).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    tree.nodes[static_cast<std::size_t>(node_index)].feature = static_cast<std::int32_t>(best_feature);
    tree.nodes[static_cast<std::size_t>(node_index)].threshold = best_threshold;
    const std::int32_t left = build(left_rows);
    tree.nodes[static_cast<std::size_t>(node_index)].left = left;
    const std::int32_t right = build(right_rows);
    tree.nodes[static_cast<std::size_t>(node_index)].right = right;
    return node_index;
  }
};

}  // namespace

std::unique_ptr<TrainedClassifier> fit_random_forest(const Matrix& X, const std::vector<int>& y,
                                                     const ClassifierConfig& config,
                                                     std::uint64_t layout_fingerprint,
                                                     unsigned workers) {
  if (X.rows() != y.size() || X.rows() == 0) throw Error("fit_random_forest: bad training set");
  for (int v : y) {
    if (v != 0 && v != 1) throw Error("fit_random_forest: labels must be 0/1");
  }
  // Single-class targets degenerate to a constant forest (pure root leaves).
  const auto& params = config.random_forest;
  const std::size_t n = X.rows(), d = X.cols();
  const auto n_candidates = std::min<std::size_t>(
      d, static_cast<std::size_t>(std::ceil(params.predictor_fraction * static_cast<double>(d))));

  std::vector<DecisionTree> trees(params.n_trees);
  std::vector<std::vector<std::size_t>> bootstraps(params.n_trees);

  parallel_for(params.n_trees, workers, [&](std::size_t t) {
    std::mt19937_64 rng(mix_seed(config.seed, t));
    std::vector<std::size_t> rows(n);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (std::size_t i = 0; i < n; ++i) rows[i] = pick(rng);
    bootstraps[t] = rows;
    TreeBuilder builder{X, y, params, std::max<std::size_t>(1, n_candidates), rng, {}};
    builder.build(rows);
    trees[t] = std::move(builder.tree);
  });

  // Out-of-bag accuracy at threshold 0.5.
  std::vector<double> oob_sum(n, 0.0);
  std::vector<std::size_t> oob_count(n, 0);
  std::vector<char> in_bag(n);
  for (std::size_t t = 0; t < params.n_trees; ++t) {
    std::fill(in_bag.begin(), in_bag.end(), 0);
    for (std::size_t r : bootstraps[t]) in_bag[r] = 1;
    for (std::size_t i = 0; i < n; ++i) {
      if (in_bag[i]) continue;
      oob_sum[i] += trees[t].predict(X.row(i));
      oob_count[i] += 1;
    }
  }
  std::size_t scored = 0, correct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (oob_count[i] == 0) continue;
    ++scored;
    const int pred = oob_sum[i] / static_cast<double>(oob_count[i]) >= 0.5 ? 1 : 0;
    if (pred == y[i]) ++correct;
  }

  auto model = std::make_unique<ForestModel>(std::move(trees), d, layout_fingerprint, config.seed);
  if (scored > 0)
    model->mutable_metadata().oob_accuracy = static_cast<double>(correct) / static_cast<double>(scored);
  model->mutable_metadata().iterations = params.n_trees;
  model->mutable_metadata().stopping_reason = "n_trees";
  return model;
}

}  // namespace vcml
