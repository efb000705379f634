#include "vcml/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "vcml/metrics.hpp"

namespace vcml {

namespace {

void split_by_class(std::span<const int> labels, std::vector<std::size_t>& positives,
                    std::vector<std::size_t>& negatives) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    (labels[i] == 1 ? positives : negatives).push_back(i);
  }
}

}  // namespace

SplitIndices stratified_split(std::span<const int> labels, const SplitPlan& plan,
                              std::size_t repeat_index) {
  if (plan.train_fraction <= 0.0 || plan.train_fraction >= 1.0)
    throw Error("stratified_split: train_fraction outside (0,1)");
  std::vector<std::size_t> positives, negatives;
  split_by_class(labels, positives, negatives);
  if (positives.size() < 2 || negatives.size() < 2)
    throw Error("stratified_split: a class has fewer than 2 members");

  std::mt19937_64 rng(mix_seed(plan.master_seed, repeat_index));
  std::shuffle(positives.begin(), positives.end(), rng);
  std::shuffle(negatives.begin(), negatives.end(), rng);

  SplitIndices out;
  for (auto* cls : {&positives, &negatives}) {
    auto n_train = static_cast<std::size_t>(
        std::llround(plan.train_fraction * static_cast<double>(cls->size())));
    n_train = std::clamp<std::size_t>(n_train, 1, cls->size() - 1);
    out.train.insert(out.train.end(), cls->begin(), cls->begin() + static_cast<std::ptrdiff_t>(n_train));
    out.test.insert(out.test.end(), cls->begin() + static_cast<std::ptrdiff_t>(n_train), cls->end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

SplitIndices out_of_time_split(std::span<const Date> founded_on, const Date& boundary) {
  SplitIndices out;
  for (std::size_t i = 0; i < founded_on.size(); ++i) {
    (founded_on[i] < boundary ? out.train : out.test).push_back(i);
  }
  if (out.train.empty()) throw Error("out_of_time_split: empty training side");
  if (out.test.empty()) throw Error("out_of_time_split: empty test side");
  return out;
}

std::vector<std::vector<std::size_t>> stratified_folds(std::span<const int> labels, std::size_t k,
                                                       std::uint64_t seed) {
  if (k < 2) throw Error("stratified_folds: k must be >= 2");
  std::vector<std::size_t> positives, negatives;
  split_by_class(labels, positives, negatives);
  std::mt19937_64 rng(mix_seed(seed, 0xF01D));
  std::shuffle(positives.begin(), positives.end(), rng);
  std::shuffle(negatives.begin(), negatives.end(), rng);

  std::vector<std::vector<std::size_t>> folds(k);
  for (std::size_t i = 0; i < positives.size(); ++i) folds[i % k].push_back(positives[i]);
  for (std::size_t i = 0; i < negatives.size(); ++i) folds[i % k].push_back(negatives[i]);
  for (auto& fold : folds) std::sort(fold.begin(), fold.end());
  return folds;
}

SearchResult random_search_cv(const Matrix& X, const std::vector<int>& y, Family family,
                              const std::vector<ClassifierConfig>& grid, std::size_t n_folds,
                              std::size_t n_iter, std::uint64_t seed, unsigned workers) {
  if (grid.empty()) throw Error("random_search_cv: empty grid");
  for (const auto& c : grid) {
    if (c.family != family) throw Error("random_search_cv: grid entry family mismatch");
  }

  // Sample candidate indices without replacement (whole grid if small).
  std::vector<std::size_t> candidate_idx(grid.size());
  std::iota(candidate_idx.begin(), candidate_idx.end(), 0);
  if (grid.size() > n_iter) {
    std::mt19937_64 rng(mix_seed(seed, 0x5EA7C4));
    for (std::size_t k = 0; k < n_iter; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, candidate_idx.size() - 1);
      std::swap(candidate_idx[k], candidate_idx[pick(rng)]);
    }
    candidate_idx.resize(n_iter);
  }

  const auto folds = stratified_folds(y, n_folds, seed);
  const std::size_t n = X.rows(), d = X.cols();

  SearchResult result;
  result.candidates.resize(candidate_idx.size());

  struct Task {
    std::size_t candidate;
    std::size_t fold;
  };
  std::vector<Task> tasks;
  for (std::size_t c = 0; c < candidate_idx.size(); ++c) {
    result.candidates[c].config = grid[candidate_idx[c]];
    result.candidates[c].config.seed = mix_seed(seed, candidate_idx[c]);
    result.candidates[c].fold_aurocs.assign(n_folds, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t f = 0; f < n_folds; ++f) tasks.push_back({c, f});
  }

  parallel_for(tasks.size(), workers, [&](std::size_t t) {
    const auto [c, f] = tasks[t];
    std::vector<char> in_fold(n, 0);
    for (std::size_t i : folds[f]) in_fold[i] = 1;
    const std::size_t n_val = folds[f].size();
    Matrix train_X(n - n_val, d), val_X(n_val, d);
    std::vector<int> train_y(n - n_val), val_y(n_val);
    std::size_t ti = 0, vi = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (in_fold[i]) {
        val_X.set_row(vi, X.row(i));
        val_y[vi++] = y[i];
      } else {
        train_X.set_row(ti, X.row(i));
        train_y[ti++] = y[i];
      }
    }
    auto config = result.candidates[c].config;
    config.seed = mix_seed(config.seed, f);
    const auto model = fit_classifier(train_X, train_y, config);
    const auto scores = model->predict_proba(val_X);
    const auto auc = auroc_fraction(val_y, scores);
    result.candidates[c].fold_aurocs[f] = auc ? 100.0 * *auc : std::numeric_limits<double>::quiet_NaN();
  });

  for (auto& candidate : result.candidates) {
    double sum = 0.0;
    std::size_t count = 0;
    for (double v : candidate.fold_aurocs) {
      if (!std::isnan(v)) {
        sum += v;
        ++count;
      }
    }
    candidate.mean_auroc = count > 0 ? sum / static_cast<double>(count) : 0.0;
  }

  const CandidateResult* best = nullptr;
  for (const auto& candidate : result.candidates) {
    if (!best || candidate.mean_auroc > best->mean_auroc ||
        (candidate.mean_auroc == best->mean_auroc &&
         candidate.config.serialized() < best->config.serialized())) {
      best = &candidate;
    }
  }
  result.best = best->config;
  result.best_mean_auroc = best->mean_auroc;
  return result;
}

}  // namespace vcml
