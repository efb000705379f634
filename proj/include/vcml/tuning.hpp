#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "vcml/classifiers.hpp"
#include "vcml/dates.hpp"

namespace vcml {

enum class SplitMode { stratified_random, out_of_time };

struct SplitPlan {
  SplitMode mode = SplitMode::stratified_random;
  double train_fraction = 0.8;
  std::size_t n_repeats = 5;
  std::uint64_t master_seed = 0;
  std::optional<Date> out_of_time_cutoff;  // founding-date boundary
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Class-preserving random partition, seeded by (master_seed, repeat_index).
// Per-class train counts are rounded to the nearest integer, so prevalence
// on both sides stays within one sample of the global rate.
SplitIndices stratified_split(std::span<const int> labels, const SplitPlan& plan,
                              std::size_t repeat_index);

// train = founded strictly before the boundary, test = on/after. No
// shuffling. Throws when either side is empty.
SplitIndices out_of_time_split(std::span<const Date> founded_on, const Date& boundary);

// Stratified k folds for cross-validation; fold f of candidate rows.
std::vector<std::vector<std::size_t>> stratified_folds(std::span<const int> labels, std::size_t k,
                                                       std::uint64_t seed);

struct CandidateResult {
  ClassifierConfig config;
  std::vector<double> fold_aurocs;  // percent, NaN for degenerate folds
  double mean_auroc = 0.0;
};

struct SearchResult {
  ClassifierConfig best;
  double best_mean_auroc = 0.0;
  std::vector<CandidateResult> candidates;  // evaluation order
};

// Randomized grid search: n_iter distinct configs sampled uniformly without
// replacement (the whole grid when it is smaller), each scored by
// stratified k-fold CV mean AUROC. Ties break on the lexicographically
// smallest serialized config.
SearchResult random_search_cv(const Matrix& X, const std::vector<int>& y, Family family,
                              const std::vector<ClassifierConfig>& grid, std::size_t n_folds = 10,
                              std::size_t n_iter = 20, std::uint64_t seed = 0, unsigned workers = 1);

}  // namespace vcml
