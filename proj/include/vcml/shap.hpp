#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vcml/classifiers.hpp"
#include "vcml/features.hpp"

namespace vcml {

enum class ShapMode { exact, sampled };

struct Attribution {
  std::vector<double> values;  // per slot, aligned to the layout
  double base_value = 0.0;     // mean model output over the background
};

// Shapley values at layout-block granularity against an interventional
// background: a coalition swaps whole blocks between the explained row and
// background rows. Exact mode enumerates all block coalitions (<= 15
// blocks); sampled mode averages marginal contributions over seeded block
// permutations, cycling background rows so the efficiency gap vanishes when
// n_samples is a multiple of the background size. A multi-slot block's
// value is spread uniformly over its slots (block sums are the unit of
// meaning; see collapse_tsd / importance_ranking).
Attribution shap_attributions(const TrainedClassifier& model, const Matrix& background,
                              std::span<const double> x, const FeatureLayout& layout, ShapMode mode,
                              std::size_t n_samples = 2000, std::uint64_t seed = 0);

// Sums the TSD block into a single slot; all other slots unchanged. The
// total attribution is conserved exactly. Identity when the layout has no
// TSD block.
std::pair<Attribution, FeatureLayout> collapse_tsd(const Attribution& attribution,
                                                   const FeatureLayout& layout);

struct ImportanceEntry {
  std::string block;
  double mean_abs_shap = 0.0;
};

// Mean |block attribution| across samples, sorted descending with a
// lexicographic tie-break on the block name.
std::vector<ImportanceEntry> importance_ranking(const std::vector<Attribution>& attributions,
                                                const FeatureLayout& layout);

}  // namespace vcml
