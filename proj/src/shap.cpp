#include "vcml/shap.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <random>

namespace vcml {

namespace {

void spread_block_values(const std::vector<double>& block_values, const FeatureLayout& layout,
                         std::vector<double>& slots) {
  slots.assign(layout.total_dim(), 0.0);
  for (std::size_t b = 0; b < layout.blocks.size(); ++b) {
    const auto& block = layout.blocks[b];
    const double share = block_values[b] / static_cast<double>(block.length);
    for (std::size_t j = 0; j < block.length; ++j) slots[block.offset + j] = share;
  }
}

Attribution exact_attributions(const TrainedClassifier& model, const Matrix& background,
                               std::span<const double> x, const FeatureLayout& layout) {
  const std::size_t n_blocks = layout.blocks.size();
  if (n_blocks > 15) throw Error("shap exact mode supports at most 15 blocks; use sampled mode");
  const std::size_t n_bg = background.rows();
  const std::size_t n_masks = std::size_t{1} << n_blocks;

  // v[mask] = mean over background rows of f(blocks in mask from x, rest
  // from the background row).
  std::vector<double> v(n_masks, 0.0);
  Matrix composed(n_bg, x.size());
  for (std::size_t mask = 0; mask < n_masks; ++mask) {
    for (std::size_t r = 0; r < n_bg; ++r) composed.set_row(r, background.row(r));
    for (std::size_t b = 0; b < n_blocks; ++b) {
      if (!(mask & (std::size_t{1} << b))) continue;
      const auto& block = layout.blocks[b];
      for (std::size_t r = 0; r < n_bg; ++r) {
        for (std::size_t j = 0; j < block.length; ++j)
          composed(r, block.offset + j) = x[block.offset + j];
      }
    }
    const auto scores = model.predict_proba(composed);
    double sum = 0.0;
    for (double s : scores) sum += s;
    v[mask] = sum / static_cast<double>(n_bg);
  }

  std::vector<double> factorial(n_blocks + 1, 1.0);
  for (std::size_t i = 1; i <= n_blocks; ++i) factorial[i] = factorial[i - 1] * static_cast<double>(i);

  std::vector<double> block_values(n_blocks, 0.0);
  for (std::size_t b = 0; b < n_blocks; ++b) {
    const std::size_t bit = std::size_t{1} << b;
    for (std::size_t mask = 0; mask < n_masks; ++mask) {
      if (mask & bit) continue;
      const auto s = static_cast<std::size_t>(std::popcount(mask));
      const double weight =
          factorial[s] * factorial[n_blocks - s - 1] / factorial[n_blocks];
      block_values[b] += weight * (v[mask | bit] - v[mask]);
    }
  }

  Attribution attribution;
  attribution.base_value = v[0];
  spread_block_values(block_values, layout, attribution.values);
  return attribution;
}

Attribution sampled_attributions(const TrainedClassifier& model, const Matrix& background,
                                 std::span<const double> x, const FeatureLayout& layout,
                                 std::size_t n_samples, std::uint64_t seed) {
  const std::size_t n_blocks = layout.blocks.size();
  const std::size_t n_bg = background.rows();
  if (n_samples == 0) throw Error("shap sampled mode: n_samples must be positive");

  std::vector<double> block_values(n_blocks, 0.0);
  std::vector<std::size_t> order(n_blocks);
  Matrix walk(n_blocks + 1, x.size());
  for (std::size_t s = 0; s < n_samples; ++s) {
    const auto bg_row = background.row(s % n_bg);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(mix_seed(seed, s));
    std::shuffle(order.begin(), order.end(), rng);

    // Row k of the walk has the first k blocks of the permutation set to x.
    walk.set_row(0, bg_row);
    for (std::size_t k = 0; k < n_blocks; ++k) {
      walk.set_row(k + 1, walk.row(k));
      const auto& block = layout.blocks[order[k]];
      for (std::size_t j = 0; j < block.length; ++j) {
        walk(k + 1, block.offset + j) = x[block.offset + j];
      }
    }
    const auto scores = model.predict_proba(walk);
    for (std::size_t k = 0; k < n_blocks; ++k) {
      block_values[order[k]] += scores[k + 1] - scores[k];
    }
  }
  const double inv = 1.0 / static_cast<double>(n_samples);
  for (double& v : block_values) v *= inv;

  const auto bg_scores = model.predict_proba(background);
  double base = 0.0;
  for (double s : bg_scores) base += s;
  base /= static_cast<double>(n_bg);

  Attribution attribution;
  attribution.base_value = base;
  spread_block_values(block_values, layout, attribution.values);
  return attribution;
}

}  // namespace

Attribution shap_attributions(const TrainedClassifier& model, const Matrix& background,
                              std::span<const double> x, const FeatureLayout& layout, ShapMode mode,
                              std::size_t n_samples, std::uint64_t seed) {
  layout.validate();
  if (background.rows() == 0) throw Error("shap_attributions: empty background");
  if (background.cols() != layout.total_dim() || x.size() != layout.total_dim())
    throw Error("shap_attributions: layout/input width mismatch");
  if (mode == ShapMode::exact) return exact_attributions(model, background, x, layout);
  return sampled_attributions(model, background, x, layout, n_samples, seed);
}

std::pair<Attribution, FeatureLayout> collapse_tsd(const Attribution& attribution,
                                                   const FeatureLayout& layout) {
  const auto* tsd = layout.find("TSD");
  if (tsd == nullptr) return {attribution, layout};

  Attribution collapsed;
  collapsed.base_value = attribution.base_value;
  FeatureLayout new_layout;
  std::size_t offset = 0;
  for (const auto& block : layout.blocks) {
    if (block.name == "TSD") {
      double sum = 0.0;
      for (std::size_t j = 0; j < block.length; ++j) sum += attribution.values[block.offset + j];
      collapsed.values.push_back(sum);
      new_layout.blocks.push_back({"TSD", offset, 1});
      offset += 1;
    } else {
      for (std::size_t j = 0; j < block.length; ++j)
        collapsed.values.push_back(attribution.values[block.offset + j]);
      new_layout.blocks.push_back({block.name, offset, block.length});
      offset += block.length;
    }
  }
  return {std::move(collapsed), std::move(new_layout)};
}

std::vector<ImportanceEntry> importance_ranking(const std::vector<Attribution>& attributions,
                                                const FeatureLayout& layout) {
  if (attributions.empty()) throw Error("importance_ranking: no attributions");
  for (const auto& a : attributions) {
    if (a.values.size() != layout.total_dim())
      throw Error("importance_ranking: attribution/layout width mismatch");
  }
  std::vector<ImportanceEntry> entries;
  entries.reserve(layout.blocks.size());
  for (const auto& block : layout.blocks) {
    double total = 0.0;
    for (const auto& a : attributions) {
      double block_sum = 0.0;
      for (std::size_t j = 0; j < block.length; ++j) block_sum += a.values[block.offset + j];
      total += std::abs(block_sum);
    }
    entries.push_back({block.name, total / static_cast<double>(attributions.size())});
  }
  std::sort(entries.begin(), entries.end(), [](const ImportanceEntry& a, const ImportanceEntry& b) {
    if (a.mean_abs_shap != b.mean_abs_shap) return a.mean_abs_shap > b.mean_abs_shap;
    return a.block < b.block;
  });
  return entries;
}

}  // namespace vcml
