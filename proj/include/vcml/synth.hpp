#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "vcml/dates.hpp"
#include "vcml/embedding_gateway.hpp"
#include "vcml/profile.hpp"

namespace vcml {

// Calibration targets follow the descriptive statistics of the
// reference dataset (age 18.14 +- 10.01 months, 35.94% prevalence, shorter
// descriptions for successful startups, ...). Distribution families are
// pinned here: truncated normal for age, shifted negative-binomial for
// counts, log-normal for funding amounts.
struct SynthConfig {
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  double prevalence = 0.3594;
  Date cutoff{2015, 12, 31};
  int horizon_months = 60;

  // Planted standardized effects, keyed by fundamental slot name. The
  // label is drawn from a logistic model over these plus a text latent.
  std::map<std::string, double> fundamental_effects = {
      {"age_months", -0.8},          {"investor_count", 0.7},
      {"degree_count_total", 0.6},   {"last_round_lag_months", -0.5},
      {"has_linkedin", 0.5},         {"raised_total_musd", 0.3},
      {"founders_count", 0.2},
  };
  double text_latent_effect = 0.75;

  // Simulated document embeddings: class-cluster mean +- separation/2 along
  // a seed-derived unit direction, plus isotropic noise.
  std::size_t embedding_dim = 768;
  double embedding_separation = 1.2;
  double embedding_noise_sd = 1.0;

  std::vector<std::string> success_phrases = {
      "The team reports rapidly growing recurring revenue across all customer segments.",
      "A top tier venture fund led the oversubscribed round.",
      "The platform has reached profitability in its core market.",
      "Enterprise clients renewed at record rates this year.",
      "The product won multiple industry awards for innovation.",
      "Patented technology gives the company a durable advantage.",
      "User growth has doubled every quarter since launch.",
      "Strategic partnerships accelerate the global rollout.",
  };
  std::vector<std::string> struggle_phrases = {
      "The company is exploring options to extend its limited runway.",
      "Churn remains elevated while the team reworks pricing.",
      "The founders recently paused hiring to conserve cash.",
      "Competition has intensified and margins stay thin.",
      "The pivot to a new market is still unproven.",
      "Key engineering roles have been open for months.",
  };
};

struct SynthDataset {
  std::vector<StartupProfile> profiles;             // raw records with events
  std::vector<int> labels;                          // derive_label at the config cutoff/horizon
  std::vector<std::vector<double>> embeddings;      // aligned to profiles
  std::map<std::string, double> true_effects;       // the planted coefficients
  SynthConfig config;
};

// Pure function of the config; rows use per-index rng streams, so the same
// seed is bit-identical regardless of scheduling.
SynthDataset generate_synthetic(const SynthConfig& config);

void write_profiles_jsonl(const std::string& path, const std::vector<StartupProfile>& profiles);
void write_embedding_cache_file(const std::string& path, const SynthDataset& dataset);
EmbeddingStore embedding_store(const SynthDataset& dataset);

}  // namespace vcml
