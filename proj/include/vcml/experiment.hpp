#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "vcml/embedding_gateway.hpp"
#include "vcml/features.hpp"
#include "vcml/metrics.hpp"
#include "vcml/profile.hpp"
#include "vcml/text.hpp"
#include "vcml/tuning.hpp"

namespace vcml {

enum class InputMode { fv, tsd, fv_tsd };

const char* to_string(InputMode m);
InputMode input_mode_from_string(const std::string& s);

struct Dataset {
  std::vector<StartupProfile> profiles;  // censored at the cutoff
  std::vector<int> labels;
};

struct TextResources {
  const WordVectorTable* word_vectors = nullptr;   // word_avg
  const EmbeddingStore* embeddings = nullptr;      // doc_embedding, keyed by profile id
};

struct PipelineConfig {
  InputMode mode = InputMode::fv_tsd;
  TextKind text_kind = TextKind::doc_embedding;
  Date cutoff;
  int horizon_months = 60;
  double bow_min_doc_fraction = 0.05;
  std::optional<ClassifierConfig> classifier;  // fixed configuration...
  std::optional<Family> tune_family;           // ...or randomized-search tuning
  std::size_t tune_folds = 10;
  std::size_t tune_iters = 20;
  double threshold = 0.5;
  RoiParams roi;
  std::vector<Grouping> subgroup_groupings;
  std::size_t subgroup_min_support = 10;
};

struct FeaturizedSplit {
  Matrix train_X, test_X;
  std::vector<int> train_y, test_y;
  FeatureLayout layout;
  FundamentalEncoder encoder;
  Standardizer standardizer;
  std::optional<BowVocabulary> bow;
  std::vector<Diagnostic> diagnostics;
};

// Fits every stateful transform (encoder, bow vocabulary, standardizer) on
// the train rows only, then encodes both sides.
FeaturizedSplit featurize_split(const Dataset& dataset, const SplitIndices& split,
                                const PipelineConfig& config, const TextResources& resources);

// Whole-dataset featurization for exports; all statistics fitted on the
// given rows.
struct FeaturizedAll {
  Matrix X;
  std::vector<int> y;
  FeatureLayout layout;
  FundamentalEncoder encoder;
  Standardizer standardizer;
  std::optional<BowVocabulary> bow;
};
FeaturizedAll featurize_all(const Dataset& dataset, const PipelineConfig& config,
                            const TextResources& resources);

struct RepeatReport {
  std::size_t repeat_index = 0;
  MetricsReport metrics;
  std::optional<SearchResult> search;
  std::map<std::string, std::vector<SubgroupReport>> subgroups;  // by grouping name
  std::vector<std::size_t> test_indices;
  std::vector<double> test_scores;
};

struct MetricStats {
  double mean = 0.0;
  double sd = 0.0;        // sample SD (n-1)
  std::size_t n = 0;      // repeats where the metric was defined
};

struct AggregatedReport {
  std::vector<RepeatReport> repeats;
  std::map<std::string, MetricStats> summary;
  bool single_repeat = false;
};

// Per repeat: split -> fit transforms on train -> (tune) -> fit -> score the
// test side. Randomness flows from plan.master_seed and the repeat index.
AggregatedReport repeated_experiment(const Dataset& dataset, const PipelineConfig& config,
                                     const SplitPlan& plan, const TextResources& resources,
                                     unsigned workers = 1);

nlohmann::json report_to_json(const AggregatedReport& report);
nlohmann::json metrics_to_json(const MetricsReport& m);
void write_report_csv(const std::string& path, const AggregatedReport& report);

}  // namespace vcml
