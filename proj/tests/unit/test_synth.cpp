#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "vcml/classifiers.hpp"
#include "vcml/experiment.hpp"
#include "vcml/synth.hpp"
#include "vcml/tuning.hpp"

using namespace vcml;

namespace {

// n = 10,000 rows are used by several checks; generate once.
const SynthDataset& big_dataset() {
  static const SynthDataset dataset = [] {
    SynthConfig config;
    config.n = 10000;
    config.seed = 424242;
    return generate_synthetic(config);
  }();
  return dataset;
}

Dataset as_dataset(const SynthDataset& synth) {
  auto labeled = assemble_dataset(synth.profiles, synth.config.cutoff, synth.config.horizon_months);
  return Dataset{std::move(labeled.profiles), std::move(labeled.labels)};
}

}  // namespace

TEST_CASE("synth: n = 0 gives an empty dataset") {
  SynthConfig config;
  config.n = 0;
  const auto ds = generate_synthetic(config);
  CHECK(ds.profiles.empty());
  CHECK(ds.labels.empty());
}

TEST_CASE("synth: same seed is bit-identical") {
  SynthConfig config;
  config.n = 60;
  config.seed = 99;
  const auto a = generate_synthetic(config);
  const auto b = generate_synthetic(config);
  REQUIRE(a.profiles.size() == b.profiles.size());
  CHECK(a.labels == b.labels);
  for (std::size_t i = 0; i < a.profiles.size(); ++i) {
    CHECK(profile_to_json_line(a.profiles[i]) == profile_to_json_line(b.profiles[i]));
    CHECK(a.embeddings[i] == b.embeddings[i]);
  }
  config.seed = 100;
  const auto c = generate_synthetic(config);
  CHECK(a.labels != c.labels);
}

TEST_CASE("synth: moments match the calibration targets at n = 10,000") {
  const auto& ds = big_dataset();
  REQUIRE(ds.profiles.size() == 10000);

  double prevalence = 0.0;
  for (int y : ds.labels) prevalence += y;
  prevalence /= 10000.0;
  CHECK(std::abs(prevalence - 0.3594) < 0.02);

  double age_mean = 0.0;
  for (const auto& p : ds.profiles) age_mean += months_between(p.founded_on, ds.config.cutoff);
  age_mean /= 10000.0;
  CHECK(std::abs(age_mean - 18.14) < 0.5);

  SUBCASE("successful rows have shorter descriptions on average") {
    double len1 = 0.0, len0 = 0.0, n1 = 0.0, n0 = 0.0;
    for (std::size_t i = 0; i < ds.profiles.size(); ++i) {
      if (ds.labels[i] == 1) {
        len1 += ds.profiles[i].description.size();
        n1 += 1.0;
      } else {
        len0 += ds.profiles[i].description.size();
        n0 += 1.0;
      }
    }
    CHECK(len1 / n1 < len0 / n0);
  }

  SUBCASE("labels equal derive_label over the planted events") {
    for (std::size_t i = 0; i < 500; ++i) {
      CHECK(derive_label(ds.profiles[i], ds.config.cutoff, ds.config.horizon_months).value ==
            ds.labels[i]);
    }
  }

  SUBCASE("profiles survive a JSONL round trip") {
    std::ostringstream buffer;
    for (std::size_t i = 0; i < 200; ++i) buffer << profile_to_json_line(ds.profiles[i]) << "\n";
    std::istringstream in(buffer.str());
    const auto parsed = parse_profiles(in, /*strict=*/true);
    CHECK(parsed.profiles.size() == 200);
    CHECK(parsed.diagnostics.empty());
  }
}

TEST_CASE("synth: elastic net recovers the sign of every strong planted effect") {
  const auto dataset = as_dataset(big_dataset());
  PipelineConfig pc;
  pc.mode = InputMode::fv;
  pc.cutoff = big_dataset().config.cutoff;
  const auto feat = featurize_all(dataset, pc, {});

  ClassifierConfig cc;
  cc.family = Family::elastic_net;
  cc.elastic_net = {0.1, 0.1, 1e-4, 4000};
  const auto model = fit_classifier(feat.X, feat.y, cc);
  const auto& linear = static_cast<const LinearModel&>(*model);

  for (const auto& [slot, beta] : big_dataset().true_effects) {
    if (std::abs(beta) < 0.5) continue;
    const auto* block = feat.layout.find(slot);
    REQUIRE(block != nullptr);
    const double w = linear.weights()[block->offset];
    INFO("slot ", slot, " planted ", beta, " fitted ", w);
    CHECK(w * beta > 0.0);
  }
}

TEST_CASE("synth: planted text signal is detectable from embeddings alone") {
  const auto& synth = big_dataset();
  const auto dataset = as_dataset(synth);
  const auto store = embedding_store(synth);
  TextResources resources;
  resources.embeddings = &store;

  PipelineConfig pc;
  pc.mode = InputMode::tsd;
  pc.text_kind = TextKind::doc_embedding;
  pc.cutoff = synth.config.cutoff;
  ClassifierConfig cc;
  cc.family = Family::elastic_net;
  cc.elastic_net = {0.1, 0.1, 1e-4, 2000};
  pc.classifier = cc;

  SplitPlan plan;
  plan.n_repeats = 1;
  plan.master_seed = 7;
  const auto report = repeated_experiment(dataset, pc, plan, resources);
  CHECK(report.summary.at("auroc").mean > 55.0);
}

TEST_CASE("synth: cache file round trips through the embedding gateway") {
  SynthConfig config;
  config.n = 25;
  config.seed = 5;
  const auto ds = generate_synthetic(config);
  const auto path = std::filesystem::temp_directory_path() / "vcml_synth_cache.jsonl";
  std::filesystem::remove(path);
  write_embedding_cache_file(path.string(), ds);

  EmbeddingGatewayConfig gateway;
  gateway.cache_path = path.string();
  gateway.expected_dim = config.embedding_dim;
  std::vector<std::string> ids, texts;
  for (const auto& p : ds.profiles) {
    ids.push_back(p.id);
    texts.push_back(p.description);
  }
  const auto out = get_document_embeddings(ids, texts, gateway);
  REQUIRE(out.embeddings.size() == 25);
  for (std::size_t i = 0; i < 25; ++i) {
    CHECK(out.embeddings[i].values.size() == config.embedding_dim);
  }
}
