#include "vcml/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace vcml {

using nlohmann::json;

const char* to_string(InputMode m) {
  switch (m) {
    case InputMode::fv: return "fv";
    case InputMode::tsd: return "tsd";
    case InputMode::fv_tsd: return "fv+tsd";
  }
  return "fv+tsd";
}

InputMode input_mode_from_string(const std::string& s) {
  if (s == "fv") return InputMode::fv;
  if (s == "tsd") return InputMode::tsd;
  if (s == "fv+tsd") return InputMode::fv_tsd;
  throw Error("unknown input mode '" + s + "' (expected fv, tsd, or fv+tsd)");
}

namespace {

TextRepresentation text_representation(const StartupProfile& profile,
                                       const std::vector<std::string>& tokens, TextKind kind,
                                       const std::optional<BowVocabulary>& bow,
                                       const TextResources& resources,
                                       std::vector<Diagnostic>* diagnostics) {
  switch (kind) {
    case TextKind::manual10:
      return manual_features(profile.description, default_gazetteer());
    case TextKind::bow:
      return bow_encode(tokens, *bow);
    case TextKind::word_avg: {
      if (!resources.word_vectors) throw Error("word_avg representation requires a word-vector table");
      auto result = word_average(tokens, *resources.word_vectors);
      if (result.empty_coverage && diagnostics)
        diagnostics->push_back({0, "profile '" + profile.id + "': no word-vector coverage"});
      return std::move(result.rep);
    }
    case TextKind::doc_embedding: {
      if (!resources.embeddings) throw Error("doc_embedding representation requires an embedding store");
      const auto it = resources.embeddings->find(profile.id);
      if (it == resources.embeddings->end())
        throw Error("no embedding for profile id '" + profile.id + "'");
      return TextRepresentation{TextKind::doc_embedding, it->second};
    }
  }
  throw Error("unknown text representation kind");
}

}  // namespace

FeaturizedSplit featurize_split(const Dataset& dataset, const SplitIndices& split,
                                const PipelineConfig& config, const TextResources& resources) {
  FeaturizedSplit out;
  const bool use_fv = config.mode != InputMode::tsd;
  const bool use_tsd = config.mode != InputMode::fv;

  std::vector<StartupProfile> train_profiles;
  train_profiles.reserve(split.train.size());
  for (std::size_t i : split.train) train_profiles.push_back(dataset.profiles[i]);

  FeatureLayout fv_layout;
  if (use_fv) {
    out.encoder = FundamentalEncoder::fit(train_profiles, config.cutoff);
    fv_layout = out.encoder.layout();
  }

  std::vector<std::vector<std::string>> tokens(dataset.profiles.size());
  if (use_tsd && (config.text_kind == TextKind::bow || config.text_kind == TextKind::word_avg)) {
    for (std::size_t i = 0; i < dataset.profiles.size(); ++i)
      tokens[i] = tokenize(dataset.profiles[i].description);
  }
  if (use_tsd && config.text_kind == TextKind::bow) {
    std::vector<std::vector<std::string>> train_tokens;
    train_tokens.reserve(split.train.size());
    for (std::size_t i : split.train) train_tokens.push_back(tokens[i]);
    out.bow = fit_bow(train_tokens, config.bow_min_doc_fraction);
  }

  auto encode_row = [&](std::size_t i) {
    std::vector<double> x_fv;
    if (use_fv) x_fv = out.encoder.encode(dataset.profiles[i], config.cutoff);
    TextRepresentation rep;
    if (use_tsd)
      rep = text_representation(dataset.profiles[i], tokens[i], config.text_kind, out.bow, resources,
                                &out.diagnostics);
    return fuse(x_fv, fv_layout, rep);
  };

  bool first = true;
  auto fill = [&](const std::vector<std::size_t>& indices, Matrix& X, std::vector<int>& y) {
    for (std::size_t k = 0; k < indices.size(); ++k) {
      const auto fused = encode_row(indices[k]);
      if (first) {
        out.layout = fused.layout;
        first = false;
      }
      if (X.cols() == 0) X = Matrix(indices.size(), fused.values.size());
      X.set_row(k, fused.values);
      y[k] = dataset.labels[indices[k]];
    }
  };
  out.train_y.resize(split.train.size());
  out.test_y.resize(split.test.size());
  fill(split.train, out.train_X, out.train_y);
  fill(split.test, out.test_X, out.test_y);
  if (out.test_X.cols() != out.train_X.cols()) out.test_X = Matrix(split.test.size(), out.train_X.cols());

  // tf-idf vectors keep their unit norm; everything else standardizes on
  // training statistics (binary slots skip automatically).
  std::vector<bool> force_skip;
  if (use_tsd && config.text_kind == TextKind::bow) {
    force_skip.assign(out.layout.total_dim(), false);
    if (const auto* block = out.layout.find("TSD")) {
      for (std::size_t j = block->offset; j < block->offset + block->length; ++j) force_skip[j] = true;
    }
  }
  out.standardizer = Standardizer::fit(out.train_X, force_skip);
  out.standardizer.apply_in_place(out.train_X);
  out.standardizer.apply_in_place(out.test_X);
  return out;
}

FeaturizedAll featurize_all(const Dataset& dataset, const PipelineConfig& config,
                            const TextResources& resources) {
  if (dataset.profiles.empty()) throw Error("featurize_all: empty dataset");
  SplitIndices split;
  split.train.resize(dataset.profiles.size());
  for (std::size_t i = 0; i < split.train.size(); ++i) split.train[i] = i;
  FeaturizedAll out;
  auto fs = featurize_split(dataset, split, config, resources);
  out.X = std::move(fs.train_X);
  out.y = std::move(fs.train_y);
  out.layout = std::move(fs.layout);
  out.encoder = std::move(fs.encoder);
  out.standardizer = std::move(fs.standardizer);
  out.bow = std::move(fs.bow);
  return out;
}

namespace {

void accumulate(std::map<std::string, std::vector<double>>& values, const MetricsReport& m) {
  auto push = [&](const char* name, const std::optional<double>& v) {
    if (v) values[name].push_back(*v);
  };
  push("balanced_accuracy", m.balanced_accuracy);
  push("precision", m.precision);
  push("recall", m.recall);
  push("f1", m.f1);
  push("auroc", m.auroc);
  push("aucpr", m.aucpr);
  push("roi", m.roi);
}

}  // namespace

AggregatedReport repeated_experiment(const Dataset& dataset, const PipelineConfig& config,
                                     const SplitPlan& plan, const TextResources& resources,
                                     unsigned workers) {
  if (plan.n_repeats < 1) throw Error("repeated_experiment: n_repeats must be >= 1");
  if (!config.classifier && !config.tune_family)
    throw Error("repeated_experiment: provide a classifier config or a tuning family");

  AggregatedReport report;
  report.single_repeat = plan.n_repeats == 1;

  std::vector<Date> founded;
  if (plan.mode == SplitMode::out_of_time) {
    if (!plan.out_of_time_cutoff) throw Error("out_of_time split requires a founding-date boundary");
    founded.reserve(dataset.profiles.size());
    for (const auto& p : dataset.profiles) founded.push_back(p.founded_on);
  }

  for (std::size_t r = 0; r < plan.n_repeats; ++r) {
    const SplitIndices split = plan.mode == SplitMode::stratified_random
                                   ? stratified_split(dataset.labels, plan, r)
                                   : out_of_time_split(founded, *plan.out_of_time_cutoff);
    auto feat = featurize_split(dataset, split, config, resources);

    RepeatReport rr;
    rr.repeat_index = r;
    ClassifierConfig fit_config;
    if (config.tune_family) {
      const auto grid = tuning_grid(*config.tune_family);
      rr.search = random_search_cv(feat.train_X, feat.train_y, *config.tune_family, grid,
                                   config.tune_folds, config.tune_iters, mix_seed(plan.master_seed, r),
                                   workers);
      fit_config = rr.search->best;
    } else {
      fit_config = *config.classifier;
    }
    fit_config.seed = mix_seed(plan.master_seed, r, fit_config.seed);

    const auto model = fit_classifier(feat.train_X, feat.train_y, fit_config,
                                      feat.layout.fingerprint(), workers);
    rr.test_scores = model->predict_proba(feat.test_X);
    rr.test_indices = split.test;
    rr.metrics = compute_metrics(feat.test_y, rr.test_scores, config.threshold, config.roi);

    if (!config.subgroup_groupings.empty()) {
      std::vector<StartupProfile> test_profiles;
      test_profiles.reserve(split.test.size());
      for (std::size_t i : split.test) test_profiles.push_back(dataset.profiles[i]);
      for (const auto grouping : config.subgroup_groupings) {
        rr.subgroups[to_string(grouping)] =
            subgroup_report(test_profiles, feat.test_y, rr.test_scores, grouping, config.cutoff,
                            config.horizon_months, config.threshold, config.roi,
                            config.subgroup_min_support);
      }
    }
    report.repeats.push_back(std::move(rr));
  }

  std::map<std::string, std::vector<double>> values;
  for (const auto& rr : report.repeats) accumulate(values, rr.metrics);
  for (const auto& [name, v] : values) {
    MetricStats stats;
    stats.n = v.size();
    double sum = 0.0;
    for (double x : v) sum += x;
    stats.mean = sum / static_cast<double>(v.size());
    if (v.size() > 1) {
      double ss = 0.0;
      for (double x : v) ss += (x - stats.mean) * (x - stats.mean);
      stats.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
    }
    report.summary[name] = stats;
  }
  return report;
}

json metrics_to_json(const MetricsReport& m) {
  json j;
  j["tp"] = m.tp;
  j["fp"] = m.fp;
  j["tn"] = m.tn;
  j["fn"] = m.fn;
  j["threshold"] = m.threshold;
  auto put = [&](const char* name, const std::optional<double>& v) {
    if (v) j[name] = *v;
    else j[name] = nullptr;
  };
  put("balanced_accuracy", m.balanced_accuracy);
  put("precision", m.precision);
  put("recall", m.recall);
  put("f1", m.f1);
  put("auroc", m.auroc);
  put("aucpr", m.aucpr);
  put("roi", m.roi);
  j["undefined"] = m.undefined;
  return j;
}

json report_to_json(const AggregatedReport& report) {
  json j;
  j["n_repeats"] = report.repeats.size();
  j["single_repeat"] = report.single_repeat;
  json summary;
  for (const auto& [name, stats] : report.summary) {
    summary[name] = {{"mean", stats.mean}, {"sd", stats.sd}, {"n", stats.n}};
  }
  j["summary"] = summary;
  json repeats = json::array();
  for (const auto& rr : report.repeats) {
    json rj;
    rj["repeat"] = rr.repeat_index;
    rj["metrics"] = metrics_to_json(rr.metrics);
    if (rr.search) {
      json sj;
      sj["best"] = json::parse(rr.search->best.serialized());
      sj["best_mean_auroc"] = rr.search->best_mean_auroc;
      json candidates = json::array();
      for (const auto& c : rr.search->candidates) {
        candidates.push_back({{"config", json::parse(c.config.serialized())},
                              {"mean_auroc", c.mean_auroc},
                              {"fold_aurocs", c.fold_aurocs}});
      }
      sj["candidates"] = candidates;
      rj["search"] = sj;
    }
    if (!rr.subgroups.empty()) {
      json groups;
      for (const auto& [grouping, reports] : rr.subgroups) {
        json arr = json::array();
        for (const auto& g : reports) {
          json gj;
          gj["group"] = g.group;
          gj["n"] = g.n;
          gj["low_support"] = g.low_support;
          gj["metrics"] = metrics_to_json(g.metrics);
          if (g.correct_rate) gj["correct_rate"] = *g.correct_rate;
          arr.push_back(gj);
        }
        groups[grouping] = arr;
      }
      rj["subgroups"] = groups;
    }
    repeats.push_back(rj);
  }
  j["repeats"] = repeats;
  return j;
}

void write_report_csv(const std::string& path, const AggregatedReport& report) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << "scope,metric,repeat,value\n";
  out.precision(17);
  static const char* metric_names[] = {"balanced_accuracy", "precision", "recall", "f1",
                                       "auroc", "aucpr", "roi"};
  for (const auto& rr : report.repeats) {
    const auto j = metrics_to_json(rr.metrics);
    for (const char* name : metric_names) {
      out << "repeat," << name << "," << rr.repeat_index << ",";
      if (j[name].is_null()) out << "undefined";
      else out << j[name].get<double>();
      out << "\n";
    }
  }
  for (const auto& [name, stats] : report.summary) {
    out << "mean," << name << ",," << stats.mean << "\n";
    out << "sd," << name << ",," << stats.sd << "\n";
  }
}

}  // namespace vcml
