// vcml — fused tabular+text startup-success prediction pipeline.
//
// Subcommands: synth, featurize, tune, train, evaluate, explain, mcnemar,
// accept. A run is described by a JSON config file; flags override config
// keys, and every run writes a manifest with the config hash so outputs are
// reproducible.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <random>

#include <CLI11.hpp>
#include <json.hpp>

#include "vcml/acceptance.hpp"
#include "vcml/experiment.hpp"
#include "vcml/shap.hpp"
#include "vcml/synth.hpp"
#include "vcml/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPipeline = 1;
constexpr int kExitConfig = 2;

struct RunConfig {
  std::string profiles_path;
  std::string embedding_cache;
  std::string embedding_service_url;
  std::string word_vectors_path;
  std::string output_dir = "out";
  std::string cutoff = "2015-12-31";
  int horizon_months = 60;
  std::string mode = "fv+tsd";
  std::string text_kind = "doc_embedding";
  std::string classifier = "elastic_net";
  bool tune = false;
  json classifier_params = json::object();
  std::string split_mode = "stratified_random";
  double train_fraction = 0.8;
  std::size_t n_repeats = 5;
  std::uint64_t master_seed = 42;
  std::string out_of_time_cutoff;
  double threshold = 0.5;
  vcml::RoiParams roi;
  unsigned workers = 0;
  std::vector<std::string> subgroups;
  bool write_predictions = false;

  json to_json() const {
    json j;
    j["profiles"] = profiles_path;
    j["embedding_cache"] = embedding_cache;
    j["embedding_service_url"] = embedding_service_url;
    j["word_vectors"] = word_vectors_path;
    j["output_dir"] = output_dir;
    j["cutoff"] = cutoff;
    j["horizon_months"] = horizon_months;
    j["mode"] = mode;
    j["text_kind"] = text_kind;
    j["classifier"] = classifier;
    j["tune"] = tune;
    j["classifier_params"] = classifier_params;
    j["split_mode"] = split_mode;
    j["train_fraction"] = train_fraction;
    j["n_repeats"] = n_repeats;
    j["master_seed"] = master_seed;
    j["out_of_time_cutoff"] = out_of_time_cutoff;
    j["threshold"] = threshold;
    j["roi"] = {{"fiv_tp", roi.fiv_tp}, {"fiv_fp", roi.fiv_fp}, {"ic", roi.ic}};
    j["workers"] = workers;
    j["subgroups"] = subgroups;
    return j;
  }
};

RunConfig load_config(const std::string& path) {
  RunConfig c;
  if (path.empty()) return c;
  std::ifstream in(path);
  if (!in) throw vcml::Error("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw vcml::Error("config '" + path + "': " + e.what());
  }
  auto get = [&](const char* key, auto& out) {
    if (j.contains(key)) out = j[key].get<std::decay_t<decltype(out)>>();
  };
  get("profiles", c.profiles_path);
  get("embedding_cache", c.embedding_cache);
  get("embedding_service_url", c.embedding_service_url);
  get("word_vectors", c.word_vectors_path);
  get("output_dir", c.output_dir);
  get("cutoff", c.cutoff);
  get("horizon_months", c.horizon_months);
  get("mode", c.mode);
  get("text_kind", c.text_kind);
  get("classifier", c.classifier);
  get("tune", c.tune);
  if (j.contains("classifier_params")) c.classifier_params = j["classifier_params"];
  get("split_mode", c.split_mode);
  get("train_fraction", c.train_fraction);
  get("n_repeats", c.n_repeats);
  get("master_seed", c.master_seed);
  get("out_of_time_cutoff", c.out_of_time_cutoff);
  get("threshold", c.threshold);
  if (j.contains("roi")) {
    c.roi.fiv_tp = j["roi"].value("fiv_tp", c.roi.fiv_tp);
    c.roi.fiv_fp = j["roi"].value("fiv_fp", c.roi.fiv_fp);
    c.roi.ic = j["roi"].value("ic", c.roi.ic);
  }
  get("workers", c.workers);
  get("subgroups", c.subgroups);
  return c;
}

void apply_env_overrides(RunConfig& c) {
  if (const char* url = std::getenv("VCML_EMBED_URL")) c.embedding_service_url = url;
  if (const char* workers = std::getenv("VCML_WORKERS")) c.workers = static_cast<unsigned>(std::atoi(workers));
}

std::string config_hash(const RunConfig& c) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(vcml::fnv1a64(c.to_json().dump())));
  return buf;
}

void write_manifest(const RunConfig& c, const std::string& command,
                    const std::vector<std::string>& outputs) {
  json manifest;
  manifest["command"] = command;
  manifest["config_hash"] = config_hash(c);
  manifest["config"] = c.to_json();
  manifest["master_seed"] = c.master_seed;
  manifest["version"] = vcml::kVersion;
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  manifest["created_utc"] = stamp;  // timestamps live here, never in reports
  manifest["outputs"] = outputs;
  std::ofstream out(fs::path(c.output_dir) / (command + "_manifest.json"));
  out << manifest.dump(2) << "\n";
}

void require(bool condition, const std::string& key, const std::string& why) {
  if (!condition) throw vcml::Error("config key '" + key + "': " + why);
}

vcml::Dataset load_dataset(const RunConfig& c) {
  require(!c.profiles_path.empty(), "profiles", "path is required");
  require(fs::exists(c.profiles_path), "profiles", "file '" + c.profiles_path + "' does not exist");
  const auto parsed = vcml::parse_profiles_file(c.profiles_path, /*strict=*/false);
  for (const auto& d : parsed.diagnostics) {
    std::cerr << "warning: " << c.profiles_path << ":" << d.line << ": " << d.message << "\n";
  }
  auto labeled = vcml::assemble_dataset(parsed.profiles, vcml::Date::parse(c.cutoff), c.horizon_months);
  for (const auto& d : labeled.diagnostics) std::cerr << "note: " << d.message << "\n";
  return vcml::Dataset{std::move(labeled.profiles), std::move(labeled.labels)};
}

struct LoadedResources {
  vcml::EmbeddingStore embeddings;
  vcml::WordVectorTable word_vectors;
  vcml::TextResources resources;
};

void load_text_resources(const RunConfig& c, const vcml::Dataset& dataset, LoadedResources& out) {
  const auto mode = vcml::input_mode_from_string(c.mode);
  const auto kind = vcml::text_kind_from_string(c.text_kind);
  if (mode == vcml::InputMode::fv) return;
  if (kind == vcml::TextKind::doc_embedding) {
    require(!c.embedding_cache.empty(), "embedding_cache", "path is required for doc_embedding");
    vcml::EmbeddingGatewayConfig gateway;
    gateway.cache_path = c.embedding_cache;
    if (!c.embedding_service_url.empty()) {
      gateway.mode = vcml::EmbeddingGatewayConfig::Mode::service;
      gateway.base_url = c.embedding_service_url;
    }
    std::vector<std::string> ids, texts;
    for (const auto& p : dataset.profiles) {
      ids.push_back(p.id);
      texts.push_back(p.description);
    }
    auto batch = vcml::get_document_embeddings(ids, texts, gateway);
    for (const auto& d : batch.diagnostics) std::cerr << "note: " << d.message << "\n";
    for (std::size_t i = 0; i < ids.size(); ++i)
      out.embeddings[ids[i]] = std::move(batch.embeddings[i].values);
    out.resources.embeddings = &out.embeddings;
  } else if (kind == vcml::TextKind::word_avg) {
    require(!c.word_vectors_path.empty(), "word_vectors", "path is required for word_avg");
    out.word_vectors = vcml::WordVectorTable::load(c.word_vectors_path);
    out.resources.word_vectors = &out.word_vectors;
  }
}

vcml::PipelineConfig pipeline_config(const RunConfig& c) {
  vcml::PipelineConfig pc;
  pc.mode = vcml::input_mode_from_string(c.mode);
  pc.text_kind = vcml::text_kind_from_string(c.text_kind);
  pc.cutoff = vcml::Date::parse(c.cutoff);
  pc.horizon_months = c.horizon_months;
  pc.threshold = c.threshold;
  pc.roi = c.roi;
  for (const auto& g : c.subgroups) pc.subgroup_groupings.push_back(vcml::grouping_from_string(g));

  const auto family = vcml::family_from_string(c.classifier);
  if (c.tune) {
    pc.tune_family = family;
  } else {
    json merged = c.classifier_params;
    merged["family"] = c.classifier;
    vcml::ClassifierConfig cc = vcml::ClassifierConfig::parse(merged.dump());
    pc.classifier = cc;
  }
  return pc;
}

vcml::SplitPlan split_plan(const RunConfig& c) {
  vcml::SplitPlan plan;
  plan.train_fraction = c.train_fraction;
  plan.n_repeats = c.n_repeats;
  plan.master_seed = c.master_seed;
  if (c.split_mode == "stratified_random") {
    plan.mode = vcml::SplitMode::stratified_random;
  } else if (c.split_mode == "out_of_time") {
    plan.mode = vcml::SplitMode::out_of_time;
    require(!c.out_of_time_cutoff.empty(), "out_of_time_cutoff", "required for out_of_time splits");
    plan.out_of_time_cutoff = vcml::Date::parse(c.out_of_time_cutoff);
  } else {
    throw vcml::Error("config key 'split_mode': unknown value '" + c.split_mode + "'");
  }
  return plan;
}

unsigned effective_workers(const RunConfig& c) {
  return c.workers == 0 ? vcml::default_worker_count() : c.workers;
}

// ---- subcommands ----------------------------------------------------------

int cmd_synth(const RunConfig& base, std::size_t n, std::uint64_t seed) {
  RunConfig c = base;
  fs::create_directories(c.output_dir);
  vcml::SynthConfig sc;
  sc.n = n;
  sc.seed = seed;
  sc.cutoff = vcml::Date::parse(c.cutoff);
  sc.horizon_months = c.horizon_months;
  const auto dataset = vcml::generate_synthetic(sc);

  const auto profiles_path = (fs::path(c.output_dir) / "profiles.jsonl").string();
  const auto cache_path = (fs::path(c.output_dir) / "embeddings.jsonl").string();
  vcml::write_profiles_jsonl(profiles_path, dataset.profiles);
  vcml::write_embedding_cache_file(cache_path, dataset);

  json truth;
  truth["n"] = dataset.profiles.size();
  truth["seed"] = seed;
  truth["true_effects"] = dataset.true_effects;
  std::size_t positives = 0;
  for (int y : dataset.labels) positives += static_cast<std::size_t>(y);
  truth["prevalence"] = dataset.profiles.empty()
                            ? 0.0
                            : static_cast<double>(positives) / static_cast<double>(dataset.profiles.size());
  const auto truth_path = (fs::path(c.output_dir) / "truth.json").string();
  std::ofstream(truth_path) << truth.dump(2) << "\n";

  write_manifest(c, "synth", {profiles_path, cache_path, truth_path});
  std::cout << "wrote " << dataset.profiles.size() << " profiles to " << profiles_path << "\n";
  return kExitOk;
}

int cmd_featurize(const RunConfig& c) {
  fs::create_directories(c.output_dir);
  const auto dataset = load_dataset(c);
  LoadedResources res;
  load_text_resources(c, dataset, res);
  const auto pc = pipeline_config(c);
  const auto feat = vcml::featurize_all(dataset, pc, res.resources);

  const auto matrix_path = (fs::path(c.output_dir) / "features.csv").string();
  const auto layout_path = (fs::path(c.output_dir) / "layout.json").string();
  const auto labels_path = (fs::path(c.output_dir) / "labels.csv").string();
  vcml::write_feature_matrix_csv(matrix_path, feat.X, feat.layout);
  vcml::write_layout_json(layout_path, feat.layout);
  std::ofstream labels(labels_path);
  labels << "id,label\n";
  for (std::size_t i = 0; i < dataset.profiles.size(); ++i) {
    labels << dataset.profiles[i].id << "," << dataset.labels[i] << "\n";
  }
  write_manifest(c, "featurize", {matrix_path, layout_path, labels_path});
  std::cout << "featurized " << feat.X.rows() << " rows x " << feat.X.cols() << " slots\n";
  return kExitOk;
}

int cmd_tune(const RunConfig& c) {
  fs::create_directories(c.output_dir);
  const auto dataset = load_dataset(c);
  LoadedResources res;
  load_text_resources(c, dataset, res);
  auto pc = pipeline_config(c);
  const auto family = vcml::family_from_string(c.classifier);

  vcml::SplitIndices all;
  all.train.resize(dataset.profiles.size());
  for (std::size_t i = 0; i < all.train.size(); ++i) all.train[i] = i;
  const auto feat = vcml::featurize_split(dataset, all, pc, res.resources);

  const auto search = vcml::random_search_cv(feat.train_X, feat.train_y, family,
                                             vcml::tuning_grid(family), 10, 20, c.master_seed,
                                             effective_workers(c));
  json sj;
  sj["best"] = json::parse(search.best.serialized());
  sj["best_mean_auroc"] = search.best_mean_auroc;
  json arr = json::array();
  for (const auto& cand : search.candidates) {
    arr.push_back({{"config", json::parse(cand.config.serialized())},
                   {"mean_auroc", cand.mean_auroc},
                   {"fold_aurocs", cand.fold_aurocs}});
  }
  sj["candidates"] = arr;
  const auto search_path = (fs::path(c.output_dir) / "search.json").string();
  std::ofstream(search_path) << sj.dump(2) << "\n";

  const auto log_path = (fs::path(c.output_dir) / "candidates.csv").string();
  std::ofstream log(log_path);
  log << "candidate,config,mean_auroc\n";
  for (std::size_t i = 0; i < search.candidates.size(); ++i) {
    log << i << ",\"" << search.candidates[i].config.serialized() << "\","
        << search.candidates[i].mean_auroc << "\n";
  }
  write_manifest(c, "tune", {search_path, log_path});
  std::cout << "best candidate: " << search.best.serialized() << " (cv auroc "
            << search.best_mean_auroc << ")\n";
  return kExitOk;
}

int cmd_train(const RunConfig& c) {
  fs::create_directories(c.output_dir);
  const auto dataset = load_dataset(c);
  LoadedResources res;
  load_text_resources(c, dataset, res);
  auto pc = pipeline_config(c);
  require(pc.classifier.has_value(), "classifier", "train requires a fixed classifier (tune=false)");

  const auto feat = vcml::featurize_all(dataset, pc, res.resources);
  auto cc = *pc.classifier;
  cc.seed = c.master_seed;
  const auto model = vcml::fit_classifier(feat.X, feat.y, cc, feat.layout.fingerprint(),
                                          effective_workers(c));
  const auto model_path = (fs::path(c.output_dir) / "model.bin").string();
  vcml::save_model_file(*model, model_path);
  write_manifest(c, "train", {model_path});
  std::cout << "saved " << vcml::to_string(model->family()) << " model to " << model_path << "\n";
  return kExitOk;
}

int cmd_evaluate(const RunConfig& c) {
  fs::create_directories(c.output_dir);
  const auto dataset = load_dataset(c);
  LoadedResources res;
  load_text_resources(c, dataset, res);
  const auto pc = pipeline_config(c);
  const auto plan = split_plan(c);

  const auto report = vcml::repeated_experiment(dataset, pc, plan, res.resources, effective_workers(c));
  const auto report_path = (fs::path(c.output_dir) / "report.json").string();
  std::ofstream(report_path) << vcml::report_to_json(report).dump(2) << "\n";
  const auto csv_path = (fs::path(c.output_dir) / "report.csv").string();
  vcml::write_report_csv(csv_path, report);

  std::vector<std::string> outputs = {report_path, csv_path};
  if (c.write_predictions) {
    const auto pred_path = (fs::path(c.output_dir) / "predictions.csv").string();
    std::ofstream pred(pred_path);
    pred << "repeat,id,y_true,score,pred\n";
    pred.precision(17);
    for (const auto& rr : report.repeats) {
      for (std::size_t k = 0; k < rr.test_indices.size(); ++k) {
        const auto i = rr.test_indices[k];
        pred << rr.repeat_index << "," << dataset.profiles[i].id << "," << dataset.labels[i] << ","
             << rr.test_scores[k] << "," << (rr.test_scores[k] >= pc.threshold ? 1 : 0) << "\n";
      }
    }
    outputs.push_back(pred_path);
  }
  write_manifest(c, "evaluate", outputs);

  for (const auto& [name, stats] : report.summary) {
    std::cout << name << ": " << stats.mean << " (sd " << stats.sd << ")\n";
  }
  return kExitOk;
}

int cmd_explain(const RunConfig& c, const std::string& model_path, const std::string& mode,
                std::size_t n_samples, std::size_t n_explain, std::size_t background_size) {
  fs::create_directories(c.output_dir);
  const auto dataset = load_dataset(c);
  LoadedResources res;
  load_text_resources(c, dataset, res);
  const auto pc = pipeline_config(c);
  const auto feat = vcml::featurize_all(dataset, pc, res.resources);

  std::unique_ptr<vcml::TrainedClassifier> model;
  if (!model_path.empty()) {
    model = vcml::load_model_file(model_path);
  } else {
    auto cc = pc.classifier.value_or([] {
      vcml::ClassifierConfig d;
      d.family = vcml::Family::elastic_net;
      return d;
    }());
    cc.seed = c.master_seed;
    model = vcml::fit_classifier(feat.X, feat.y, cc, feat.layout.fingerprint(), effective_workers(c));
  }

  // Seeded background subsample of the feature matrix.
  std::mt19937_64 rng(vcml::mix_seed(c.master_seed, 0xB6));
  std::vector<std::size_t> rows(feat.X.rows());
  std::iota(rows.begin(), rows.end(), 0);
  std::shuffle(rows.begin(), rows.end(), rng);
  const std::size_t bg_n = std::min(background_size, rows.size());
  vcml::Matrix background(bg_n, feat.X.cols());
  for (std::size_t i = 0; i < bg_n; ++i) background.set_row(i, feat.X.row(rows[i]));

  const auto shap_mode = mode == "exact" ? vcml::ShapMode::exact : vcml::ShapMode::sampled;
  const std::size_t n_rows = std::min(n_explain, feat.X.rows());
  std::vector<vcml::Attribution> collapsed_attrs;
  vcml::FeatureLayout collapsed_layout;

  const auto shap_path = (fs::path(c.output_dir) / "shap.csv").string();
  std::ofstream shap_csv(shap_path);
  shap_csv << "id,block,shap\n";
  shap_csv.precision(17);
  for (std::size_t i = 0; i < n_rows; ++i) {
    const auto attr = vcml::shap_attributions(*model, background, feat.X.row(i), feat.layout,
                                              shap_mode, n_samples, vcml::mix_seed(c.master_seed, i));
    auto [collapsed, layout2] = vcml::collapse_tsd(attr, feat.layout);
    collapsed_layout = layout2;
    for (const auto& block : layout2.blocks) {
      double value = 0.0;
      for (std::size_t j = 0; j < block.length; ++j) value += collapsed.values[block.offset + j];
      shap_csv << dataset.profiles[i].id << "," << block.name << "," << value << "\n";
    }
    collapsed_attrs.push_back(std::move(collapsed));
  }

  const auto ranking = vcml::importance_ranking(collapsed_attrs, collapsed_layout);
  json summary;
  summary["n_explained"] = n_rows;
  summary["mode"] = mode;
  summary["output"] = "probability";
  json bars = json::array();
  for (const auto& entry : ranking) {
    bars.push_back({{"block", entry.block}, {"mean_abs_shap", entry.mean_abs_shap}});
  }
  summary["importance"] = bars;
  const auto summary_path = (fs::path(c.output_dir) / "shap_summary.json").string();
  std::ofstream(summary_path) << summary.dump(2) << "\n";

  write_manifest(c, "explain", {shap_path, summary_path});
  std::cout << "explained " << n_rows << " rows; top block: "
            << (ranking.empty() ? "none" : ranking.front().block) << "\n";
  return kExitOk;
}

struct PredictionFile {
  std::vector<std::string> ids;
  std::vector<int> y_true;
  std::vector<int> pred;
};

PredictionFile read_predictions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw vcml::Error("cannot open predictions file '" + path + "'");
  PredictionFile out;
  std::string line;
  if (!std::getline(in, line)) throw vcml::Error("predictions file '" + path + "' is empty");
  // header: repeat,id,y_true,score,pred
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (std::size_t pos = 0; pos <= line.size(); ++pos) {
      if (pos == line.size() || line[pos] == ',') {
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
      }
    }
    if (fields.size() != 5) throw vcml::Error("predictions file '" + path + "': bad row '" + line + "'");
    out.ids.push_back(fields[0] + ":" + fields[1]);
    out.y_true.push_back(std::stoi(fields[2]));
    out.pred.push_back(std::stoi(fields[4]));
  }
  return out;
}

int cmd_mcnemar(const RunConfig& c, const std::string& path_a, const std::string& path_b) {
  const auto a = read_predictions(path_a);
  const auto b = read_predictions(path_b);
  if (a.ids != b.ids)
    throw vcml::Error("prediction files do not cover the same rows (repeat/id mismatch)");
  const auto result = vcml::mcnemar_test(a.pred, b.pred, a.y_true);
  json j;
  j["chi2"] = result.chi2;
  j["b"] = result.b;
  j["c"] = result.c;
  j["degenerate"] = result.degenerate;
  fs::create_directories(c.output_dir);
  const auto out_path = (fs::path(c.output_dir) / "mcnemar.json").string();
  std::ofstream(out_path) << j.dump(2) << "\n";
  write_manifest(c, "mcnemar", {out_path});
  std::cout << "chi2 = " << result.chi2 << " (b = " << result.b << ", c = " << result.c << ")\n";
  return kExitOk;
}

int cmd_accept(const RunConfig& c, const std::vector<int>& only) {
  fs::create_directories(c.output_dir);
  vcml::AcceptanceConfig ac;
  ac.master_seed = c.master_seed;
  ac.workers = c.workers;
  ac.roi = c.roi;
  ac.only = only;
  const auto report = vcml::run_acceptance(ac, &std::cout);
  const auto path = (fs::path(c.output_dir) / "acceptance.json").string();
  std::ofstream(path) << vcml::acceptance_to_json(report).dump(2) << "\n";
  write_manifest(c, "accept", {path});
  return report.all_passed() ? kExitOk : kExitPipeline;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fused tabular+text startup-success prediction pipeline"};
  app.require_subcommand(1);
  app.set_version_flag("--version", vcml::kVersion);

  std::string config_path;
  app.add_option("--config", config_path, "JSON run config; flags override its keys")
      ->envname("VCML_CONFIG");

  // Shared overrides.
  std::optional<std::string> opt_output, opt_profiles, opt_mode, opt_text_kind, opt_classifier,
      opt_cache, opt_cutoff;
  std::optional<std::uint64_t> opt_seed;
  std::optional<unsigned> opt_workers;
  std::optional<std::size_t> opt_repeats;
  for (auto* sub : {&app}) {
    sub->add_option("--out-dir", opt_output, "output directory");
    sub->add_option("--profiles", opt_profiles, "profiles JSONL path");
    sub->add_option("--mode", opt_mode, "input variables: fv, tsd, fv+tsd");
    sub->add_option("--text-kind", opt_text_kind, "manual10, bow, word_avg, doc_embedding");
    sub->add_option("--classifier", opt_classifier, "classifier family");
    sub->add_option("--embedding-cache", opt_cache, "embedding cache JSONL path");
    sub->add_option("--cutoff", opt_cutoff, "prediction cutoff date (YYYY-MM-DD)");
    sub->add_option("--seed", opt_seed, "master seed");
    sub->add_option("--workers", opt_workers, "worker pool size (0: all cores)");
    sub->add_option("--repeats", opt_repeats, "number of experiment repeats");
  }

  auto* synth = app.add_subcommand("synth", "generate a calibrated synthetic dataset");
  std::size_t synth_n = 1000;
  synth->add_option("--n", synth_n, "number of startups");

  auto* featurize = app.add_subcommand("featurize", "profiles -> feature matrix + layout");
  auto* tune = app.add_subcommand("tune", "randomized-search cross-validation");
  auto* train = app.add_subcommand("train", "fit and save a model");
  auto* evaluate = app.add_subcommand("evaluate", "repeated experiment with reports");
  bool write_predictions = false;
  evaluate->add_flag("--write-predictions", write_predictions, "write per-repeat predictions CSV");

  auto* explain = app.add_subcommand("explain", "SHAP attributions for a fitted model");
  std::string explain_model, explain_mode = "sampled";
  std::size_t explain_samples = 2000, explain_rows = 50, explain_background = 100;
  explain->add_option("--model", explain_model, "model file (fits in-memory when omitted)");
  explain->add_option("--shap-mode", explain_mode, "exact or sampled")
      ->check(CLI::IsMember({"exact", "sampled"}));
  explain->add_option("--n-samples", explain_samples, "permutation samples (sampled mode)");
  explain->add_option("--rows", explain_rows, "number of rows to explain");
  explain->add_option("--background", explain_background, "background subsample size");

  auto* mcnemar = app.add_subcommand("mcnemar", "paired test on two prediction files");
  std::string pred_a, pred_b;
  mcnemar->add_option("--pred-a", pred_a, "first predictions.csv")->required();
  mcnemar->add_option("--pred-b", pred_b, "second predictions.csv")->required();

  auto* accept = app.add_subcommand("accept", "run the acceptance suite");
  std::vector<int> accept_only;
  accept->add_option("--only", accept_only, "criterion ids to run (default: all)");

  // Shared flags live on the parent; let subcommands pass them through.
  for (auto* sub : {synth, featurize, tune, train, evaluate, explain, mcnemar, accept}) {
    sub->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    RunConfig config = load_config(config_path);
    apply_env_overrides(config);
    if (opt_output) config.output_dir = *opt_output;
    if (opt_profiles) config.profiles_path = *opt_profiles;
    if (opt_mode) config.mode = *opt_mode;
    if (opt_text_kind) config.text_kind = *opt_text_kind;
    if (opt_classifier) config.classifier = *opt_classifier;
    if (opt_cache) config.embedding_cache = *opt_cache;
    if (opt_cutoff) config.cutoff = *opt_cutoff;
    if (opt_seed) config.master_seed = *opt_seed;
    if (opt_workers) config.workers = *opt_workers;
    if (opt_repeats) config.n_repeats = *opt_repeats;
    config.write_predictions = write_predictions;

    if (synth->parsed()) return cmd_synth(config, synth_n, config.master_seed);
    if (featurize->parsed()) return cmd_featurize(config);
    if (tune->parsed()) return cmd_tune(config);
    if (train->parsed()) return cmd_train(config);
    if (evaluate->parsed()) return cmd_evaluate(config);
    if (explain->parsed())
      return cmd_explain(config, explain_model, explain_mode, explain_samples, explain_rows,
                         explain_background);
    if (mcnemar->parsed()) return cmd_mcnemar(config, pred_a, pred_b);
    if (accept->parsed()) return cmd_accept(config, accept_only);
    std::cerr << "unknown subcommand\n";
    return kExitConfig;
  } catch (const vcml::Error& e) {
    const std::string what = e.what();
    std::cerr << "error: " << what << "\n";
    // Configuration problems exit 2, pipeline failures exit 1.
    return what.rfind("config", 0) == 0 || what.rfind("cannot open config", 0) == 0 ? kExitConfig
                                                                                    : kExitPipeline;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPipeline;
  }
}
