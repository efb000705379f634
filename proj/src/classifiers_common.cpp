#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "vcml/classifiers.hpp"

namespace vcml {

using nlohmann::json;

const char* to_string(Family f) {
  switch (f) {
    case Family::logistic: return "logistic";
    case Family::elastic_net: return "elastic_net";
    case Family::random_forest: return "random_forest";
    case Family::neural_net: return "neural_net";
    case Family::majority: return "majority";
    case Family::random_vote: return "random_vote";
  }
  return "logistic";
}

Family family_from_string(const std::string& s) {
  if (s == "logistic") return Family::logistic;
  if (s == "elastic_net") return Family::elastic_net;
  if (s == "random_forest") return Family::random_forest;
  if (s == "neural_net") return Family::neural_net;
  if (s == "majority") return Family::majority;
  if (s == "random_vote") return Family::random_vote;
  throw Error("unknown classifier family '" + s + "'");
}

const char* to_string(SplitRule r) { return r == SplitRule::gini ? "gini" : "entropy"; }

SplitRule split_rule_from_string(const std::string& s) {
  if (s == "gini") return SplitRule::gini;
  if (s == "entropy") return SplitRule::entropy;
  throw Error("unknown split rule '" + s + "'");
}

std::string ClassifierConfig::serialized() const {
  json j;
  j["family"] = to_string(family);
  j["seed"] = seed;
  switch (family) {
    case Family::logistic:
      j["tolerance"] = logistic.tolerance;
      j["max_iters"] = logistic.max_iters;
      break;
    case Family::elastic_net:
      j["l1_ratio"] = elastic_net.l1_ratio;
      j["lambda"] = elastic_net.lambda;
      j["tolerance"] = elastic_net.tolerance;
      break;
    case Family::random_forest:
      j["predictor_fraction"] = random_forest.predictor_fraction;
      j["split_rule"] = to_string(random_forest.split_rule);
      j["min_node_size"] = random_forest.min_node_size;
      j["min_split_size"] = random_forest.min_split_size;
      j["n_trees"] = random_forest.n_trees;
      break;
    case Family::neural_net:
      j["width_multiplier"] = neural_net.width_multiplier;
      j["n_hidden_layers"] = neural_net.n_hidden_layers;
      j["dropout"] = neural_net.dropout;
      j["batch_size"] = neural_net.batch_size;
      j["learning_rate"] = neural_net.learning_rate;
      j["max_epochs"] = neural_net.max_epochs;
      j["early_stopping_patience"] = neural_net.early_stopping_patience;
      j["l1_penalty"] = neural_net.l1_penalty;
      j["l2_penalty"] = neural_net.l2_penalty;
      break;
    case Family::majority:
    case Family::random_vote:
      break;
  }
  return j.dump();
}

ClassifierConfig ClassifierConfig::parse(const std::string& json_text) {
  const json j = json::parse(json_text);
  ClassifierConfig c;
  c.family = family_from_string(j.at("family").get<std::string>());
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  auto get = [&](const char* key, auto& out) {
    if (j.contains(key)) out = j[key].get<std::decay_t<decltype(out)>>();
  };
  switch (c.family) {
    case Family::logistic:
      get("tolerance", c.logistic.tolerance);
      get("max_iters", c.logistic.max_iters);
      break;
    case Family::elastic_net:
      get("l1_ratio", c.elastic_net.l1_ratio);
      get("lambda", c.elastic_net.lambda);
      get("tolerance", c.elastic_net.tolerance);
      get("max_iters", c.elastic_net.max_iters);
      break;
    case Family::random_forest:
      get("predictor_fraction", c.random_forest.predictor_fraction);
      get("min_node_size", c.random_forest.min_node_size);
      get("min_split_size", c.random_forest.min_split_size);
      get("n_trees", c.random_forest.n_trees);
      if (j.contains("split_rule"))
        c.random_forest.split_rule = split_rule_from_string(j["split_rule"].get<std::string>());
      break;
    case Family::neural_net:
      get("width_multiplier", c.neural_net.width_multiplier);
      get("n_hidden_layers", c.neural_net.n_hidden_layers);
      get("dropout", c.neural_net.dropout);
      get("batch_size", c.neural_net.batch_size);
      get("learning_rate", c.neural_net.learning_rate);
      get("max_epochs", c.neural_net.max_epochs);
      get("early_stopping_patience", c.neural_net.early_stopping_patience);
      get("l1_penalty", c.neural_net.l1_penalty);
      get("l2_penalty", c.neural_net.l2_penalty);
      break;
    case Family::majority:
    case Family::random_vote:
      break;
  }
  return c;
}

std::vector<ClassifierConfig> tuning_grid(Family family) {
  std::vector<ClassifierConfig> grid;
  switch (family) {
    case Family::logistic: {
      ClassifierConfig c;
      c.family = Family::logistic;
      grid.push_back(c);
      break;
    }
    case Family::elastic_net: {
      for (double l1_ratio : {0.1, 0.2, 0.3, 0.5}) {
        for (double tolerance : {1e-5, 1e-4, 1e-3, 1e-2}) {
          for (double lambda : {0.1, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0}) {
            ClassifierConfig c;
            c.family = Family::elastic_net;
            c.elastic_net.l1_ratio = l1_ratio;
            c.elastic_net.tolerance = tolerance;
            c.elastic_net.lambda = lambda;
            grid.push_back(c);
          }
        }
      }
      break;
    }
    case Family::random_forest: {
      for (double fraction : {0.4, 0.6, 0.8}) {
        for (SplitRule rule : {SplitRule::gini, SplitRule::entropy}) {
          for (std::size_t node : {5u, 8u, 10u}) {
            for (std::size_t split : {8u, 10u}) {
              ClassifierConfig c;
              c.family = Family::random_forest;
              c.random_forest.predictor_fraction = fraction;
              c.random_forest.split_rule = rule;
              c.random_forest.min_node_size = node;
              c.random_forest.min_split_size = split;
              grid.push_back(c);
            }
          }
        }
      }
      break;
    }
    case Family::neural_net: {
      for (double width : {0.25, 0.5, 0.75, 1.0, 1.5, 2.0}) {
        for (std::size_t layers : {2u, 3u, 4u}) {
          for (double dropout : {0.0, 0.2}) {
            for (std::size_t batch : {128u, 256u, 512u}) {
              for (double lr : {1e-3, 1e-4, 1e-5}) {
                ClassifierConfig c;
                c.family = Family::neural_net;
                c.neural_net.width_multiplier = width;
                c.neural_net.n_hidden_layers = layers;
                c.neural_net.dropout = dropout;
                c.neural_net.batch_size = batch;
                c.neural_net.learning_rate = lr;
                grid.push_back(c);
              }
            }
          }
        }
      }
      break;
    }
    case Family::majority:
    case Family::random_vote:
      break;
  }
  return grid;
}

std::vector<double> TrainedClassifier::predict_proba(const Matrix& X) const {
  if (input_dim_ != 0 && X.cols() != input_dim_) {
    throw Error("predict_proba: input width " + std::to_string(X.cols()) + " does not match model width " +
                std::to_string(input_dim_));
  }
  std::vector<double> out(X.rows(), 0.0);
  predict_impl(X, out);
  return out;
}

double TrainedClassifier::predict_one(std::span<const double> x) const {
  Matrix m(1, x.size());
  m.set_row(0, x);
  return predict_proba(m)[0];
}

MajorityModel::MajorityModel(double constant_probability, std::uint64_t seed)
    : TrainedClassifier(Family::majority, 0, 0, seed), p_(constant_probability) {}

void MajorityModel::predict_impl(const Matrix& X, std::vector<double>& out) const {
  std::fill(out.begin(), out.end(), p_);
  (void)X;
}

RandomVoteModel::RandomVoteModel(double prevalence, std::uint64_t seed)
    : TrainedClassifier(Family::random_vote, 0, 0, seed), prevalence_(prevalence) {}

void RandomVoteModel::predict_impl(const Matrix& X, std::vector<double>& out) const {
  for (std::size_t i = 0; i < X.rows(); ++i) {
    const double u = static_cast<double>(mix_seed(seed_, i) >> 11) * 0x1.0p-53;
    out[i] = u < prevalence_ ? 1.0 : 0.0;
  }
}

std::unique_ptr<TrainedClassifier> fit_baseline(const std::vector<int>& y, Family kind,
                                                std::uint64_t seed) {
  if (y.empty()) throw Error("fit_baseline: empty labels");
  const auto positives = static_cast<std::size_t>(std::count(y.begin(), y.end(), 1));
  const double prevalence = static_cast<double>(positives) / static_cast<double>(y.size());
  if (kind == Family::majority) {
    // Exact tie goes to class 0.
    const double p = positives * 2 > y.size() ? 1.0 : 0.0;
    return std::make_unique<MajorityModel>(p, seed);
  }
  if (kind == Family::random_vote) return std::make_unique<RandomVoteModel>(prevalence, seed);
  throw Error("fit_baseline: family must be majority or random_vote");
}

std::unique_ptr<TrainedClassifier> fit_classifier(const Matrix& X, const std::vector<int>& y,
                                                  const ClassifierConfig& config,
                                                  std::uint64_t layout_fingerprint, unsigned workers) {
  switch (config.family) {
    case Family::logistic: return fit_logistic(X, y, config, layout_fingerprint);
    case Family::elastic_net: return fit_elastic_net(X, y, config, layout_fingerprint);
    case Family::random_forest: return fit_random_forest(X, y, config, layout_fingerprint, workers);
    case Family::neural_net: return fit_neural_net(X, y, config, layout_fingerprint);
    case Family::majority:
    case Family::random_vote: return fit_baseline(y, config.family, config.seed);
  }
  throw Error("fit_classifier: unknown family");
}

}  // namespace vcml
