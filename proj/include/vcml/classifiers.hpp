#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vcml/common.hpp"

namespace vcml {

enum class Family { logistic, elastic_net, random_forest, neural_net, majority, random_vote };

const char* to_string(Family f);
Family family_from_string(const std::string& s);

enum class SplitRule { gini, entropy };

const char* to_string(SplitRule r);
SplitRule split_rule_from_string(const std::string& s);

struct LogisticParams {
  double tolerance = 1e-6;  // gradient norm
  std::size_t max_iters = 10000;
};

struct ElasticNetParams {
  double l1_ratio = 0.5;  // weight of the L1 term inside the penalty
  double lambda = 1.0;
  double tolerance = 1e-4;  // max parameter change
  std::size_t max_iters = 20000;
};

struct RandomForestParams {
  double predictor_fraction = 0.6;
  SplitRule split_rule = SplitRule::gini;
  std::size_t min_node_size = 5;
  std::size_t min_split_size = 8;
  std::size_t n_trees = 500;
};

struct NeuralNetParams {
  double width_multiplier = 1.0;
  std::size_t n_hidden_layers = 2;
  double dropout = 0.0;
  std::size_t batch_size = 128;
  double learning_rate = 1e-3;
  std::size_t max_epochs = 500;
  std::size_t early_stopping_patience = 3;
  double l1_penalty = 1e-5;
  double l2_penalty = 1e-5;
};

struct ClassifierConfig {
  Family family = Family::logistic;
  LogisticParams logistic;
  ElasticNetParams elastic_net;
  RandomForestParams random_forest;
  NeuralNetParams neural_net;
  std::uint64_t seed = 0;

  // Canonical JSON of the active family's parameters; the tuning tie-break
  // orders candidates by this string.
  std::string serialized() const;
  static ClassifierConfig parse(const std::string& json_text);
};

// Full Table-1 grid for a family, in row order. Logistic has a single
// (hyperparameter-free) entry; baselines have none.
std::vector<ClassifierConfig> tuning_grid(Family family);

struct TrainingMetadata {
  std::size_t iterations = 0;  // gradient steps or epochs
  std::string stopping_reason;
  std::optional<double> oob_accuracy;                // forest
  std::optional<double> best_validation_loss;        // neural net
  std::vector<double> epoch_validation_losses;       // neural net trace
  std::vector<std::size_t> early_stopping_holdout;   // row indices held out of training
  std::vector<std::string> warnings;
};

// Immutable fitted model. Width mismatches against the stored input
// dimension are errors; probabilities are deterministic (dropout off).
class TrainedClassifier {
 public:
  virtual ~TrainedClassifier() = default;

  Family family() const { return family_; }
  std::size_t input_dim() const { return input_dim_; }  // 0: any width (baselines)
  std::uint64_t layout_fingerprint() const { return fingerprint_; }
  std::uint64_t seed() const { return seed_; }
  const TrainingMetadata& metadata() const { return metadata_; }

  std::vector<double> predict_proba(const Matrix& X) const;
  double predict_one(std::span<const double> x) const;

 protected:
  TrainedClassifier(Family family, std::size_t input_dim, std::uint64_t fingerprint, std::uint64_t seed)
      : family_(family), input_dim_(input_dim), fingerprint_(fingerprint), seed_(seed) {}

  virtual void predict_impl(const Matrix& X, std::vector<double>& out) const = 0;

  Family family_;
  std::size_t input_dim_;
  std::uint64_t fingerprint_;
  std::uint64_t seed_;
  TrainingMetadata metadata_;

  friend std::unique_ptr<TrainedClassifier> fit_logistic(const Matrix&, const std::vector<int>&,
                                                         const ClassifierConfig&, std::uint64_t);
};

class LinearModel final : public TrainedClassifier {
 public:
  LinearModel(Family family, std::vector<double> weights, double intercept, std::uint64_t fingerprint,
              std::uint64_t seed);

  const std::vector<double>& weights() const { return weights_; }
  double intercept() const { return intercept_; }
  TrainingMetadata& mutable_metadata() { return metadata_; }

 protected:
  void predict_impl(const Matrix& X, std::vector<double>& out) const override;

 private:
  std::vector<double> weights_;
  double intercept_;
};

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;     // go left if x[feature] <= threshold
  std::int32_t left = -1;
  std::int32_t right = -1;
  double p_positive = 0.0;    // leaf class-1 frequency
};

struct DecisionTree {
  std::vector<TreeNode> nodes;
  double predict(std::span<const double> x) const;
};

class ForestModel final : public TrainedClassifier {
 public:
  ForestModel(std::vector<DecisionTree> trees, std::size_t input_dim, std::uint64_t fingerprint,
              std::uint64_t seed);

  const std::vector<DecisionTree>& trees() const { return trees_; }
  TrainingMetadata& mutable_metadata() { return metadata_; }

 protected:
  void predict_impl(const Matrix& X, std::vector<double>& out) const override;

 private:
  std::vector<DecisionTree> trees_;
};

double impurity(SplitRule rule, double p_positive);  // gini in [0,0.5], entropy in bits

struct MlpLayer {
  Matrix weights;  // out x in
  std::vector<double> bias;
};

// Plain fully connected net with relu hidden layers and a sigmoid output
// unit. Exposed so the training loss can be checked against finite
// differences.
struct Mlp {
  std::vector<MlpLayer> layers;

  std::size_t input_dim() const { return layers.empty() ? 0 : layers.front().weights.cols(); }
  double forward(std::span<const double> x) const;
};

// Mean binary cross-entropy over (X, y) plus l1*|W|_1 + l2*|W|_2^2 on the
// weight matrices (biases unpenalized). Fills grad when non-null. This is
// the exact objective minimized by fit_neural_net (per minibatch).
double mlp_loss_and_gradient(const Mlp& net, const Matrix& X, const std::vector<int>& y, double l1,
                             double l2, Mlp* grad);

class MlpModel final : public TrainedClassifier {
 public:
  MlpModel(Mlp net, std::uint64_t fingerprint, std::uint64_t seed);

  const Mlp& net() const { return net_; }
  TrainingMetadata& mutable_metadata() { return metadata_; }

 protected:
  void predict_impl(const Matrix& X, std::vector<double>& out) const override;

 private:
  Mlp net_;
};

class MajorityModel final : public TrainedClassifier {
 public:
  MajorityModel(double constant_probability, std::uint64_t seed);
  double constant_probability() const { return p_; }

 protected:
  void predict_impl(const Matrix& X, std::vector<double>& out) const override;

 private:
  double p_;
};

// Emits 0/1 scores: row i draws from a (seed, i)-keyed uniform and scores 1
// with probability equal to the training prevalence.
class RandomVoteModel final : public TrainedClassifier {
 public:
  RandomVoteModel(double prevalence, std::uint64_t seed);
  double prevalence() const { return prevalence_; }

 protected:
  void predict_impl(const Matrix& X, std::vector<double>& out) const override;

 private:
  double prevalence_;
};

std::unique_ptr<TrainedClassifier> fit_logistic(const Matrix& X, const std::vector<int>& y,
                                                const ClassifierConfig& config,
                                                std::uint64_t layout_fingerprint = 0);

std::unique_ptr<TrainedClassifier> fit_elastic_net(const Matrix& X, const std::vector<int>& y,
                                                   const ClassifierConfig& config,
                                                   std::uint64_t layout_fingerprint = 0);

std::unique_ptr<TrainedClassifier> fit_random_forest(const Matrix& X, const std::vector<int>& y,
                                                     const ClassifierConfig& config,
                                                     std::uint64_t layout_fingerprint = 0,
                                                     unsigned workers = 1);

std::unique_ptr<TrainedClassifier> fit_neural_net(const Matrix& X, const std::vector<int>& y,
                                                  const ClassifierConfig& config,
                                                  std::uint64_t layout_fingerprint = 0);

std::unique_ptr<TrainedClassifier> fit_baseline(const std::vector<int>& y, Family kind,
                                                std::uint64_t seed);

std::unique_ptr<TrainedClassifier> fit_classifier(const Matrix& X, const std::vector<int>& y,
                                                  const ClassifierConfig& config,
                                                  std::uint64_t layout_fingerprint = 0,
                                                  unsigned workers = 1);

// Smooth part of the elastic-net objective (mean logistic loss plus the
// ridge term; L1 excluded) and its gradient, for optimality checks.
double elastic_smooth_loss_and_gradient(const Matrix& X, const std::vector<int>& y,
                                        std::span<const double> weights, double intercept,
                                        double lambda, double l1_ratio, std::vector<double>* grad_w,
                                        double* grad_intercept);

// Versioned binary model format with an FNV-1a trailer checksum.
void save_model(const TrainedClassifier& model, std::ostream& sink);
void save_model_file(const TrainedClassifier& model, const std::string& path);
std::unique_ptr<TrainedClassifier> load_model(std::istream& source);
std::unique_ptr<TrainedClassifier> load_model_file(const std::string& path);

}  // namespace vcml
