#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "vcml/classifiers.hpp"

namespace vcml {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double log1pexp(double z) {
  if (z > 35.0) return z;
  if (z < -35.0) return std::exp(z);
  return std::log1p(std::exp(z));
}

struct ForwardState {
  // activations[l] is the input to layer l; activations.back() is z_out.
  std::vector<std::vector<double>> activations;
  std::vector<std::vector<double>> pre_relu;  // per hidden layer
  double output_logit = 0.0;
};

void forward_sample(const Mlp& net, std::span<const double> x, ForwardState& state,
                    const std::vector<std::vector<double>>* dropout_scale) {
  const std::size_t n_layers = net.layers.size();
  state.activations.assign(n_layers, {});
  state.pre_relu.assign(n_layers > 0 ? n_layers - 1 : 0, {});
  std::vector<double> current(x.begin(), x.end());
  for (std::size_t l = 0; l < n_layers; ++l) {
    state.activations[l] = current;
    const auto& layer = net.layers[l];
    const std::size_t out_dim = layer.weights.rows();
    std::vector<double> z(out_dim, 0.0);
    for (std::size_t o = 0; o < out_dim; ++o) {
      double acc = layer.bias[o];
      const auto row = layer.weights.row(o);
      for (std::size_t j = 0; j < current.size(); ++j) acc += row[j] * current[j];
      z[o] = acc;
    }
    if (l + 1 == n_layers) {
      state.output_logit = z[0];
      return;
    }
    state.pre_relu[l] = z;
    for (double& v : z) v = std::max(0.0, v);
    if (dropout_scale) {
      const auto& scale = (*dropout_scale)[l];
      for (std::size_t o = 0; o < out_dim; ++o) z[o] *= scale[o];
    }
    current = std::move(z);
  }
}

Mlp zeros_like(const Mlp& net) {
  Mlp g;
  g.layers.reserve(net.layers.size());
  for (const auto& layer : net.layers) {
    g.layers.push_back({Matrix(layer.weights.rows(), layer.weights.cols(), 0.0),
                        std::vector<double>(layer.bias.size(), 0.0)});
  }
  return g;
}

// Core backprop. dropout_scale, when present, holds per-hidden-layer
// multipliers (0 for dropped units, 1/(1-p) for kept ones).
double loss_and_gradient_impl(const Mlp& net, const Matrix& X, const std::vector<int>& y, double l1,
                              double l2, const std::vector<std::vector<std::vector<double>>>* dropout_scale,
                              Mlp* grad) {
  const std::size_t n = X.rows();
  const std::size_t n_layers = net.layers.size();
  if (grad) *grad = zeros_like(net);

  double loss = 0.0;
  ForwardState state;
  std::vector<std::vector<double>> deltas(n_layers);
  for (std::size_t i = 0; i < n; ++i) {
    const auto* sample_scale = dropout_scale ? &(*dropout_scale)[i] : nullptr;
    forward_sample(net, X.row(i), state, sample_scale);
    const double z = state.output_logit;
    loss += log1pexp(z) - (y[i] == 1 ? z : 0.0);
    if (!grad) continue;

    // Output delta: dL/dz = sigma(z) - y.
    deltas[n_layers - 1] = {sigmoid(z) - static_cast<double>(y[i])};
    for (std::size_t l = n_layers - 1; l-- > 0;) {
      const auto& upper = net.layers[l + 1];
      const auto& upper_delta = deltas[l + 1];
      std::vector<double> delta(net.layers[l].weights.rows(), 0.0);
      for (std::size_t o = 0; o < upper.weights.rows(); ++o) {
        const auto row = upper.weights.row(o);
        for (std::size_t j = 0; j < delta.size(); ++j) delta[j] += row[j] * upper_delta[o];
      }
      for (std::size_t j = 0; j < delta.size(); ++j) {
        if (sample_scale) delta[j] *= (*sample_scale)[l][j];
        if (state.pre_relu[l][j] <= 0.0) delta[j] = 0.0;
      }
      deltas[l] = std::move(delta);
    }
    for (std::size_t l = 0; l < n_layers; ++l) {
      auto& gl = grad->layers[l];
      const auto& input = state.activations[l];
      const auto& delta = deltas[l];
      for (std::size_t o = 0; o < gl.weights.rows(); ++o) {
        auto row = gl.weights.row(o);
        for (std::size_t j = 0; j < input.size(); ++j) row[j] += delta[o] * input[j];
        gl.bias[o] += delta[o];
      }
    }
  }

  const double inv_n = 1.0 / static_cast<double>(n);
  loss *= inv_n;
  if (grad) {
    for (auto& gl : grad->layers) {
      for (double* p = gl.weights.data(); p != gl.weights.data() + gl.weights.rows() * gl.weights.cols(); ++p)
        *p *= inv_n;
      for (double& bval : gl.bias) bval *= inv_n;
    }
  }

  // L1/L2 penalties on weight matrices only.
  for (std::size_t l = 0; l < n_layers; ++l) {
    const auto& W = net.layers[l].weights;
    const std::size_t count = W.rows() * W.cols();
    for (std::size_t k = 0; k < count; ++k) {
      const double wv = W.data()[k];
      loss += l1 * std::abs(wv) + l2 * wv * wv;
      if (grad) grad->layers[l].weights.data()[k] += l1 * (wv > 0.0 ? 1.0 : (wv < 0.0 ? -1.0 : 0.0)) + 2.0 * l2 * wv;
    }
  }
  return loss;
}

}  // namespace

double Mlp::forward(std::span<const double> x) const {
  ForwardState state;
  forward_sample(*this, x, state, nullptr);
  return sigmoid(state.output_logit);
}

double mlp_loss_and_gradient(const Mlp& net, const Matrix& X, const std::vector<int>& y, double l1,
                             double l2, Mlp* grad) {
  return loss_and_gradient_impl(net, X, y, l1, l2, nullptr, grad);
}

MlpModel::MlpModel(Mlp net, std::uint64_t fingerprint, std::uint64_t seed)
    : TrainedClassifier(Family::neural_net, net.input_dim(), fingerprint, seed), net_(std::move(net)) {}

void MlpModel::predict_impl(const Matrix& X, std::vector<double>& out) const {
  for (std::size_t i = 0; i < X.rows(); ++i) out[i] = net_.forward(X.row(i));
}

std::unique_ptr<TrainedClassifier> fit_neural_net(const Matrix& X, const std::vector<int>& y,
                                                  const ClassifierConfig& config,
                                                  std::uint64_t layout_fingerprint) {
  if (X.rows() != y.size() || X.rows() == 0) throw Error("fit_neural_net: bad training set");
  bool has0 = false, has1 = false;
  for (int v : y) {
    if (v == 0) has0 = true;
    else if (v == 1) has1 = true;
    else throw Error("fit_neural_net: labels must be 0/1");
  }
  if (!has0 || !has1) throw Error("fit_neural_net: training labels contain a single class");

  const auto& params = config.neural_net;
  const std::size_t d = X.cols();
  const auto hidden = static_cast<std::size_t>(
      std::max<long long>(1, std::llround(params.width_multiplier * static_cast<double>(d))));

  // Glorot-uniform init.
  Mlp net;
  std::size_t fan_in = d;
  for (std::size_t l = 0; l <= params.n_hidden_layers; ++l) {
    const std::size_t fan_out = l == params.n_hidden_layers ? 1 : hidden;
    MlpLayer layer{Matrix(fan_out, fan_in), std::vector<double>(fan_out, 0.0)};
    std::mt19937_64 rng(mix_seed(config.seed, 0x11C0 + l));
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> uniform(-bound, bound);
    for (std::size_t k = 0; k < fan_out * fan_in; ++k) layer.weights.data()[k] = uniform(rng);
    net.layers.push_back(std::move(layer));
    fan_in = fan_out;
  }

  TrainingMetadata meta;

  // 10% stratified holdout for early stopping.
  std::vector<std::size_t> positives, negatives;
  for (std::size_t i = 0; i < y.size(); ++i) (y[i] == 1 ? positives : negatives).push_back(i);
  std::mt19937_64 split_rng(mix_seed(config.seed, 0xE5));
  std::shuffle(positives.begin(), positives.end(), split_rng);
  std::shuffle(negatives.begin(), negatives.end(), split_rng);
  const auto n_hold_pos = static_cast<std::size_t>(std::llround(0.1 * static_cast<double>(positives.size())));
  const auto n_hold_neg = static_cast<std::size_t>(std::llround(0.1 * static_cast<double>(negatives.size())));
  std::vector<std::size_t> holdout, train_rows;
  for (std::size_t i = 0; i < positives.size(); ++i)
    (i < n_hold_pos ? holdout : train_rows).push_back(positives[i]);
  for (std::size_t i = 0; i < negatives.size(); ++i)
    (i < n_hold_neg ? holdout : train_rows).push_back(negatives[i]);
  if (holdout.empty() && train_rows.size() > 1) {
    holdout.push_back(train_rows.back());
    train_rows.pop_back();
  }
  std::sort(holdout.begin(), holdout.end());
  std::sort(train_rows.begin(), train_rows.end());
  meta.early_stopping_holdout = holdout;

  const bool train_two_class =
      std::any_of(train_rows.begin(), train_rows.end(), [&](std::size_t i) { return y[i] == 1; }) &&
      std::any_of(train_rows.begin(), train_rows.end(), [&](std::size_t i) { return y[i] == 0; });
  if (!train_two_class) {
    // Degenerate split; train on everything without early stopping.
    train_rows.resize(y.size());
    std::iota(train_rows.begin(), train_rows.end(), 0);
    holdout.clear();
    meta.early_stopping_holdout.clear();
    meta.warnings.push_back("holdout left training single-class; early stopping disabled");
  }

  std::size_t batch_size = params.batch_size;
  if (batch_size > train_rows.size()) {
    batch_size = train_rows.size();
    meta.warnings.push_back("batch_size clamped to " + std::to_string(batch_size));
  }
  if (batch_size == 0) batch_size = 1;

  Matrix holdout_X(holdout.size(), d);
  std::vector<int> holdout_y(holdout.size());
  for (std::size_t k = 0; k < holdout.size(); ++k) {
    holdout_X.set_row(k, X.row(holdout[k]));
    holdout_y[k] = y[holdout[k]];
  }
  auto validation_loss = [&](const Mlp& candidate) {
    double loss = 0.0;
    for (std::size_t k = 0; k < holdout.size(); ++k) {
      const double z_prob = candidate.forward(holdout_X.row(k));
      const double p = std::clamp(z_prob, 1e-12, 1.0 - 1e-12);
      loss -= holdout_y[k] == 1 ? std::log(p) : std::log(1.0 - p);
    }
    return holdout.empty() ? 0.0 : loss / static_cast<double>(holdout.size());
  };

  // AdamW state.
  Mlp m_state = zeros_like(net), v_state = zeros_like(net);
  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8, weight_decay = 0.01;
  std::size_t adam_t = 0;

  Mlp best = net;
  double best_val = std::numeric_limits<double>::infinity();
  std::size_t epochs_without_improvement = 0;
  std::size_t epoch = 0;
  std::string reason = "max_epochs";

  std::vector<std::size_t> order = train_rows;
  Mlp grad;
  for (; epoch < params.max_epochs; ++epoch) {
    std::mt19937_64 epoch_rng(mix_seed(config.seed, 0xB000 + epoch));
    std::shuffle(order.begin(), order.end(), epoch_rng);
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::size_t end = std::min(order.size(), start + batch_size);
      Matrix batch_X(end - start, d);
      std::vector<int> batch_y(end - start);
      for (std::size_t k = start; k < end; ++k) {
        batch_X.set_row(k - start, X.row(order[k]));
        batch_y[k - start] = y[order[k]];
      }

      const std::vector<std::vector<std::vector<double>>>* scale_ptr = nullptr;
      std::vector<std::vector<std::vector<double>>> scales;
      if (params.dropout > 0.0) {
        scales.assign(batch_X.rows(), std::vector<std::vector<double>>(params.n_hidden_layers,
                                                                       std::vector<double>(hidden, 0.0)));
        std::mt19937_64 mask_rng(mix_seed(config.seed, 0xD000 + epoch, start));
        std::uniform_real_distribution<double> uniform(0.0, 1.0);
        const double keep = 1.0 - params.dropout;
        for (auto& sample : scales) {
          for (auto& layer_scale : sample) {
            for (double& s : layer_scale) s = uniform(mask_rng) < keep ? 1.0 / keep : 0.0;
          }
        }
        scale_ptr = &scales;
      }

      loss_and_gradient_impl(net, batch_X, batch_y, params.l1_penalty, params.l2_penalty, scale_ptr,
                             &grad);

      ++adam_t;
      const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(adam_t));
      const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(adam_t));
      for (std::size_t l = 0; l < net.layers.size(); ++l) {
        auto& W = net.layers[l].weights;
        auto& b = net.layers[l].bias;
        const std::size_t count = W.rows() * W.cols();
        for (std::size_t k = 0; k < count; ++k) {
          const double g = grad.layers[l].weights.data()[k];
          double& m = m_state.layers[l].weights.data()[k];
          double& v = v_state.layers[l].weights.data()[k];
          m = beta1 * m + (1.0 - beta1) * g;
          v = beta2 * v + (1.0 - beta2) * g * g;
          const double update = (m / bc1) / (std::sqrt(v / bc2) + eps);
          W.data()[k] -= params.learning_rate * (update + weight_decay * W.data()[k]);
        }
        for (std::size_t k = 0; k < b.size(); ++k) {
          const double g = grad.layers[l].bias[k];
          double& m = m_state.layers[l].bias[k];
          double& v = v_state.layers[l].bias[k];
          m = beta1 * m + (1.0 - beta1) * g;
          v = beta2 * v + (1.0 - beta2) * g * g;
          b[k] -= params.learning_rate * (m / bc1) / (std::sqrt(v / bc2) + eps);
        }
      }
    }

    if (holdout.empty()) continue;
    const double val = validation_loss(net);
    meta.epoch_validation_losses.push_back(val);
    if (val < best_val) {
      best_val = val;
      best = net;
      epochs_without_improvement = 0;
    } else {
      ++epochs_without_improvement;
      if (epochs_without_improvement >= params.early_stopping_patience) {
        ++epoch;
        reason = "early_stopping";
        break;
      }
    }
  }

  meta.iterations = epoch;
  meta.stopping_reason = reason;
  if (!holdout.empty()) {
    meta.best_validation_loss = best_val;
    net = std::move(best);
  }

  auto model = std::make_unique<MlpModel>(std::move(net), layout_fingerprint, config.seed);
  model->mutable_metadata() = std::move(meta);
  return model;
}

}  // namespace vcml
