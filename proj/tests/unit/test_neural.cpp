#include <doctest.h>

#include <cmath>
#include <random>

#include "vcml/classifiers.hpp"

using namespace vcml;

namespace {

ClassifierConfig nn_config() {
  ClassifierConfig c;
  c.family = Family::neural_net;
  c.neural_net.width_multiplier = 2.0;
  c.neural_net.n_hidden_layers = 2;
  c.neural_net.dropout = 0.0;
  c.neural_net.batch_size = 32;
  c.neural_net.learning_rate = 1e-2;
  c.neural_net.max_epochs = 300;
  c.seed = 4;
  return c;
}

void make_xor(std::size_t n, Matrix& X, std::vector<int>& y, std::uint64_t seed) {
  X = Matrix(n, 2);
  y.assign(n, 0);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.1, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double sx = i % 2 == 0 ? 1.0 : -1.0;
    const double sy = (i / 2) % 2 == 0 ? 1.0 : -1.0;
    X(i, 0) = sx * uniform(rng);
    X(i, 1) = sy * uniform(rng);
    y[i] = (sx * sy > 0) ? 1 : 0;
  }
}

}  // namespace

TEST_CASE("nn: hidden width follows round(input_dim * multiplier)") {
  Matrix X(40, 100);
  std::vector<int> y(40);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t i = 0; i < 40; ++i) {
    for (std::size_t j = 0; j < 100; ++j) X(i, j) = normal(rng);
    y[i] = i % 2;
  }
  auto c = nn_config();
  c.neural_net.width_multiplier = 0.5;
  c.neural_net.max_epochs = 1;
  const auto model = fit_neural_net(X, y, c);
  const auto& mlp = static_cast<const MlpModel&>(*model);
  REQUIRE(mlp.net().layers.size() == 3);  // 2 hidden + output
  CHECK(mlp.net().layers[0].weights.rows() == 50);
  CHECK(mlp.net().layers[1].weights.rows() == 50);
  CHECK(mlp.net().layers[2].weights.rows() == 1);
}

TEST_CASE("nn: two hidden layers learn XOR") {
  Matrix X;
  std::vector<int> y;
  make_xor(200, X, y, 21);
  const auto model = fit_neural_net(X, y, nn_config());
  const auto scores = model->predict_proba(X);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if ((scores[i] >= 0.5 ? 1 : 0) == y[i]) ++correct;
  }
  CHECK(static_cast<double>(correct) / static_cast<double>(y.size()) > 0.95);
}

TEST_CASE("nn: loss gradient matches central finite differences") {
  std::mt19937_64 rng(33);
  std::normal_distribution<double> normal(0.0, 1.0);
  Mlp net;
  // 3 -> 2 -> 1 with nonzero weights everywhere.
  for (const auto& [rows, cols] : std::vector<std::pair<std::size_t, std::size_t>>{{2, 3}, {1, 2}}) {
    MlpLayer layer{Matrix(rows, cols), std::vector<double>(rows)};
    for (std::size_t k = 0; k < rows * cols; ++k) layer.weights.data()[k] = 0.5 * normal(rng);
    for (auto& b : layer.bias) b = 0.3 * normal(rng);
    net.layers.push_back(std::move(layer));
  }
  Matrix X(7, 3);
  std::vector<int> y(7);
  for (std::size_t i = 0; i < 7; ++i) {
    for (std::size_t j = 0; j < 3; ++j) X(i, j) = normal(rng);
    y[i] = i % 2;
  }
  Mlp grad;
  mlp_loss_and_gradient(net, X, y, 1e-4, 1e-4, &grad);
  const double h = 1e-6;
  double worst = 0.0;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    auto& W = net.layers[l].weights;
    for (std::size_t k = 0; k < W.rows() * W.cols(); ++k) {
      const double saved = W.data()[k];
      W.data()[k] = saved + h;
      const double up = mlp_loss_and_gradient(net, X, y, 1e-4, 1e-4, nullptr);
      W.data()[k] = saved - h;
      const double down = mlp_loss_and_gradient(net, X, y, 1e-4, 1e-4, nullptr);
      W.data()[k] = saved;
      const double fd = (up - down) / (2.0 * h);
      const double analytic = grad.layers[l].weights.data()[k];
      worst = std::max(worst, std::abs(fd - analytic) / std::max(1.0, std::abs(fd)));
    }
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("nn: early stopping returns the best-validation weights") {
  Matrix X;
  std::vector<int> y;
  make_xor(150, X, y, 55);
  auto c = nn_config();
  c.neural_net.max_epochs = 60;
  const auto model = fit_neural_net(X, y, c);
  const auto& meta = model->metadata();
  REQUIRE(meta.best_validation_loss.has_value());
  REQUIRE_FALSE(meta.epoch_validation_losses.empty());

  const double best_recorded =
      *std::min_element(meta.epoch_validation_losses.begin(), meta.epoch_validation_losses.end());
  CHECK(*meta.best_validation_loss == doctest::Approx(best_recorded));

  // Recompute the holdout BCE of the returned weights; it must equal the
  // best epoch's loss, never exceed it.
  const auto& holdout = meta.early_stopping_holdout;
  REQUIRE_FALSE(holdout.empty());
  double loss = 0.0;
  const auto& mlp = static_cast<const MlpModel&>(*model);
  for (const std::size_t i : holdout) {
    const double p = std::clamp(mlp.net().forward(X.row(i)), 1e-12, 1.0 - 1e-12);
    loss -= y[i] == 1 ? std::log(p) : std::log(1.0 - p);
  }
  loss /= static_cast<double>(holdout.size());
  CHECK(loss == doctest::Approx(*meta.best_validation_loss).epsilon(1e-9));
}

TEST_CASE("nn: oversized batch is clamped with a warning") {
  Matrix X;
  std::vector<int> y;
  make_xor(40, X, y, 66);
  auto c = nn_config();
  c.neural_net.batch_size = 512;
  c.neural_net.max_epochs = 3;
  const auto model = fit_neural_net(X, y, c);
  bool clamped = false;
  for (const auto& w : model->metadata().warnings) {
    if (w.find("clamped") != std::string::npos) clamped = true;
  }
  CHECK(clamped);
}

TEST_CASE("nn: deterministic fits and inference without dropout noise") {
  Matrix X;
  std::vector<int> y;
  make_xor(80, X, y, 88);
  auto c = nn_config();
  c.neural_net.dropout = 0.2;
  c.neural_net.max_epochs = 15;
  const auto a = fit_neural_net(X, y, c);
  const auto b = fit_neural_net(X, y, c);
  CHECK(a->predict_proba(X) == b->predict_proba(X));
  CHECK(a->predict_proba(X) == a->predict_proba(X));  // dropout off at inference
}
