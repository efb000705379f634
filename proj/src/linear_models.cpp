#include <algorithm>
#include <cmath>

#include "vcml/classifiers.hpp"

namespace vcml {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow
double log1pexp(double z) {
  if (z > 35.0) return z;
  if (z < -35.0) return std::exp(z);
  return std::log1p(std::exp(z));
}

void check_binary_labels(const Matrix& X, const std::vector<int>& y) {
  if (X.rows() != y.size()) throw Error("fit: X/y row mismatch");
  if (X.rows() == 0) throw Error("fit: empty training set");
  bool has0 = false, has1 = false;
  for (int v : y) {
    if (v == 0) has0 = true;
    else if (v == 1) has1 = true;
    else throw Error("fit: labels must be 0/1");
  }
  if (!has0 || !has1) throw Error("fit: training labels contain a single class");
  for (std::size_t i = 0; i < X.rows(); ++i) {
    for (double v : X.row(i)) {
      if (!std::isfinite(v)) throw Error("fit: non-finite feature value");
    }
  }
}

// Mean negative log-likelihood and its gradient.
double logistic_loss_and_gradient(const Matrix& X, const std::vector<int>& y,
                                  std::span<const double> w, double b, std::vector<double>* grad_w,
                                  double* grad_b) {
  const std::size_t n = X.rows(), d = X.cols();
  if (grad_w) std::fill(grad_w->begin(), grad_w->end(), 0.0);
  double gb = 0.0;
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto xi = X.row(i);
    double z = b;
    for (std::size_t j = 0; j < d; ++j) z += w[j] * xi[j];
    loss += log1pexp(z) - (y[i] == 1 ? z : 0.0);
    const double residual = sigmoid(z) - static_cast<double>(y[i]);
    if (grad_w) {
      for (std::size_t j = 0; j < d; ++j) (*grad_w)[j] += residual * xi[j];
    }
    gb += residual;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  if (grad_w) {
    for (double& g : *grad_w) g *= inv_n;
  }
  if (grad_b) *grad_b = gb * inv_n;
  return loss * inv_n;
}

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

}  // namespace

LinearModel::LinearModel(Family family, std::vector<double> weights, double intercept,
                         std::uint64_t fingerprint, std::uint64_t seed)
    : TrainedClassifier(family, weights.size(), fingerprint, seed),
      weights_(std::move(weights)),
      intercept_(intercept) {}

void LinearModel::predict_impl(const Matrix& X, std::vector<double>& out) const {
  for (std::size_t i = 0; i < X.rows(); ++i) {
    const auto xi = X.row(i);
    double z = intercept_;
    for (std::size_t j = 0; j < weights_.size(); ++j) z += weights_[j] * xi[j];
    out[i] = sigmoid(z);
  }
}

std::unique_ptr<TrainedClassifier> fit_logistic(const Matrix& X, const std::vector<int>& y,
                                                const ClassifierConfig& config,
                                                std::uint64_t layout_fingerprint) {
  check_binary_labels(X, y);
  const std::size_t d = X.cols();
  const auto& params = config.logistic;

  std::vector<double> w(d, 0.0), grad_w(d, 0.0), trial_w(d, 0.0);
  double b = 0.0, grad_b = 0.0;
  double step = 1.0;
  double loss = logistic_loss_and_gradient(X, y, w, b, &grad_w, &grad_b);
  std::size_t iter = 0;
  std::string reason = "max_iterations";
  for (; iter < params.max_iters; ++iter) {
    double grad_norm_sq = grad_b * grad_b;
    for (double g : grad_w) grad_norm_sq += g * g;
    if (std::sqrt(grad_norm_sq) <= params.tolerance) {
      reason = "gradient_tolerance";
      break;
    }
    // Backtracking line search with Armijo condition.
    step *= 2.0;
    double trial_b = 0.0, trial_loss = 0.0;
    for (;;) {
      for (std::size_t j = 0; j < d; ++j) trial_w[j] = w[j] - step * grad_w[j];
      trial_b = b - step * grad_b;
      trial_loss = logistic_loss_and_gradient(X, y, trial_w, trial_b, nullptr, nullptr);
      if (trial_loss <= loss - 0.5 * step * grad_norm_sq || step < 1e-18) break;
      step *= 0.5;
    }
    w.swap(trial_w);
    b = trial_b;
    loss = logistic_loss_and_gradient(X, y, w, b, &grad_w, &grad_b);
  }

  auto model = std::make_unique<LinearModel>(Family::logistic, std::move(w), b, layout_fingerprint,
                                             config.seed);
  model->mutable_metadata().iterations = iter;
  model->mutable_metadata().stopping_reason = reason;
  return model;
}

double elastic_smooth_loss_and_gradient(const Matrix& X, const std::vector<int>& y,
                                        std::span<const double> weights, double intercept,
                                        double lambda, double l1_ratio, std::vector<double>* grad_w,
                                        double* grad_intercept) {
  double loss = logistic_loss_and_gradient(X, y, weights, intercept, grad_w, grad_intercept);
  const double ridge = lambda * (1.0 - l1_ratio);
  for (std::size_t j = 0; j < weights.size(); ++j) {
    loss += 0.5 * ridge * weights[j] * weights[j];
    if (grad_w) (*grad_w)[j] += ridge * weights[j];
  }
  return loss;
}

std::unique_ptr<TrainedClassifier> fit_elastic_net(const Matrix& X, const std::vector<int>& y,
                                                   const ClassifierConfig& config,
                                                   std::uint64_t layout_fingerprint) {
  check_binary_labels(X, y);
  const auto& params = config.elastic_net;
  if (params.lambda <= 0.0) throw Error("fit_elastic_net: lambda must be positive (use fit_logistic)");
  if (params.l1_ratio < 0.0 || params.l1_ratio > 1.0) throw Error("fit_elastic_net: l1_ratio outside [0,1]");

  const std::size_t d = X.cols();
  const double l1 = params.lambda * params.l1_ratio;

  // FISTA on the smooth part (logistic loss + ridge), soft-thresholding for
  // the L1 term, intercept unpenalized. Restart on objective increase.
  std::vector<double> w(d, 0.0), w_prev(d, 0.0), v(d, 0.0), grad_w(d, 0.0), trial_w(d, 0.0);
  double b = 0.0, b_prev = 0.0, vb = 0.0, grad_b = 0.0;
  double momentum = 1.0;
  double step = 1.0;

  auto objective = [&](std::span<const double> wv, double bv) {
    double obj = elastic_smooth_loss_and_gradient(X, y, wv, bv, params.lambda, params.l1_ratio,
                                                  nullptr, nullptr);
    for (double x : wv) obj += l1 * std::abs(x);
    return obj;
  };

  double best_obj = objective(w, b);
  std::size_t iter = 0;
  std::string reason = "max_iterations";
  for (; iter < params.max_iters; ++iter) {
    const double smooth_v = elastic_smooth_loss_and_gradient(X, y, v, vb, params.lambda,
                                                             params.l1_ratio, &grad_w, &grad_b);
    // Backtracking: quadratic upper bound at the extrapolation point.
    step *= 1.5;
    double trial_b = 0.0;
    for (;;) {
      for (std::size_t j = 0; j < d; ++j) trial_w[j] = soft_threshold(v[j] - step * grad_w[j], step * l1);
      trial_b = vb - step * grad_b;
      double quad = smooth_v, dist_sq = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double diff = trial_w[j] - v[j];
        quad += grad_w[j] * diff;
        dist_sq += diff * diff;
      }
      const double diff_b = trial_b - vb;
      quad += grad_b * diff_b;
      dist_sq += diff_b * diff_b;
      quad += dist_sq / (2.0 * step);
      const double smooth_trial = elastic_smooth_loss_and_gradient(X, y, trial_w, trial_b,
                                                                   params.lambda, params.l1_ratio,
                                                                   nullptr, nullptr);
      if (smooth_trial <= quad + 1e-12 || step < 1e-18) break;
      step *= 0.5;
    }

    double max_change = std::abs(trial_b - b);
    for (std::size_t j = 0; j < d; ++j) max_change = std::max(max_change, std::abs(trial_w[j] - w[j]));

    w_prev.swap(w);
    b_prev = b;
    w = trial_w;
    b = trial_b;

    const double obj = objective(w, b);
    if (obj > best_obj + 1e-12) {
      // Restart momentum when the objective regresses.
      momentum = 1.0;
      v = w;
      vb = b;
    } else {
      const double next_momentum = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
      const double beta = (momentum - 1.0) / next_momentum;
      for (std::size_t j = 0; j < d; ++j) v[j] = w[j] + beta * (w[j] - w_prev[j]);
      vb = b + beta * (b - b_prev);
      momentum = next_momentum;
    }
    best_obj = std::min(best_obj, obj);

    if (max_change < params.tolerance) {
      reason = "parameter_tolerance";
      ++iter;
      break;
    }
  }

  auto model = std::make_unique<LinearModel>(Family::elastic_net, std::move(w), b, layout_fingerprint,
                                             config.seed);
  model->mutable_metadata().iterations = iter;
  model->mutable_metadata().stopping_reason = reason;
  return model;
}

}  // namespace vcml
