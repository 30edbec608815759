#pragma once

#include <cmath>
#include <numbers>
#include <optional>

#include <Eigen/Dense>

#include "rlsp/nn.hpp"

namespace rlsp {

struct MixtureDensityHead {
  int components = 5;
  double fixed_variance = 0.05;

  void validate() const {
    if (components < 1) throw ConfigError("MixtureDensityHead: need at least one component");
    if (!(fixed_variance > 0.0)) throw ConfigError("MixtureDensityHead: fixed_variance must be > 0");
  }
};

/// Conditional Gaussian mixture p(y | x) with shared fixed isotropic variance.
/// Network output rows: K mixture logits, then K blocks of d means.
struct MixtureDensityModel {
  MixtureDensityHead head;
  Normalizer input_norm;
  Mlp net;
  int target_dim = 1;
  Eigen::VectorXd lower, upper;  // sample clipping bounds; empty = none
  double train_loss = 0.0;

  struct Mixture {
    Eigen::VectorXd weights;  // K
    Eigen::MatrixXd means;    // d x K
  };

  Mixture mixture(const Eigen::VectorXd& x) const {
    const Eigen::VectorXd out = net.forward(input_norm.apply(x)).col(0);
    return split(out);
  }

  Mixture split(const Eigen::VectorXd& out) const {
    const int K = head.components;
    Mixture m;
    const double mx = out.head(K).maxCoeff();
    m.weights = (out.head(K).array() - mx).exp();
    m.weights /= m.weights.sum();
    m.means = Eigen::Map<const Eigen::MatrixXd>(out.data() + K, target_dim, K);
    return m;
  }

  double log_prob(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
    const Mixture m = mixture(x);
    const double var = head.fixed_variance;
    const double log_norm = -0.5 * target_dim * std::log(2.0 * std::numbers::pi * var);
    Eigen::VectorXd terms(head.components);
    for (int k = 0; k < head.components; ++k)
      terms(k) = std::log(m.weights(k)) + log_norm - 0.5 * (y - m.means.col(k)).squaredNorm() / var;
    const double mx = terms.maxCoeff();
    return mx + std::log((terms.array() - mx).exp().sum());
  }

  Eigen::VectorXd sample(const Eigen::VectorXd& x, Rng& rng) const {
    const Mixture m = mixture(x);
    const int k = sample_categorical(m.weights, rng);
    Eigen::VectorXd y = m.means.col(k);
    const double sd = std::sqrt(head.fixed_variance);
    for (int i = 0; i < target_dim; ++i) y(i) += sd * standard_normal(rng);
    if (lower.size() == target_dim) y = y.cwiseMax(lower).cwiseMin(upper);
    return y;
  }

  /// Mean negative log-likelihood over columns and its parameter gradient.
  double nll_and_grad(const Eigen::MatrixXd& x_cols, const Eigen::MatrixXd& y_cols, Eigen::VectorXd* grad) const {
    const int K = head.components, d = target_dim;
    const Eigen::Index N = x_cols.cols();
    const double var = head.fixed_variance;
    const double log_norm = -0.5 * d * std::log(2.0 * std::numbers::pi * var);
    Mlp::Cache cache;
    const Eigen::MatrixXd out = net.forward(input_norm.apply(x_cols), cache);
    Eigen::MatrixXd d_out(out.rows(), N);
    double total = 0.0;
    Eigen::VectorXd logw(K), terms(K);
    for (Eigen::Index n = 0; n < N; ++n) {
      const auto o = out.col(n);
      const double mx = o.head(K).maxCoeff();
      const double lse = mx + std::log((o.head(K).array() - mx).exp().sum());
      logw = o.head(K).array() - lse;
      for (int k = 0; k < K; ++k)
        terms(k) = logw(k) + log_norm - 0.5 * (y_cols.col(n) - o.segment(K + k * d, d)).squaredNorm() / var;
      const double tm = terms.maxCoeff();
      const double lp = tm + std::log((terms.array() - tm).exp().sum());
      total -= lp;
      const Eigen::VectorXd resp = (terms.array() - lp).exp();
      d_out.col(n).head(K) = logw.array().exp().matrix() - resp;
      for (int k = 0; k < K; ++k) d_out.col(n).segment(K + k * d, d) = resp(k) * (o.segment(K + k * d, d) - y_cols.col(n)) / var;
    }
    if (grad) *grad = net.backward(cache, d_out / static_cast<double>(N));
    return total / static_cast<double>(N);
  }
};

inline MixtureDensityModel make_density_model(int input_dim, int target_dim, const ApproximatorConfig& cfg,
                                              const MixtureDensityHead& head, Rng& rng) {
  MixtureDensityModel m;
  m.head = head;
  m.target_dim = target_dim;
  m.input_norm = Normalizer::identity(input_dim);
  m.net = Mlp(input_dim, cfg.layer_sizes, head.components * (1 + target_dim), cfg.activation, rng);
  return m;
}

/// Maximum-likelihood fit of the mixture with fixed component variance.
inline MixtureDensityModel train_density_model(const SupervisedData& data, const ApproximatorConfig& cfg,
                                               const MixtureDensityHead& head) {
  cfg.validate();
  head.validate();
  data.check();
  Rng rng = make_stream(cfg.seed, 2);
  MixtureDensityModel m = make_density_model(static_cast<int>(data.inputs.cols()), static_cast<int>(data.targets.cols()), cfg, head, rng);
  if (cfg.normalize_inputs) m.input_norm = Normalizer::fit(data.inputs);
  // Spread the initial means over the target range so components do not collapse onto one mode.
  {
    auto b = m.net.bias(static_cast<std::size_t>(m.net.num_layers() - 1));
    const Eigen::VectorXd lo = data.targets.colwise().minCoeff().transpose();
    const Eigen::VectorXd hi = data.targets.colwise().maxCoeff().transpose();
    for (int k = 0; k < head.components; ++k)
      for (int i = 0; i < m.target_dim; ++i) b(head.components + k * m.target_dim + i) = lo(i) + (hi(i) - lo(i)) * uniform01(rng);
  }
  MomentumSgd opt{cfg.learning_rate, cfg.momentum, cfg.grad_clip, {}};
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    int b = 0;
    for (const auto& idx : minibatches(data.size(), cfg.batch_size, rng)) {
      Eigen::VectorXd grad;
      const double loss = m.nll_and_grad(gather_cols(data.inputs, idx), gather_cols(data.targets, idx), &grad);
      require_finite_loss(loss, "train_density_model", epoch, b++);
      opt.step(m.net.params(), std::move(grad));
    }
  }
  m.train_loss = m.nll_and_grad(data.inputs.transpose(), data.targets.transpose(), nullptr);
  return m;
}

}  // namespace rlsp
