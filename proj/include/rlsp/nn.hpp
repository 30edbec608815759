#pragma once

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rlsp/error.hpp"
#include "rlsp/random.hpp"

namespace rlsp {

enum class Activation { relu, tanh, linear };

inline Activation parse_activation(const std::string& name) {
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  if (name == "linear") return Activation::linear;
  throw ConfigError("unknown activation '" + name + "'");
}

inline std::string to_string(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    default: return "linear";
  }
}

struct ApproximatorConfig {
  std::vector<int> layer_sizes{128, 128, 128};  // hidden layers
  Activation activation = Activation::relu;
  double learning_rate = 1e-3;
  double momentum = 0.9;
  int batch_size = 64;
  int epochs = 50;
  std::uint64_t seed = 0;
  bool normalize_inputs = true;
  double grad_clip = 0.0;  // global norm; 0 disables

  void validate() const {
    if (layer_sizes.empty()) throw ConfigError("ApproximatorConfig: at least one hidden layer required");
    for (int n : layer_sizes)
      if (n < 1) throw ConfigError("ApproximatorConfig: layer sizes must be positive");
    if (batch_size < 1) throw ConfigError("ApproximatorConfig: batch_size must be >= 1");
    if (!(learning_rate > 0.0)) throw ConfigError("ApproximatorConfig: learning_rate must be > 0");
    if (epochs < 0) throw ConfigError("ApproximatorConfig: negative epoch count");
  }
};

/// Per-dimension affine normalization; std is floored at 1e-8.
struct Normalizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd std;

  static constexpr double kStdFloor = 1e-8;

  static Normalizer identity(int dim) { return {Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Ones(dim)}; }

  /// Fits on rows of `data`. Sets `degenerate` when some dimension had zero variance.
  static Normalizer fit(const Eigen::MatrixXd& data, bool* degenerate = nullptr) {
    Normalizer n;
    n.mean = data.colwise().mean().transpose();
    n.std = ((data.rowwise() - n.mean.transpose()).array().square().colwise().mean()).sqrt().transpose();
    bool floored = false;
    for (Eigen::Index i = 0; i < n.std.size(); ++i)
      if (!(n.std(i) > kStdFloor)) {
        n.std(i) = kStdFloor;
        floored = true;
      }
    if (degenerate) *degenerate = floored;
    return n;
  }

  int dim() const { return static_cast<int>(mean.size()); }

  /// Columns are samples.
  Eigen::MatrixXd apply(const Eigen::MatrixXd& cols) const {
    if (cols.rows() != mean.size()) throw ArgumentError("Normalizer: input has the wrong number of rows");
    return (cols.colwise() - mean).array().colwise() / std.array();
  }
  Eigen::MatrixXd invert(const Eigen::MatrixXd& cols) const {
    return (cols.array().colwise() * std.array()).matrix().colwise() + mean;
  }
};

/// Fully connected network with a linear output layer. Parameters live in one flat vector.
class Mlp {
 public:
  struct Cache {
    std::vector<Eigen::MatrixXd> z;  // pre-activations per layer
    std::vector<Eigen::MatrixXd> a;  // a[0] = input, a[l+1] = activation of layer l
  };

  Mlp() = default;

  Mlp(int in, const std::vector<int>& hidden, int out, Activation act, Rng& rng) : act_(act) {
    sizes_.push_back(in);
    for (int h : hidden) sizes_.push_back(h);
    sizes_.push_back(out);
    layout();
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      const double fan_in = sizes_[l];
      const double scale = act == Activation::relu ? std::sqrt(2.0 / fan_in) : std::sqrt(1.0 / fan_in);
      auto w = weight(l);
      for (Eigen::Index j = 0; j < w.cols(); ++j)
        for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = scale * standard_normal(rng);
      bias(l).setZero();
    }
  }

  Mlp(std::vector<int> sizes, Activation act, Eigen::VectorXd params) : act_(act), sizes_(std::move(sizes)) {
    layout();
    if (params.size() != params_.size()) throw ArgumentError("Mlp: parameter count mismatch");
    params_ = std::move(params);
  }

  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  int num_layers() const { return static_cast<int>(sizes_.size()) - 1; }
  const std::vector<int>& sizes() const { return sizes_; }
  Activation activation() const { return act_; }
  Eigen::Index num_params() const { return params_.size(); }
  Eigen::VectorXd& params() { return params_; }
  const Eigen::VectorXd& params() const { return params_; }

  Eigen::Map<Eigen::MatrixXd> weight(std::size_t l) {
    return {params_.data() + offsets_[l], sizes_[l + 1], sizes_[l]};
  }
  Eigen::Map<const Eigen::MatrixXd> weight(std::size_t l) const {
    return {params_.data() + offsets_[l], sizes_[l + 1], sizes_[l]};
  }
  Eigen::Map<Eigen::VectorXd> bias(std::size_t l) {
    return {params_.data() + offsets_[l] + static_cast<Eigen::Index>(sizes_[l + 1]) * sizes_[l], sizes_[l + 1]};
  }
  Eigen::Map<const Eigen::VectorXd> bias(std::size_t l) const {
    return {params_.data() + offsets_[l] + static_cast<Eigen::Index>(sizes_[l + 1]) * sizes_[l], sizes_[l + 1]};
  }

  /// Columns of `x` are samples.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const {
    check_input(x);
    Eigen::MatrixXd a = x;
    for (int l = 0; l < num_layers(); ++l) {
      Eigen::MatrixXd z = weight(l) * a;
      z.colwise() += bias(l);
      a = l + 1 < num_layers() ? activate(z) : z;
    }
    return a;
  }

  Eigen::MatrixXd forward(const Eigen::MatrixXd& x, Cache& cache) const {
    check_input(x);
    cache.z.resize(num_layers());
    cache.a.resize(num_layers() + 1);
    cache.a[0] = x;
    for (int l = 0; l < num_layers(); ++l) {
      cache.z[l] = weight(l) * cache.a[l];
      cache.z[l].colwise() += bias(l);
      cache.a[l + 1] = l + 1 < num_layers() ? activate(cache.z[l]) : cache.z[l];
    }
    return cache.a.back();
  }

  /// Parameter gradient for upstream gradient `d_out` (same shape as the output). Optionally the input gradient.
  Eigen::VectorXd backward(const Cache& cache, const Eigen::MatrixXd& d_out, Eigen::MatrixXd* d_in = nullptr) const {
    Eigen::VectorXd grad(params_.size());
    Eigen::MatrixXd delta = d_out;
    for (int l = num_layers() - 1; l >= 0; --l) {
      Eigen::Map<Eigen::MatrixXd> gw(grad.data() + offsets_[l], sizes_[l + 1], sizes_[l]);
      Eigen::Map<Eigen::VectorXd> gb(grad.data() + offsets_[l] + static_cast<Eigen::Index>(sizes_[l + 1]) * sizes_[l],
                                     sizes_[l + 1]);
      gw.noalias() = delta * cache.a[l].transpose();
      gb = delta.rowwise().sum();
      if (l > 0 || d_in) {
        Eigen::MatrixXd prev = weight(l).transpose() * delta;
        if (l > 0) {
          delta = prev.cwiseProduct(activate_grad(cache.z[l - 1]));
        } else {
          *d_in = std::move(prev);
        }
      }
    }
    return grad;
  }

 private:
  void layout() {
    if (sizes_.size() < 2) throw ArgumentError("Mlp: need input and output sizes");
    offsets_.clear();
    Eigen::Index total = 0;
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      offsets_.push_back(total);
      total += static_cast<Eigen::Index>(sizes_[l + 1]) * sizes_[l] + sizes_[l + 1];
    }
    params_ = Eigen::VectorXd::Zero(total);
  }

  void check_input(const Eigen::MatrixXd& x) const {
    if (x.rows() != input_dim())
      throw ArgumentError("Mlp: input has " + std::to_string(x.rows()) + " rows, expected " + std::to_string(input_dim()));
  }

  Eigen::MatrixXd activate(const Eigen::MatrixXd& z) const {
    switch (act_) {
      case Activation::relu: return z.cwiseMax(0.0);
      case Activation::tanh: return z.array().tanh().matrix();
      default: return z;
    }
  }

  Eigen::MatrixXd activate_grad(const Eigen::MatrixXd& z) const {
    switch (act_) {
      case Activation::relu: return (z.array() > 0.0).cast<double>().matrix();
      case Activation::tanh: return (1.0 - z.array().tanh().square()).matrix();
      default: return Eigen::MatrixXd::Ones(z.rows(), z.cols());
    }
  }

  Activation act_ = Activation::relu;
  std::vector<int> sizes_;
  std::vector<Eigen::Index> offsets_;
  Eigen::VectorXd params_;
};

/// Minibatch gradient descent with classical momentum.
struct MomentumSgd {
  double learning_rate = 1e-3;
  double momentum = 0.9;
  double grad_clip = 0.0;
  Eigen::VectorXd velocity;

  void step(Eigen::VectorXd& params, Eigen::VectorXd grad) {
    if (velocity.size() != params.size()) velocity = Eigen::VectorXd::Zero(params.size());
    if (grad_clip > 0.0) {
      const double n = grad.norm();
      if (n > grad_clip) grad *= grad_clip / n;
    }
    velocity = momentum * velocity - learning_rate * grad;
    params += velocity;
  }
};

inline void require_finite_loss(double loss, const std::string& where, int epoch, int batch) {
  if (!std::isfinite(loss))
    throw NumericalError(where + ": non-finite training loss at epoch " + std::to_string(epoch) + ", batch " +
                         std::to_string(batch));
}

/// Shuffled minibatch index lists for one epoch.
inline std::vector<std::vector<int>> minibatches(int n, int batch_size, Rng& rng) {
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (int i = n - 1; i > 0; --i) std::swap(order[i], order[uniform_int(0, i, rng)]);
  std::vector<std::vector<int>> out;
  for (int start = 0; start < n; start += batch_size)
    out.emplace_back(order.begin() + start, order.begin() + std::min(n, start + batch_size));
  return out;
}

/// Columns of `rows` (rows are samples) selected by `idx`, transposed so samples become columns.
inline Eigen::MatrixXd gather_cols(const Eigen::MatrixXd& rows, const std::vector<int>& idx) {
  Eigen::MatrixXd out(rows.cols(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = rows.row(idx[j]).transpose();
  return out;
}

/// Paired supervised data; rows are samples.
struct SupervisedData {
  Eigen::MatrixXd inputs;
  Eigen::MatrixXd targets;

  int size() const { return static_cast<int>(inputs.rows()); }
  void check() const {
    if (inputs.rows() == 0) throw ArgumentError("empty dataset");
    if (inputs.rows() != targets.rows()) throw ArgumentError("dataset: input and target counts differ");
  }
};

/// MSE regressor: prediction = net(normalize(x)).
struct Regressor {
  Normalizer input_norm;
  Mlp net;
  double train_loss = 0.0;

  Eigen::MatrixXd predict_cols(const Eigen::MatrixXd& x_cols) const { return net.forward(input_norm.apply(x_cols)); }
  Eigen::VectorXd predict(const Eigen::VectorXd& x) const { return predict_cols(x).col(0); }

  /// Mean squared error (averaged over samples and output dims) and its parameter gradient.
  double loss_and_grad(const Eigen::MatrixXd& x_cols, const Eigen::MatrixXd& y_cols, Eigen::VectorXd* grad) const {
    Mlp::Cache cache;
    const Eigen::MatrixXd diff = net.forward(input_norm.apply(x_cols), cache) - y_cols;
    const double denom = static_cast<double>(diff.size());
    if (grad) *grad = net.backward(cache, (2.0 / denom) * diff);
    return diff.squaredNorm() / denom;
  }
};

/// Trains from scratch. Optional per-batch transform hook adds noise etc. to (x, y) columns.
template <class Augment>
Regressor train_regressor(const SupervisedData& data, const ApproximatorConfig& cfg, Augment&& augment) {
  cfg.validate();
  data.check();
  Rng rng = make_stream(cfg.seed, 1);
  Regressor model;
  model.input_norm = cfg.normalize_inputs ? Normalizer::fit(data.inputs) : Normalizer::identity(static_cast<int>(data.inputs.cols()));
  model.net = Mlp(static_cast<int>(data.inputs.cols()), cfg.layer_sizes, static_cast<int>(data.targets.cols()), cfg.activation, rng);
  MomentumSgd opt{cfg.learning_rate, cfg.momentum, cfg.grad_clip, {}};
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    int b = 0;
    for (const auto& idx : minibatches(data.size(), cfg.batch_size, rng)) {
      Eigen::MatrixXd x = gather_cols(data.inputs, idx), y = gather_cols(data.targets, idx);
      augment(x, y, rng);
      Eigen::VectorXd grad;
      const double loss = model.loss_and_grad(x, y, &grad);
      require_finite_loss(loss, "train_regressor", epoch, b++);
      opt.step(model.net.params(), std::move(grad));
    }
  }
  model.train_loss = model.loss_and_grad(data.inputs.transpose(), data.targets.transpose(), nullptr);
  require_finite_loss(model.train_loss, "train_regressor", cfg.epochs, -1);
  return model;
}

inline Regressor train_regressor(const SupervisedData& data, const ApproximatorConfig& cfg) {
  return train_regressor(data, cfg, [](Eigen::MatrixXd&, Eigen::MatrixXd&, Rng&) {});
}

}  // namespace rlsp
