#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "rlsp/nn.hpp"

namespace rlsp {

/// Variational autoencoder over state vectors. The posterior mean is the feature vector.
struct EncoderDecoder {
  Normalizer input_norm;
  Mlp encoder;  // -> [mean; log variance]
  Mlp decoder;
  int latent_dim = 8;
  double kl_weight = 0.001;
  double train_loss = 0.0;        // full objective on the training set at the end
  double train_recon_loss = 0.0;  // reconstruction term of the same evaluation

  int state_dim() const { return input_norm.dim(); }

  /// Objective recon + kl_weight * KL over columns with given reparameterization noise.
  /// Reconstruction is the squared error in normalized units averaged over samples and dims.
  double objective(const Eigen::MatrixXd& x_cols, const Eigen::MatrixXd& eps, Eigen::VectorXd* grad_enc,
                   Eigen::VectorXd* grad_dec, double* recon_out = nullptr) const {
    const Eigen::Index N = x_cols.cols();
    const int L = latent_dim;
    const Eigen::MatrixXd xn = input_norm.apply(x_cols);
    Mlp::Cache ce, cd;
    const Eigen::MatrixXd h = encoder.forward(xn, ce);
    const Eigen::MatrixXd mu = h.topRows(L);
    const Eigen::MatrixXd lv = h.bottomRows(L);
    const Eigen::MatrixXd sd = (0.5 * lv.array()).exp().matrix();
    const Eigen::MatrixXd z = mu + sd.cwiseProduct(eps);
    const Eigen::MatrixXd xr = decoder.forward(z, cd);
    const Eigen::MatrixXd diff = xr - xn;
    const double denom = static_cast<double>(diff.size());
    const double recon = diff.squaredNorm() / denom;
    const double kl = 0.5 * (mu.array().square() + lv.array().exp() - lv.array() - 1.0).sum() / static_cast<double>(N);
    if (recon_out) *recon_out = recon;
    if (grad_enc || grad_dec) {
      Eigen::MatrixXd dz;
      const Eigen::VectorXd gd = decoder.backward(cd, (2.0 / denom) * diff, &dz);
      if (grad_dec) *grad_dec = gd;
      if (grad_enc) {
        Eigen::MatrixXd dh(2 * L, N);
        dh.topRows(L) = dz + (kl_weight / static_cast<double>(N)) * mu;
        dh.bottomRows(L) = dz.cwiseProduct(eps).cwiseProduct(sd) * 0.5 +
                           (kl_weight * 0.5 / static_cast<double>(N)) * (lv.array().exp() - 1.0).matrix();
        *grad_enc = encoder.backward(ce, dh);
      }
    }
    return recon + kl_weight * kl;
  }

  /// Posterior mean; deterministic.
  Eigen::VectorXd encode(const Eigen::VectorXd& x) const { return encoder.forward(input_norm.apply(x)).col(0).head(latent_dim); }

  Eigen::MatrixXd encode_cols(const Eigen::MatrixXd& x_cols) const {
    return encoder.forward(input_norm.apply(x_cols)).topRows(latent_dim);
  }

  Eigen::VectorXd decode(const Eigen::VectorXd& z) const { return input_norm.invert(decoder.forward(z)).col(0); }

  /// Mean squared reconstruction error through the posterior mean, normalized units.
  double reconstruction_error(const Eigen::MatrixXd& rows) const {
    const Eigen::MatrixXd xn = input_norm.apply(rows.transpose());
    const Eigen::MatrixXd xr = decoder.forward(encoder.forward(xn).topRows(latent_dim));
    return (xr - xn).squaredNorm() / static_cast<double>(xr.size());
  }
};

/// Trains a VAE on rows of `states`.
inline EncoderDecoder train_encoder(const Eigen::MatrixXd& states, const ApproximatorConfig& cfg, int latent_dim,
                                    double kl_weight) {
  cfg.validate();
  if (states.rows() == 0) throw ArgumentError("train_encoder: empty dataset");
  if (latent_dim < 1) throw ArgumentError("train_encoder: latent_dim must be >= 1");
  if (kl_weight < 0.0) throw ArgumentError("train_encoder: kl_weight must be >= 0");
  Rng rng = make_stream(cfg.seed, 3);
  EncoderDecoder m;
  m.latent_dim = latent_dim;
  m.kl_weight = kl_weight;
  const int d = static_cast<int>(states.cols());
  m.input_norm = cfg.normalize_inputs ? Normalizer::fit(states) : Normalizer::identity(d);
  m.encoder = Mlp(d, cfg.layer_sizes, 2 * latent_dim, cfg.activation, rng);
  std::vector<int> rev(cfg.layer_sizes.rbegin(), cfg.layer_sizes.rend());
  m.decoder = Mlp(latent_dim, rev, d, cfg.activation, rng);
  MomentumSgd opt_e{cfg.learning_rate, cfg.momentum, cfg.grad_clip, {}};
  MomentumSgd opt_d{cfg.learning_rate, cfg.momentum, cfg.grad_clip, {}};
  const int n = static_cast<int>(states.rows());
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    int b = 0;
    for (const auto& idx : minibatches(n, cfg.batch_size, rng)) {
      const Eigen::MatrixXd x = gather_cols(states, idx);
      Eigen::MatrixXd eps(latent_dim, x.cols());
      for (Eigen::Index j = 0; j < eps.size(); ++j) eps.data()[j] = standard_normal(rng);
      Eigen::VectorXd ge, gd;
      const double loss = m.objective(x, eps, &ge, &gd);
      require_finite_loss(loss, "train_encoder", epoch, b++);
      opt_e.step(m.encoder.params(), std::move(ge));
      opt_d.step(m.decoder.params(), std::move(gd));
    }
  }
  Eigen::MatrixXd eps(latent_dim, n);
  for (Eigen::Index j = 0; j < eps.size(); ++j) eps.data()[j] = standard_normal(rng);
  m.train_loss = m.objective(states.transpose(), eps, nullptr, nullptr, &m.train_recon_loss);
  require_finite_loss(m.train_loss, "train_encoder", cfg.epochs, -1);
  return m;
}

}  // namespace rlsp
