#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include <Eigen/Dense>

#include "rlsp/mdn.hpp"
#include "rlsp/nn.hpp"
#include "rlsp/vae.hpp"

namespace rlsp {

/// Central finite differences (step 1e-5) against the analytic gradient on a random subset of
/// parameters. Returns the maximum relative error |a - n| / max(|a|, |n|, 1e-6).
inline double check_gradients(const std::function<double(const Eigen::VectorXd&, Eigen::VectorXd*)>& loss,
                              Eigen::VectorXd params, Rng& rng, int subset = 32, double step = 1e-5) {
  Eigen::VectorXd analytic;
  loss(params, &analytic);
  const int P = static_cast<int>(params.size());
  std::vector<int> idx(P);
  for (int i = 0; i < P; ++i) idx[i] = i;
  for (int i = P - 1; i > 0; --i) std::swap(idx[i], idx[uniform_int(0, i, rng)]);
  idx.resize(std::min(P, subset));
  double worst = 0.0;
  for (int i : idx) {
    const double orig = params(i);
    params(i) = orig + step;
    const double up = loss(params, nullptr);
    params(i) = orig - step;
    const double down = loss(params, nullptr);
    params(i) = orig;
    const double numeric = (up - down) / (2.0 * step);
    const double denom = std::max({std::abs(analytic(i)), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(analytic(i) - numeric) / denom);
  }
  return worst;
}

/// Regressor MSE at (x, y) columns.
inline double check_gradients(const Regressor& model, const Eigen::MatrixXd& x_cols, const Eigen::MatrixXd& y_cols, Rng& rng) {
  Regressor probe = model;
  return check_gradients(
      [&](const Eigen::VectorXd& p, Eigen::VectorXd* g) {
        probe.net.params() = p;
        return probe.loss_and_grad(x_cols, y_cols, g);
      },
      model.net.params(), rng);
}

/// Mixture negative log-likelihood at (x, y) columns.
inline double check_gradients(const MixtureDensityModel& model, const Eigen::MatrixXd& x_cols, const Eigen::MatrixXd& y_cols,
                              Rng& rng) {
  MixtureDensityModel probe = model;
  return check_gradients(
      [&](const Eigen::VectorXd& p, Eigen::VectorXd* g) {
        probe.net.params() = p;
        return probe.nll_and_grad(x_cols, y_cols, g);
      },
      model.net.params(), rng);
}

/// Autoencoder objective at x columns with fixed reparameterization noise.
inline double check_gradients(const EncoderDecoder& model, const Eigen::MatrixXd& x_cols, const Eigen::MatrixXd& eps,
                              Rng& rng) {
  EncoderDecoder probe = model;
  const Eigen::Index ne = model.encoder.num_params();
  Eigen::VectorXd all(ne + model.decoder.num_params());
  all << model.encoder.params(), model.decoder.params();
  return check_gradients(
      [&](const Eigen::VectorXd& p, Eigen::VectorXd* g) {
        probe.encoder.params() = p.head(ne);
        probe.decoder.params() = p.tail(p.size() - ne);
        if (!g) return probe.objective(x_cols, eps, nullptr, nullptr);
        Eigen::VectorXd ge, gd;
        const double v = probe.objective(x_cols, eps, &ge, &gd);
        g->resize(p.size());
        *g << ge, gd;
        return v;
      },
      all, rng);
}

}  // namespace rlsp
