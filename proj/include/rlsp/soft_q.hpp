#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "rlsp/continuous_env.hpp"
#include "rlsp/nn.hpp"
#include "rlsp/random.hpp"

namespace rlsp {

/// Reward over raw environment states (theta . phi(s) or any black box).
using StateReward = std::function<double(const Eigen::VectorXd&)>;

struct SoftQConfig {
  int budget = 20000;         // environment steps
  int grid_points = 9;        // per action dimension
  double temperature = 1.0;
  double reward_scale = 10.0;  // multiplies the reward; entropy weight stays at the temperature
  double gamma = 0.97;
  std::vector<int> hidden{64, 64};
  double learning_rate = 3e-4;
  double momentum = 0.9;
  double grad_clip = 10.0;
  int batch_size = 64;
  int warmup = 500;
  double target_tau = 0.01;  // Polyak rate of the target network
  // Soft value measured against the uniform policy (entropy bonus <= 0). Without it the
  // grid entropy (up to log|A| per step) acts as an alive bonus in terminating envs.
  bool relative_entropy = true;
  std::uint64_t seed = 0;
};

/// Boltzmann policy over a discretized action grid: pi(a|s) proportional to exp(Q(s,a) / temperature).
class MaxEntPolicy {
 public:
  MaxEntPolicy() = default;
  MaxEntPolicy(Eigen::MatrixXd grid, double temperature) : grid_(std::move(grid)), temperature_(temperature) {}

  static Eigen::MatrixXd make_grid(int action_dim, int points) {
    if (points < 2) throw ConfigError("MaxEntPolicy: need at least 2 grid points");
    int total = 1;
    for (int d = 0; d < action_dim; ++d) total *= points;
    Eigen::MatrixXd g(action_dim, total);
    for (int j = 0; j < total; ++j) {
      int code = j;
      for (int d = action_dim - 1; d >= 0; --d) {
        g(d, j) = -1.0 + 2.0 * (code % points) / (points - 1);
        code /= points;
      }
    }
    return g;
  }

  int num_actions() const { return static_cast<int>(grid_.cols()); }
  const Eigen::MatrixXd& grid() const { return grid_; }
  double temperature() const { return temperature_; }
  bool trained() const { return q_ != nullptr; }

  void set_q(Normalizer norm, Mlp net) {
    norm_ = std::move(norm);
    q_ = std::make_shared<Mlp>(std::move(net));
  }
  const Mlp* q_net() const { return q_.get(); }
  const Normalizer& normalizer() const { return norm_; }

  Eigen::MatrixXd q_values_cols(const Eigen::MatrixXd& states_cols) const {
    if (!q_) return Eigen::MatrixXd::Zero(num_actions(), states_cols.cols());
    return q_->forward(norm_.apply(states_cols));
  }

  Eigen::VectorXd probs(const Eigen::VectorXd& s) const {
    const Eigen::VectorXd q = q_values_cols(s).col(0) / temperature_;
    Eigen::VectorXd p = (q.array() - q.maxCoeff()).exp();
    return p / p.sum();
  }

  double entropy(const Eigen::VectorXd& s) const {
    const Eigen::VectorXd p = probs(s);
    double h = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i)
      if (p(i) > 0.0) h -= p(i) * std::log(p(i));
    return h;
  }

  int sample_index(const Eigen::VectorXd& s, Rng& rng) const { return sample_categorical(probs(s), rng); }
  Eigen::VectorXd act(const Eigen::VectorXd& s, Rng& rng) const { return grid_.col(sample_index(s, rng)); }

 private:
  Eigen::MatrixXd grid_;
  double temperature_ = 1.0;
  Normalizer norm_;
  std::shared_ptr<const Mlp> q_;
};

/// Wraps a deterministic controller as a policy.
struct FunctionPolicy {
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> fn;
  Eigen::VectorXd act(const Eigen::VectorXd& s, Rng&) const { return fn(s); }
};

/// Uniform random actions in the box.
struct RandomPolicy {
  int action_dim = 1;
  Eigen::VectorXd act(const Eigen::VectorXd&, Rng& rng) const {
    Eigen::VectorXd a(action_dim);
    for (int i = 0; i < action_dim; ++i) a(i) = 2.0 * uniform01(rng) - 1.0;
    return a;
  }
};

namespace detail {

inline Eigen::VectorXd soft_values(const Eigen::MatrixXd& q, double temperature, bool relative_entropy) {
  Eigen::VectorXd v(q.cols());
  const double offset = relative_entropy ? temperature * std::log(static_cast<double>(q.rows())) : 0.0;
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    const double m = q.col(j).maxCoeff();
    v(j) = m + temperature * std::log(((q.col(j).array() - m) / temperature).exp().sum()) - offset;
  }
  return v;
}

}  // namespace detail

/// Soft Q-learning with a target network over the discretized action grid.
/// Transition reward is reward(s') scaled by reward_scale; env termination ends bootstrapping,
/// the step limit does not.
/// A trained `warm_start` policy seeds the Q network instead of a fresh initialization.
inline MaxEntPolicy optimize_policy(const ContinuousEnv& env, const StateReward& reward, const SoftQConfig& cfg,
                                    Rng& rng, const MaxEntPolicy* warm_start = nullptr) {
  MaxEntPolicy policy(MaxEntPolicy::make_grid(env.action_dim(), cfg.grid_points), cfg.temperature);
  if (cfg.budget <= 0) return policy;
  const int A = policy.num_actions();
  const int d = env.state_dim();
  const int N = cfg.budget;

  Eigen::MatrixXd S(d, N), S2(d, N);
  Eigen::VectorXd R(N), done(N);
  std::vector<int> act(N);

  Mlp q, target;
  Normalizer norm;
  MomentumSgd opt{cfg.learning_rate, cfg.momentum, cfg.grad_clip, {}};
  const int warmup = std::min(cfg.warmup, N);

  Eigen::VectorXd s = env.reset(rng);
  int t_ep = 0;
  for (int i = 0; i < N; ++i) {
    int a;
    if (i < warmup) {
      a = uniform_int(0, A - 1, rng);
    } else {
      a = policy.sample_index(s, rng);
    }
    const StepResult r = env.step(s, policy.grid().col(a));
    S.col(i) = s;
    S2.col(i) = r.next;
    act[i] = a;
    R(i) = cfg.reward_scale * reward(r.next);
    done(i) = r.terminated ? 1.0 : 0.0;
    ++t_ep;
    if (r.terminated || t_ep >= env.max_steps()) {
      s = env.reset(rng);
      t_ep = 0;
    } else {
      s = r.next;
    }

    if (i + 1 == warmup) {
      if (warm_start && warm_start->trained() && warm_start->num_actions() == A) {
        norm = warm_start->normalizer();
        q = *warm_start->q_net();
      } else {
        norm = Normalizer::fit(S.leftCols(warmup).transpose());
        q = Mlp(d, cfg.hidden, A, Activation::relu, rng);
      }
      target = q;
      policy.set_q(norm, q);
    }
    if (i + 1 < warmup) continue;

    const int B = std::min(cfg.batch_size, i + 1);
    Eigen::MatrixXd bs(d, B), bs2(d, B);
    std::vector<int> idx(B);
    for (int b = 0; b < B; ++b) {
      idx[b] = uniform_int(0, i, rng);
      bs.col(b) = S.col(idx[b]);
      bs2.col(b) = S2.col(idx[b]);
    }
    const Eigen::VectorXd v_next = detail::soft_values(target.forward(norm.apply(bs2)), cfg.temperature, cfg.relative_entropy);
    Mlp::Cache cache;
    const Eigen::MatrixXd qv = q.forward(norm.apply(bs), cache);
    Eigen::MatrixXd dq = Eigen::MatrixXd::Zero(A, B);
    double loss = 0.0;
    for (int b = 0; b < B; ++b) {
      const double y = R(idx[b]) + cfg.gamma * (1.0 - done(idx[b])) * v_next(b);
      const double diff = qv(act[idx[b]], b) - y;
      loss += diff * diff;
      dq(act[idx[b]], b) = 2.0 * diff / B;
    }
    require_finite_loss(loss, "optimize_policy", 0, i);
    opt.step(q.params(), q.backward(cache, dq));
    target.params() = (1.0 - cfg.target_tau) * target.params() + cfg.target_tau * q.params();
    policy.set_q(norm, q);
  }
  return policy;
}

struct EvalReport {
  double mean = 0.0;
  double std_error = 0.0;
  std::vector<double> returns;
  std::vector<int> lengths;
};

inline EvalReport summarize_returns(std::vector<double> returns, std::vector<int> lengths = {}) {
  EvalReport rep;
  rep.returns = std::move(returns);
  rep.lengths = std::move(lengths);
  const double n = static_cast<double>(rep.returns.size());
  if (n == 0) return rep;
  for (double r : rep.returns) rep.mean += r / n;
  if (n > 1) {
    double var = 0.0;
    for (double r : rep.returns) var += (r - rep.mean) * (r - rep.mean);
    rep.std_error = std::sqrt(var / (n - 1) / n);
  }
  return rep;
}

/// Monte-Carlo return of `policy` on the env's true reward. Episodes stop at termination or the step limit.
template <class Policy>
EvalReport evaluate_policy(const ContinuousEnv& env, const Policy& policy, int episodes, Rng& rng) {
  if (episodes < 1) throw ArgumentError("evaluate_policy: episodes must be >= 1");
  std::vector<double> returns;
  std::vector<int> lengths;
  for (int e = 0; e < episodes; ++e) {
    Eigen::VectorXd s = env.reset(rng);
    double total = 0.0;
    int t = 0;
    for (; t < env.max_steps(); ++t) {
      const StepResult r = env.step(s, policy.act(s, rng));
      total += r.reward;
      s = r.next;
      if (r.terminated) {
        ++t;
        break;
      }
    }
    returns.push_back(total);
    lengths.push_back(t);
  }
  return summarize_returns(std::move(returns), std::move(lengths));
}

}  // namespace rlsp
