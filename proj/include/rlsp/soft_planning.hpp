#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "rlsp/error.hpp"
#include "rlsp/random.hpp"
#include "rlsp/tabular_mdp.hpp"

namespace rlsp {

/// Soft Q values q[t] (S x A) for t < horizon and soft values v[t] (S) for t <= horizon.
struct QSchedule {
  std::vector<Eigen::MatrixXd> q;
  std::vector<Eigen::VectorXd> v;

  int horizon() const { return static_cast<int>(q.size()); }
};

/// Boltzmann action probabilities probs[t] (S x A) for t < horizon.
struct PolicySchedule {
  std::vector<Eigen::MatrixXd> probs;

  int horizon() const { return static_cast<int>(probs.size()); }

  /// Time index clamped to the last step, so a schedule can drive longer rollouts.
  auto at(int t, int s) const { return probs[std::min<std::size_t>(t, probs.size() - 1)].row(s); }
};

enum class Direction { forward, backward };

struct Trajectory {
  std::vector<int> states;
  std::vector<int> actions;
  Direction direction = Direction::forward;

  int length() const { return static_cast<int>(actions.size()); }
};

/// Expected remaining feature counts f[t] (S x n) for t <= horizon; f[horizon] = phi.
struct FeatureExpectations {
  std::vector<Eigen::MatrixXd> f;

  int horizon() const { return static_cast<int>(f.size()) - 1; }
};

namespace detail {

inline double logsumexp(const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  const double m = x.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((x.array() - m).exp().sum());
}

inline double expected_next(const TabularMdp& mdp, int s, int a, const Eigen::VectorXd& v) {
  double acc = 0.0;
  for (const auto& o : mdp.row(s, a)) acc += o.prob * v(o.next);
  return acc;
}

}  // namespace detail

/// Soft (log-sum-exp) backups with the reward on the current state and temperature 1:
///   Q_t(s,a) = r(s) + E[V_{t+1}(s')],  V_t(s) = log sum_a exp Q_t(s,a),  V_H(s) = r(s).
inline QSchedule soft_value_iteration(const TabularMdp& mdp, const FeatureMap& features,
                                      const RewardParams& theta, int horizon) {
  theta.require_finite();
  if (features.num_states() != mdp.num_states()) throw ArgumentError("soft_value_iteration: feature table size mismatch");
  if (horizon < 0) throw ArgumentError("soft_value_iteration: negative horizon");
  const Eigen::VectorXd r = theta.state_rewards(features);
  const int S = mdp.num_states(), A = mdp.num_actions();

  QSchedule out;
  out.q.assign(horizon, Eigen::MatrixXd(S, A));
  out.v.assign(horizon + 1, Eigen::VectorXd(S));
  out.v[horizon] = r;
  for (int t = horizon - 1; t >= 0; --t) {
    auto& q = out.q[t];
    const auto& vn = out.v[t + 1];
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) q(s, a) = r(s) + detail::expected_next(mdp, s, a, vn);
    for (int s = 0; s < S; ++s) out.v[t](s) = detail::logsumexp(q.row(s));
  }
  return out;
}

inline QSchedule soft_value_iteration(const TabularMdp& mdp, const FeatureMap& features, const RewardParams& theta) {
  return soft_value_iteration(mdp, features, theta, mdp.horizon());
}

/// Row-wise softmax of each q[t].
inline PolicySchedule boltzmann_policy(const QSchedule& q) {
  PolicySchedule out;
  out.probs.reserve(q.q.size());
  for (const auto& qt : q.q) {
    Eigen::MatrixXd p(qt.rows(), qt.cols());
    for (Eigen::Index s = 0; s < qt.rows(); ++s) {
      const double m = qt.row(s).maxCoeff();
      p.row(s) = (qt.row(s).array() - m).exp();
      p.row(s) /= p.row(s).sum();
    }
    out.probs.push_back(std::move(p));
  }
  return out;
}

/// Hard finite-horizon value iteration; returns a deterministic schedule (one-hot rows).
/// Ties go to the lowest action index.
inline PolicySchedule optimal_policy(const TabularMdp& mdp, const Eigen::VectorXd& state_rewards, int horizon) {
  const int S = mdp.num_states(), A = mdp.num_actions();
  if (state_rewards.size() != S) throw ArgumentError("optimal_policy: reward vector size mismatch");
  PolicySchedule out;
  out.probs.assign(horizon, Eigen::MatrixXd::Zero(S, A));
  Eigen::VectorXd v = state_rewards;
  Eigen::VectorXd next(S);
  for (int t = horizon - 1; t >= 0; --t) {
    for (int s = 0; s < S; ++s) {
      int best = 0;
      double best_q = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < A; ++a) {
        const double q = state_rewards(s) + detail::expected_next(mdp, s, a, v);
        if (q > best_q + 1e-12) {
          best_q = q;
          best = a;
        }
      }
      out.probs[t](s, best) = 1.0;
      next(s) = best_q;
    }
    v = next;
  }
  return out;
}

/// Samples `steps` transitions from `start` following the schedule (time index clamped).
inline Trajectory rollout(const TabularMdp& mdp, const PolicySchedule& policy, int start, int steps, Rng& rng) {
  mdp.check_state(start);
  if (steps < 0) throw ArgumentError("rollout: negative step count");
  if (steps > 0 && policy.horizon() == 0) throw ArgumentError("rollout: empty policy schedule");
  Trajectory tau;
  tau.states.reserve(steps + 1);
  tau.actions.reserve(steps);
  tau.states.push_back(start);
  int s = start;
  for (int t = 0; t < steps; ++t) {
    const int a = sample_categorical(policy.at(t, s), rng);
    const auto row = mdp.row(s, a);
    int next = row.front().next;
    if (row.size() > 1) {
      double u = uniform01(rng);
      for (const auto& o : row) {
        next = o.next;
        if (u < o.prob) break;
        u -= o.prob;
      }
    }
    tau.actions.push_back(a);
    tau.states.push_back(next);
    s = next;
  }
  return tau;
}

/// Exact expected feature counts: f[t](s) = phi(s) + sum_a pi_t(a|s) sum_s' T(s'|s,a) f[t+1](s').
inline FeatureExpectations feature_expectations(const TabularMdp& mdp, const FeatureMap& features,
                                                const PolicySchedule& policy) {
  const int S = mdp.num_states(), A = mdp.num_actions(), H = policy.horizon();
  if (features.num_states() != S) throw ArgumentError("feature_expectations: feature table size mismatch");
  FeatureExpectations out;
  out.f.assign(H + 1, Eigen::MatrixXd());
  out.f[H] = features.table();
  for (int t = H - 1; t >= 0; --t) {
    Eigen::MatrixXd ft = features.table();
    const auto& fn = out.f[t + 1];
    const auto& pt = policy.probs[t];
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        const double pa = pt(s, a);
        if (pa == 0.0) continue;
        for (const auto& o : mdp.row(s, a)) ft.row(s) += (pa * o.prob) * fn.row(o.next);
      }
    }
    out.f[t] = std::move(ft);
  }
  return out;
}

/// Expected feature vector of the successor of (s, a) under f[t].
inline Eigen::VectorXd expected_successor_features(const TabularMdp& mdp, const Eigen::MatrixXd& ft, int s, int a) {
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(ft.cols());
  for (const auto& o : mdp.row(s, a)) acc += o.prob * ft.row(o.next).transpose();
  return acc;
}

/// Gradient of ln p(tau | theta) given precomputed feature expectations for horizon tau.length().
inline Eigen::VectorXd trajectory_gradient(const TabularMdp& mdp, const FeatureMap& features,
                                           const FeatureExpectations& fe, const Trajectory& tau,
                                           bool include_correction) {
  const int L = tau.length();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(features.dim());
  for (int s : tau.states) g += features(s);
  g -= fe.f[0].row(tau.states.front()).transpose();
  if (include_correction) {
    for (int t = 0; t < L; ++t) {
      g += expected_successor_features(mdp, fe.f[t + 1], tau.states[t], tau.actions[t]);
      g -= fe.f[t + 1].row(tau.states[t + 1]).transpose();
    }
  }
  return g;
}

/// Maximum-causal-entropy IRL gradient of ln p(tau | theta); the trajectory spans the full planning horizon.
inline Eigen::VectorXd mceirl_trajectory_gradient(const TabularMdp& mdp, const FeatureMap& features,
                                                  const RewardParams& theta, const Trajectory& tau,
                                                  bool include_correction) {
  if (tau.states.size() != tau.actions.size() + 1) throw ArgumentError("mceirl_trajectory_gradient: malformed trajectory");
  const int L = tau.length();
  if (L > mdp.horizon()) throw ArgumentError("mceirl_trajectory_gradient: trajectory longer than horizon");
  for (int s : tau.states) mdp.check_state(s);
  for (int a : tau.actions)
    if (a < 0 || a >= mdp.num_actions()) throw ArgumentError("mceirl_trajectory_gradient: action out of range");
  const auto fe = feature_expectations(mdp, features, boltzmann_policy(soft_value_iteration(mdp, features, theta, L)));
  return trajectory_gradient(mdp, features, fe, tau, include_correction);
}

}  // namespace rlsp
