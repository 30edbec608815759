#pragma once

#include <cmath>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rlsp/error.hpp"
#include "rlsp/gridworld.hpp"
#include "rlsp/soft_planning.hpp"
#include "rlsp/tabular_mdp.hpp"

namespace rlsp {

struct RlspConfig {
  int horizon_T = 1;
  double learning_rate = 0.1;
  int iterations = 200;
  bool l2_project = true;

  void validate() const {
    if (horizon_T < 1) throw ConfigError("RlspConfig: horizon_T must be >= 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("RlspConfig: learning_rate must be finite and > 0");
    if (iterations < 0) throw ConfigError("RlspConfig: negative iteration count");
  }
};

namespace detail {

/// Forward marginals alpha[t] (from the initial distribution) and the reach
/// probabilities beta[t](s) = P(s_T = s0 | s_t = s) under a policy schedule.
struct ForwardBackward {
  std::vector<Eigen::VectorXd> alpha;
  std::vector<Eigen::VectorXd> beta;
  double likelihood = 0.0;
};

inline ForwardBackward forward_backward(const TabularMdp& mdp, const PolicySchedule& pi, int s0, int T) {
  const int S = mdp.num_states(), A = mdp.num_actions();
  ForwardBackward fb;
  fb.alpha.assign(T + 1, Eigen::VectorXd::Zero(S));
  fb.beta.assign(T + 1, Eigen::VectorXd::Zero(S));
  fb.alpha[0] = mdp.initial_dist();
  for (int t = 0; t < T; ++t) {
    for (int s = 0; s < S; ++s) {
      const double w = fb.alpha[t](s);
      if (w == 0.0) continue;
      for (int a = 0; a < A; ++a)
        for (const auto& o : mdp.row(s, a)) fb.alpha[t + 1](o.next) += w * pi.probs[t](s, a) * o.prob;
    }
  }
  fb.beta[T](s0) = 1.0;
  for (int t = T - 1; t >= 0; --t)
    for (int s = 0; s < S; ++s) {
      double acc = 0.0;
      for (int a = 0; a < A; ++a) acc += pi.probs[t](s, a) * detail::expected_next(mdp, s, a, fb.beta[t + 1]);
      fb.beta[t](s) = acc;
    }
  fb.likelihood = fb.alpha[T](s0);
  return fb;
}

inline void check_inference_args(const TabularMdp& mdp, const FeatureMap& features, int s0, int T) {
  mdp.check_state(s0);
  if (features.num_states() != mdp.num_states()) throw ArgumentError("feature table size mismatch");
  if (T < 1 || T > mdp.horizon()) throw ArgumentError("inference horizon must be in [1, mdp.horizon]");
}

}  // namespace detail

/// Exact ln p(s0 | theta) after T steps from the initial distribution.
inline double state_log_likelihood(const TabularMdp& mdp, const FeatureMap& features, const RewardParams& theta,
                                   int s0, int T) {
  detail::check_inference_args(mdp, features, s0, T);
  const auto pi = boltzmann_policy(soft_value_iteration(mdp, features, theta, T));
  return std::log(detail::forward_backward(mdp, pi, s0, T).likelihood);
}

/// Exact expected trajectory gradient over all length-T trajectories that end in s0.
inline Eigen::VectorXd exact_state_gradient(const TabularMdp& mdp, const FeatureMap& features, const RewardParams& theta,
                                            int s0, int T, bool include_correction = true) {
  detail::check_inference_args(mdp, features, s0, T);
  const int S = mdp.num_states(), A = mdp.num_actions();
  const auto pi = boltzmann_policy(soft_value_iteration(mdp, features, theta, T));
  const auto fe = feature_expectations(mdp, features, pi);
  const auto fb = detail::forward_backward(mdp, pi, s0, T);
  if (!(fb.likelihood > 0.0)) throw NumericalError("observed state has zero likelihood");
  const double inv_p = 1.0 / fb.likelihood;
  const Eigen::MatrixXd& phi = features.table();

  Eigen::VectorXd g = Eigen::VectorXd::Zero(features.dim());
  for (int t = 0; t <= T; ++t) {
    const Eigen::VectorXd post = fb.alpha[t].cwiseProduct(fb.beta[t]) * inv_p;
    g += phi.transpose() * post;
    if (t == 0) g -= fe.f[0].transpose() * post;
    if (include_correction && t > 0) g -= fe.f[t].transpose() * post;
  }
  if (include_correction) {
    for (int t = 0; t < T; ++t)
      for (int s = 0; s < S; ++s) {
        const double w = fb.alpha[t](s);
        if (w == 0.0) continue;
        for (int a = 0; a < A; ++a) {
          const double reach = detail::expected_next(mdp, s, a, fb.beta[t + 1]);
          const double pa = w * pi.probs[t](s, a) * reach * inv_p;
          if (pa == 0.0) continue;
          g += pa * expected_successor_features(mdp, fe.f[t + 1], s, a);
        }
      }
  }
  return g;
}

/// Testing oracle: enumerates every trajectory of length T ending in s0.
inline Eigen::VectorXd brute_force_state_gradient(const TabularMdp& mdp, const FeatureMap& features,
                                                  const RewardParams& theta, int s0, int T,
                                                  bool include_correction = true) {
  detail::check_inference_args(mdp, features, s0, T);
  const double size = std::pow(static_cast<double>(mdp.num_states()) * mdp.num_actions(), T);
  if (size > 1e6) {
    std::ostringstream msg;
    msg << "brute_force_state_gradient: search space of about " << size << " trajectories exceeds 1e6";
    throw ArgumentError(msg.str());
  }
  const auto pi = boltzmann_policy(soft_value_iteration(mdp, features, theta, T));
  const auto fe = feature_expectations(mdp, features, pi);

  Eigen::VectorXd acc = Eigen::VectorXd::Zero(features.dim());
  double total = 0.0;
  Trajectory tau;
  std::function<void(int, int, double)> visit = [&](int t, int s, double p) {
    if (t == T) {
      if (s != s0) return;
      acc += p * trajectory_gradient(mdp, features, fe, tau, include_correction);
      total += p;
      return;
    }
    for (int a = 0; a < mdp.num_actions(); ++a) {
      const double pa = pi.probs[t](s, a);
      if (pa == 0.0) continue;
      for (const auto& o : mdp.row(s, a)) {
        tau.actions.push_back(a);
        tau.states.push_back(o.next);
        visit(t + 1, o.next, p * pa * o.prob);
        tau.actions.pop_back();
        tau.states.pop_back();
      }
    }
  };
  for (int s = 0; s < mdp.num_states(); ++s) {
    const double p0 = mdp.initial_dist()(s);
    if (p0 == 0.0) continue;
    tau.states = {s};
    tau.actions.clear();
    visit(0, s, p0);
  }
  if (!(total > 0.0)) throw NumericalError("observed state has zero likelihood");
  return acc / total;
}

/// Gradient ascent on ln p(s0 | theta) from theta = 0.
inline RewardParams infer_reward(const TabularMdp& mdp, const FeatureMap& features, int s0, const RlspConfig& cfg) {
  cfg.validate();
  RewardParams theta = RewardParams::zeros(features.dim());
  for (int it = 0; it < cfg.iterations; ++it) {
    theta.weights += cfg.learning_rate * exact_state_gradient(mdp, features, theta, s0, cfg.horizon_T, true);
    const double norm = theta.weights.norm();
    if (!std::isfinite(norm) || norm > 1e6)
      throw NumericalError("infer_reward: theta diverged at iteration " + std::to_string(it));
    // rounding noise from an identically zero gradient must not be blown up to unit length
    if (cfg.l2_project && norm > 1e-9) theta.weights /= norm;
  }
  return theta;
}

// ---------------------------------------------------------------------------
// Lambda sweep
// ---------------------------------------------------------------------------

struct LambdaReport {
  std::vector<double> lambdas;
  std::vector<double> returns_true;
  std::vector<std::string> behavior_labels;

  std::size_t size() const { return lambdas.size(); }

  /// Label at the first lambda whose behavior differs from lambda = 0; the lambda = 0 label if none does.
  std::string summary_label() const {
    if (behavior_labels.empty()) return {};
    for (const auto& l : behavior_labels)
      if (l != behavior_labels.front()) return l;
    return behavior_labels.front();
  }

  void write_csv(std::ostream& out) const {
    out << "lambda,return_true,behavior_label\n";
    out << std::setprecision(17);
    for (std::size_t i = 0; i < size(); ++i)
      out << lambdas[i] << ',' << returns_true[i] << ',' << behavior_labels[i] << '\n';
  }
};

inline std::vector<double> default_lambdas() {
  std::vector<double> out;
  for (int i = 0; i <= 20; ++i) out.push_back(0.1 * i);
  return out;
}

/// Deterministic rollout of the optimal policy for a state reward, from the observed state.
inline std::vector<int> optimal_rollout(const GridworldCase& c, const Eigen::VectorXd& state_rewards) {
  const auto policy = optimal_policy(c.mdp, state_rewards, c.eval_horizon);
  std::vector<int> states{c.observed_state};
  int s = c.observed_state;
  for (int t = 0; t < c.eval_horizon; ++t) {
    const auto row = policy.probs[t].row(s);
    Eigen::Index a = 0;
    row.maxCoeff(&a);
    s = c.mdp.row(s, static_cast<int>(a)).front().next;
    states.push_back(s);
  }
  return states;
}

/// Return under R_true over s_1..s_H of a rollout.
inline double true_return(const GridworldCase& c, const std::vector<int>& states) {
  const Eigen::VectorXd r = c.true_reward.state_rewards(c.features);
  double total = 0.0;
  for (std::size_t t = 1; t < states.size(); ++t) total += r(states[t]);
  return total;
}

inline LambdaReport lambda_sweep(const GridworldCase& c, const RewardParams& inferred,
                                 const std::vector<double>& lambdas = default_lambdas()) {
  if (inferred.dim() != c.features.dim()) throw ArgumentError("lambda_sweep: reward dimension mismatch");
  for (std::size_t i = 1; i < lambdas.size(); ++i)
    if (!(lambdas[i] > lambdas[i - 1])) throw ArgumentError("lambda_sweep: lambdas must be ascending");
  LambdaReport report;
  for (double lambda : lambdas) {
    const Eigen::VectorXd w = c.spec_reward.weights + lambda * inferred.weights;
    const auto states = optimal_rollout(c, c.features.table() * w);
    report.lambdas.push_back(lambda);
    report.returns_true.push_back(true_return(c, states));
    report.behavior_labels.push_back(c.label_behavior(states));
  }
  return report;
}

/// Case-level verdict: far_vase is judged on the inferred weights, the others on the sweep.
inline std::string case_label(const GridworldCase& c, const RewardParams& inferred, const LambdaReport& report) {
  if (c.name == CaseName::far_vase) {
    const double norm = inferred.weights.norm();
    const double vase = norm > 0.0 ? inferred.weights(0) / norm : 0.0;
    if (std::abs(vase) < 0.1) return "neutral-on-vase";
    return vase < 0.0 ? "vase-averse" : "vase-seeking";
  }
  return report.summary_label();
}

}  // namespace rlsp
