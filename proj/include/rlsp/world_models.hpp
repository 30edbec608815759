#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rlsp/continuous_env.hpp"
#include "rlsp/mdn.hpp"
#include "rlsp/nn.hpp"
#include "rlsp/random.hpp"
#include "rlsp/soft_planning.hpp"
#include "rlsp/soft_q.hpp"
#include "rlsp/tabular_mdp.hpp"

namespace rlsp {

inline void log_warning(const std::string& msg) { std::cerr << "warning: " << msg << '\n'; }

// ---------------------------------------------------------------------------
// Interaction data
// ---------------------------------------------------------------------------

struct ContinuousTransition {
  Eigen::VectorXd s;
  Eigen::VectorXd a;
  Eigen::VectorXd s_next;
};

struct InteractionDataset {
  std::string source = "random-rollouts";
  int state_dim = 0;
  int action_dim = 0;
  std::vector<ContinuousTransition> transitions;

  std::size_t size() const { return transitions.size(); }
  bool empty() const { return transitions.empty(); }

  /// Appends after checking that the simulator reproduces s' exactly.
  void add(const ContinuousEnv& env, ContinuousTransition tr) {
    if (!replays(env, tr)) throw ArgumentError("InteractionDataset: transition does not replay in the simulator");
    transitions.push_back(std::move(tr));
  }

  static bool replays(const ContinuousEnv& env, const ContinuousTransition& tr) {
    return env.step(tr.s, tr.a).next == tr.s_next;
  }

  Eigen::MatrixXd states() const {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(size()), state_dim);
    for (std::size_t i = 0; i < size(); ++i) out.row(static_cast<Eigen::Index>(i)) = transitions[i].s.transpose();
    return out;
  }

  Eigen::MatrixXd next_states() const {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(size()), state_dim);
    for (std::size_t i = 0; i < size(); ++i) out.row(static_cast<Eigen::Index>(i)) = transitions[i].s_next.transpose();
    return out;
  }

  /// Line-delimited text: a header line, then one transition per line as s | a | s'.
  void write(std::ostream& out) const {
    out << "# rlsp-dataset v1 state_dim " << state_dim << " action_dim " << action_dim << " source " << source
        << " count " << size() << '\n';
    char buf[40];
    auto put = [&](const Eigen::VectorXd& v) {
      for (Eigen::Index i = 0; i < v.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", v(i));
        out << buf << ' ';
      }
    };
    for (const auto& tr : transitions) {
      put(tr.s);
      out << "| ";
      put(tr.a);
      out << "| ";
      put(tr.s_next);
      out << '\n';
    }
  }

  static InteractionDataset read(std::istream& in) {
    InteractionDataset d;
    std::string line, tag, version, key;
    std::size_t count = 0;
    if (!std::getline(in, line)) throw ConfigError("dataset: missing header");
    std::istringstream hs(line);
    hs >> tag >> tag >> version;
    if (tag != "rlsp-dataset" || version != "v1") throw ConfigError("dataset: bad header");
    while (hs >> key) {
      if (key == "state_dim") hs >> d.state_dim;
      else if (key == "action_dim") hs >> d.action_dim;
      else if (key == "source") hs >> d.source;
      else if (key == "count") hs >> count;
    }
    auto read_vec = [](std::istringstream& ls, int n) {
      Eigen::VectorXd v(n);
      std::string tok;
      for (int i = 0; i < n; ++i) {
        if (!(ls >> tok)) throw ConfigError("dataset: short record");
        v(i) = std::strtod(tok.c_str(), nullptr);
      }
      return v;
    };
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::istringstream ls(line);
      ContinuousTransition tr;
      std::string bar;
      tr.s = read_vec(ls, d.state_dim);
      ls >> bar;
      tr.a = read_vec(ls, d.action_dim);
      ls >> bar;
      tr.s_next = read_vec(ls, d.state_dim);
      d.transitions.push_back(std::move(tr));
    }
    if (d.transitions.size() != count) throw ConfigError("dataset: record count does not match header");
    return d;
  }
};

/// Rollouts of a behavior policy. On termination the env is reset and the rollout continues,
/// so every rollout contributes rollout_len transitions.
template <class Policy>
InteractionDataset collect_dataset(const ContinuousEnv& env, const Policy& policy, int num_rollouts, int rollout_len,
                                   Rng& rng, const std::string& source = "random-rollouts") {
  InteractionDataset d;
  d.source = source;
  d.state_dim = env.state_dim();
  d.action_dim = env.action_dim();
  const std::uint64_t base = rng();
  for (int r = 0; r < num_rollouts; ++r) {
    Rng local = make_stream(base, static_cast<std::uint64_t>(r));
    Eigen::VectorXd s = env.reset(local);
    for (int t = 0; t < rollout_len; ++t) {
      const Eigen::VectorXd a = env.clip_action(policy.act(s, local));
      const StepResult res = env.step(s, a);
      d.add(env, {s, a, res.next});
      s = res.terminated ? env.reset(local) : res.next;
    }
  }
  return d;
}

/// Half of the rollouts from each policy, alternating (random first).
template <class PolicyA, class PolicyB>
InteractionDataset collect_mixed_dataset(const ContinuousEnv& env, const PolicyA& random, const PolicyB& expert,
                                         int num_rollouts, int rollout_len, Rng& rng) {
  InteractionDataset d;
  d.source = "expert-mixed";
  d.state_dim = env.state_dim();
  d.action_dim = env.action_dim();
  const std::uint64_t base = rng();
  for (int r = 0; r < num_rollouts; ++r) {
    Rng local = make_stream(base, static_cast<std::uint64_t>(r));
    Eigen::VectorXd s = env.reset(local);
    for (int t = 0; t < rollout_len; ++t) {
      const Eigen::VectorXd a = env.clip_action(r % 2 == 0 ? random.act(s, local) : expert.act(s, local));
      const StepResult res = env.step(s, a);
      d.add(env, {s, a, res.next});
      s = res.terminated ? env.reset(local) : res.next;
    }
  }
  return d;
}

// ---------------------------------------------------------------------------
// Inverse environment dynamics
// ---------------------------------------------------------------------------

struct InverseDynamicsConfig {
  ApproximatorConfig net{{128, 128, 128}, Activation::relu, 3e-3, 0.9, 128, 30, 0, true, 10.0};
  double noise_std = 0.001;
};

/// Predicts s_prev = clip(s_next + residual(s_next, a)).
struct InverseDynamics {
  Regressor model;           // input [s_next; a] (normalized inside), output normalized residual
  Normalizer target_norm;    // residual statistics
  Eigen::VectorXd clip_low;  // per-dimension range of previous states seen in training
  Eigen::VectorXd clip_high;
  double noise_std = 0.001;
  int state_dim = 0;

  bool trained() const { return state_dim > 0; }

  Eigen::MatrixXd residual_cols(const Eigen::MatrixXd& s_next_cols, const Eigen::MatrixXd& a_cols) const {
    Eigen::MatrixXd x(s_next_cols.rows() + a_cols.rows(), s_next_cols.cols());
    x << s_next_cols, a_cols;
    return target_norm.invert(model.predict_cols(x));
  }

  Eigen::MatrixXd predict_cols(const Eigen::MatrixXd& s_next_cols, const Eigen::MatrixXd& a_cols) const {
    if (!trained()) throw StateError("InverseDynamics: model not trained");
    Eigen::MatrixXd prev = s_next_cols + residual_cols(s_next_cols, a_cols);
    for (Eigen::Index j = 0; j < prev.cols(); ++j) prev.col(j) = prev.col(j).cwiseMax(clip_low).cwiseMin(clip_high);
    return prev;
  }

  Eigen::VectorXd predict(const Eigen::VectorXd& s_next, const Eigen::VectorXd& a) const { return predict_cols(s_next, a).col(0); }
};

inline InverseDynamics train_inverse_dynamics(const InteractionDataset& data, const InverseDynamicsConfig& cfg) {
  if (data.empty()) throw ArgumentError("train_inverse_dynamics: empty dataset");
  const int n = static_cast<int>(data.size()), ds = data.state_dim, da = data.action_dim;
  SupervisedData sup;
  sup.inputs.resize(n, ds + da);
  sup.targets.resize(n, ds);
  for (int i = 0; i < n; ++i) {
    const auto& tr = data.transitions[i];
    sup.inputs.row(i) << tr.s_next.transpose(), tr.a.transpose();
    sup.targets.row(i) = (tr.s - tr.s_next).transpose();
  }
  InverseDynamics inv;
  inv.state_dim = ds;
  inv.noise_std = cfg.noise_std;
  bool degenerate_in = false, degenerate_out = false;
  const Normalizer in_norm = Normalizer::fit(sup.inputs, &degenerate_in);
  inv.target_norm = Normalizer::fit(sup.targets, &degenerate_out);
  if (degenerate_in || degenerate_out) log_warning("train_inverse_dynamics: zero-variance dimension, std floored at 1e-8");
  SupervisedData norm_data;
  norm_data.inputs = in_norm.apply(sup.inputs.transpose()).transpose();
  norm_data.targets = inv.target_norm.apply(sup.targets.transpose()).transpose();
  ApproximatorConfig net_cfg = cfg.net;
  net_cfg.normalize_inputs = false;
  const double noise = cfg.noise_std;
  inv.model = train_regressor(norm_data, net_cfg, [noise](Eigen::MatrixXd& x, Eigen::MatrixXd& y, Rng& rng) {
    if (noise <= 0.0) return;
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] += noise * standard_normal(rng);
    for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] += noise * standard_normal(rng);
  });
  inv.model.input_norm = in_norm;
  const Eigen::MatrixXd prev = data.states();
  inv.clip_low = prev.colwise().minCoeff().transpose();
  inv.clip_high = prev.colwise().maxCoeff().transpose();
  return inv;
}

// ---------------------------------------------------------------------------
// Inverse policy
// ---------------------------------------------------------------------------

using StateFeaturizer = std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>;  // columns in, columns out

struct InversePolicyConfig {
  ApproximatorConfig net{{64, 64}, Activation::relu, 1e-3, 0.9, 64, 10, 0, true, 10.0};
  MixtureDensityHead head{5, 0.05};
  int num_samples = 2000;  // states drawn from the replay buffer per retraining
};

/// pi^{-1}(a | s_next) as a mixture density over actions conditioned on features of s_next.
struct InversePolicy {
  MixtureDensityModel model;
  StateFeaturizer condition;  // empty = raw state
  bool ready = false;

  Eigen::MatrixXd inputs(const Eigen::MatrixXd& s_cols) const { return condition ? condition(s_cols) : s_cols; }

  Eigen::VectorXd sample(const Eigen::VectorXd& s_next, Rng& rng) const {
    if (!ready) throw StateError("InversePolicy: model not trained");
    return model.sample(inputs(s_next).col(0), rng);
  }

  Eigen::MatrixXd sample_cols(const Eigen::MatrixXd& s_next_cols, Rng& rng) const {
    if (!ready) throw StateError("InversePolicy: model not trained");
    const Eigen::MatrixXd x = inputs(s_next_cols);
    const Eigen::MatrixXd out = model.net.forward(model.input_norm.apply(x));
    Eigen::MatrixXd a(model.target_dim, x.cols());
    const double sd = std::sqrt(model.head.fixed_variance);
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const auto mix = model.split(out.col(j));
      const int k = sample_categorical(mix.weights, rng);
      for (int i = 0; i < model.target_dim; ++i) a(i, j) = mix.means(i, k) + sd * standard_normal(rng);
      if (model.lower.size() == model.target_dim) a.col(j) = a.col(j).cwiseMax(model.lower).cwiseMin(model.upper);
    }
    return a;
  }
};

/// Labels states from the replay buffer with the forward policy and the true simulator, then fits pi^{-1}.
template <class Policy>
InversePolicy train_inverse_policy(const std::vector<Eigen::VectorXd>& replay_states, const Policy& forward_policy,
                                   const ContinuousEnv& simulator, const StateFeaturizer& condition,
                                   const InversePolicyConfig& cfg, Rng& rng) {
  if (replay_states.empty()) throw ArgumentError("train_inverse_policy: empty replay buffer");
  const int n = cfg.num_samples;
  Eigen::MatrixXd next(simulator.state_dim(), n);
  SupervisedData sup;
  sup.targets.resize(n, simulator.action_dim());
  for (int i = 0; i < n; ++i) {
    const auto& s = replay_states[uniform_int(0, static_cast<int>(replay_states.size()) - 1, rng)];
    const Eigen::VectorXd a = simulator.clip_action(forward_policy.act(s, rng));
    next.col(i) = simulator.step(s, a).next;
    sup.targets.row(i) = a.transpose();
  }
  sup.inputs = (condition ? condition(next) : next).transpose();
  ApproximatorConfig net_cfg = cfg.net;
  net_cfg.seed = rng();
  InversePolicy inv;
  inv.condition = condition;
  inv.model = train_density_model(sup, net_cfg, cfg.head);
  inv.model.lower = simulator.action_low();
  inv.model.upper = simulator.action_high();
  inv.ready = true;
  return inv;
}

struct BackwardSample {
  Eigen::VectorXd a_prev;
  Eigen::VectorXd s_prev;
};

/// a_prev ~ pi^{-1}(. | s_next); s_prev = s_next + predicted residual.
inline BackwardSample backward_step(const InverseDynamics& inv_dyn, const InversePolicy& inv_pol,
                                    const Eigen::VectorXd& s_next, Rng& rng) {
  BackwardSample out;
  out.a_prev = inv_pol.sample(s_next, rng);
  out.s_prev = inv_dyn.predict(s_next, out.a_prev);
  return out;
}

// ---------------------------------------------------------------------------
// Tabular adapters
// ---------------------------------------------------------------------------

/// Exact Bayes inverse models of a tabular MDP:
///   p(s, a | s') proportional to prior_t(s) pi_t(a|s) T(s'|s,a).
/// With time-dependent priors (forward marginals) this reproduces the posterior over
/// trajectories given the final state; with a fixed prior it is a stationary inverse model.
class TabularInverseModels {
 public:
  TabularInverseModels() = default;

  /// One stationary prior and a stationary action distribution per state (S x A).
  /// States nothing can transition into (e.g. initial configurations) are their own predecessor
  /// under action 0, so backward rollouts through them stall instead of failing.
  TabularInverseModels(const TabularMdp& mdp, const Eigen::VectorXd& prior, const Eigen::MatrixXd& policy)
      : mdp_(&mdp), time_dependent_(false) {
    tables_.push_back(build(mdp, prior, policy));
    for (int s = 0; s < mdp.num_states(); ++s)
      if (tables_[0][s].empty()) tables_[0][s].push_back({s, 0, 1.0});
  }

  /// Time-dependent priors alpha[t] and policies pi_t for t < T; step t -> t+1.
  TabularInverseModels(const TabularMdp& mdp, const std::vector<Eigen::VectorXd>& priors, const PolicySchedule& policy)
      : mdp_(&mdp), time_dependent_(true) {
    for (int t = 0; t < policy.horizon(); ++t) tables_.push_back(build(mdp, priors[t], policy.probs[t]));
  }

  bool ready() const { return mdp_ != nullptr; }

  /// Samples (a_{t-1}, s_{t-1}) given s_t = s_next; `t_next` is ignored by stationary models.
  std::pair<int, int> backward_step(int s_next, int t_next, Rng& rng) const {
    if (!ready()) throw StateError("TabularInverseModels: not built");
    const auto& tab = tables_[time_dependent_ ? t_next - 1 : 0];
    const auto& cands = tab[s_next];
    if (cands.empty()) throw NumericalError("TabularInverseModels: state has no predecessor with positive probability");
    double total = 0.0;
    for (const auto& c : cands) total += c.weight;
    double u = uniform01(rng) * total;
    for (const auto& c : cands) {
      if (u < c.weight) return {c.action, c.state};
      u -= c.weight;
    }
    return {cands.back().action, cands.back().state};
  }

  /// Exact distribution over (s_prev, a_prev) given s_next (for tests).
  std::vector<std::tuple<int, int, double>> distribution(int s_next, int t_next) const {
    const auto& cands = tables_[time_dependent_ ? t_next - 1 : 0][s_next];
    double total = 0.0;
    for (const auto& c : cands) total += c.weight;
    std::vector<std::tuple<int, int, double>> out;
    for (const auto& c : cands) out.emplace_back(c.state, c.action, c.weight / total);
    return out;
  }

 private:
  struct Candidate {
    int state;
    int action;
    double weight;
  };
  using Table = std::vector<std::vector<Candidate>>;

  static Table build(const TabularMdp& mdp, const Eigen::VectorXd& prior, const Eigen::MatrixXd& policy) {
    Table tab(mdp.num_states());
    for (int s = 0; s < mdp.num_states(); ++s) {
      if (prior(s) <= 0.0) continue;
      for (int a = 0; a < mdp.num_actions(); ++a) {
        const double w = prior(s) * policy(s, a);
        if (w <= 0.0) continue;
        for (const auto& o : mdp.row(s, a)) tab[o.next].push_back({s, a, w * o.prob});
      }
    }
    return tab;
  }

  const TabularMdp* mdp_ = nullptr;
  bool time_dependent_ = false;
  std::vector<Table> tables_;
};

/// Forward marginals alpha[t] of the MDP's initial distribution under a policy schedule.
inline std::vector<Eigen::VectorXd> forward_marginals(const TabularMdp& mdp, const PolicySchedule& pi) {
  std::vector<Eigen::VectorXd> alpha(pi.horizon() + 1, Eigen::VectorXd::Zero(mdp.num_states()));
  alpha[0] = mdp.initial_dist();
  for (int t = 0; t < pi.horizon(); ++t)
    for (int s = 0; s < mdp.num_states(); ++s) {
      if (alpha[t](s) == 0.0) continue;
      for (int a = 0; a < mdp.num_actions(); ++a)
        for (const auto& o : mdp.row(s, a)) alpha[t + 1](o.next) += alpha[t](s) * pi.probs[t](s, a) * o.prob;
    }
  return alpha;
}

}  // namespace rlsp
