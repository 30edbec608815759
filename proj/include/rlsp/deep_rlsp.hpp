#pragma once

#include <cmath>
#include <cstdio>
#include <deque>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rlsp/error.hpp"
#include "rlsp/random.hpp"
#include "rlsp/soft_planning.hpp"
#include "rlsp/soft_q.hpp"
#include "rlsp/tabular_mdp.hpp"
#include "rlsp/vae.hpp"
#include "rlsp/world_models.hpp"

namespace rlsp {

template <class S, class A>
struct Transition {
  S s;
  A a;
  S s_next;
};

template <class S>
struct SimStep {
  S next;
  bool terminated = false;
};

/// Bounded FIFO of transitions. Callers must only push transitions whose s' came from the true simulator.
template <class S, class A>
class ReplayBuffer {
 public:
  using Item = Transition<S, A>;

  explicit ReplayBuffer(std::size_t capacity = 100000) : capacity_(capacity) {
    if (capacity == 0) throw ConfigError("ReplayBuffer: capacity must be >= 1");
  }

  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  std::size_t capacity() const { return capacity_; }
  const std::deque<Item>& items() const { return items_; }

  void push(Item tr) {
    if (items_.size() == capacity_) items_.pop_front();
    items_.push_back(std::move(tr));
  }

  std::vector<S> states() const {
    std::vector<S> out;
    out.reserve(items_.size());
    for (const auto& tr : items_) out.push_back(tr.s);
    return out;
  }

  /// Re-simulates a random fraction (at least one entry) and counts exact replays.
  template <class Sim>
  std::pair<std::size_t, std::size_t> audit(double fraction, const Sim& sim, Rng& rng) const {
    if (items_.empty()) return {0, 0};
    const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(fraction * items_.size())));
    std::size_t ok = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& tr = items_[static_cast<std::size_t>(uniform_int(0, static_cast<int>(items_.size()) - 1, rng))];
      if (sim.replays(tr)) ++ok;
    }
    return {n, ok};
  }

 private:
  std::size_t capacity_;
  std::deque<Item> items_;
};

struct CurriculumState {
  int horizon_T = 1;
  int steps_at_T = 0;
  double grad_norm_threshold = 2.0;
  int max_steps_per_T = 10;
  int max_T = 10;
  bool finished = false;  // set when the step at max_T would advance the horizon

  void validate() const {
    if (max_T < 1 || horizon_T < 1 || horizon_T > max_T) throw ConfigError("CurriculumState: need 1 <= horizon_T <= max_T");
    if (max_steps_per_T < 0) throw ConfigError("CurriculumState: negative max_steps_per_T");
  }
};

inline CurriculumState curriculum_advance(CurriculumState cs, double grad_norm) {
  cs.validate();
  if (grad_norm < cs.grad_norm_threshold || cs.steps_at_T >= cs.max_steps_per_T) {
    if (cs.horizon_T == cs.max_T) {
      cs.finished = true;
    } else {
      ++cs.horizon_T;
      cs.steps_at_T = 0;
    }
  } else {
    ++cs.steps_at_T;
  }
  return cs;
}

template <class S>
struct ObservedStateSet {
  std::vector<S> states;
  std::function<Eigen::VectorXd(Rng&)> prior_sampler;  // draws from the initial state distribution

  std::size_t size() const { return states.size(); }
  void validate() const {
    if (states.empty()) throw ArgumentError("ObservedStateSet: no observed states");
  }
};

struct GradientEstimate {
  Eigen::VectorXd gradient;
  Eigen::MatrixXd per_trajectory;                // rows: backward minus forward feature sums
  Eigen::VectorXd std_error;                     // of the mean, per feature
  std::vector<Eigen::VectorXd> terminal_states;  // raw s_{-T} per trajectory
  std::vector<int> source;                       // observed-state index per trajectory
};

/// Scales each trajectory's gradient by cos(s_{-T}, prior_sample) clamped to [0, 1] and returns the weighted mean.
inline Eigen::VectorXd weight_by_prior(const Eigen::MatrixXd& grads_per_traj, const std::vector<Eigen::VectorXd>& terminal,
                                       const Eigen::VectorXd& prior_sample) {
  if (static_cast<std::size_t>(grads_per_traj.rows()) != terminal.size())
    throw ArgumentError("weight_by_prior: one terminal state per trajectory required");
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(grads_per_traj.cols());
  double total = 0.0;
  const double pn = prior_sample.norm();
  bool warned = false;
  for (std::size_t i = 0; i < terminal.size(); ++i) {
    const double tn = terminal[i].norm();
    double w = 0.0;
    if (tn == 0.0 || pn == 0.0) {
      if (!warned) log_warning("weight_by_prior: zero-norm state, weight set to 0");
      warned = true;
    } else {
      w = std::clamp(terminal[i].dot(prior_sample) / (tn * pn), 0.0, 1.0);
    }
    acc += w * grads_per_traj.row(static_cast<Eigen::Index>(i)).transpose();
    total += w;
  }
  if (total == 0.0) {
    log_warning("weight_by_prior: all weights are zero, gradient set to 0");
    return acc;
  }
  return acc / total;
}

/// Sampled gradient: backward from each observed state with the inverse models, forward from the
/// reached s_{-T} with the forward policy and the true simulator. Returns the mean over trajectories
/// (equal count per observed state). Generated transitions are relabeled and pushed to `replay`.
///
/// Model interface: State, Action; backward(next_states, t_next, rng) -> vector<pair<Action, State>>;
/// act(states, t, rng) -> vector<Action>; step(s, a) -> SimStep<State>; features(states) -> rows;
/// raw(s) -> Eigen::VectorXd; ready() -> bool.
template <class Model>
GradientEstimate compute_grad(const Model& model, const ObservedStateSet<typename Model::State>& obs, int T, int num_traj,
                              Rng& rng, ReplayBuffer<typename Model::State, typename Model::Action>* replay = nullptr) {
  using S = typename Model::State;
  using A = typename Model::Action;
  obs.validate();
  if (T < 1) throw ArgumentError("compute_grad: T must be >= 1");
  if (num_traj < 1) throw ArgumentError("compute_grad: num_traj must be >= 1");
  if (!model.ready()) throw StateError("compute_grad: models not trained");

  const int n_obs = static_cast<int>(obs.size());
  const int N = n_obs * num_traj;
  std::vector<S> cur;
  GradientEstimate est;
  cur.reserve(N);
  for (int i = 0; i < n_obs; ++i)
    for (int k = 0; k < num_traj; ++k) {
      cur.push_back(obs.states[i]);
      est.source.push_back(i);
    }

  Eigen::MatrixXd back = model.features(cur);
  for (int t_next = T; t_next >= 1; --t_next) {
    auto prev = model.backward(cur, t_next, rng);
    for (int j = 0; j < N; ++j) {
      auto& [a, s] = prev[j];
      if (replay) replay->push({s, a, model.step(s, a).next});
      cur[j] = std::move(s);
    }
    back += model.features(cur);
  }
  for (const auto& s : cur) est.terminal_states.push_back(model.raw(s));

  Eigen::MatrixXd fwd = model.features(cur);
  std::vector<char> alive(N, 1);
  for (int t = 0; t < T; ++t) {
    const std::vector<A> acts = model.act(cur, t, rng);
    std::vector<int> moved;
    for (int j = 0; j < N; ++j) {
      if (!alive[j]) continue;
      SimStep<S> r = model.step(cur[j], acts[j]);
      if (replay) replay->push({cur[j], acts[j], r.next});
      cur[j] = std::move(r.next);
      if (r.terminated) alive[j] = 0;
      moved.push_back(j);
    }
    if (moved.empty()) break;
    std::vector<S> sub;
    sub.reserve(moved.size());
    for (int j : moved) sub.push_back(cur[j]);
    const Eigen::MatrixXd f = model.features(sub);
    for (std::size_t k = 0; k < moved.size(); ++k) fwd.row(moved[k]) += f.row(static_cast<Eigen::Index>(k));
  }

  est.per_trajectory = back - fwd;
  est.gradient = est.per_trajectory.colwise().mean().transpose();
  if (N > 1) {
    const Eigen::MatrixXd centered = est.per_trajectory.rowwise() - est.gradient.transpose();
    est.std_error = (centered.colwise().squaredNorm().transpose() / (N - 1.0) / N).cwiseSqrt();
  } else {
    est.std_error = Eigen::VectorXd::Zero(est.gradient.size());
  }
  return est;
}

// ---------------------------------------------------------------------------
// Ablations
// ---------------------------------------------------------------------------

/// theta = normalize(mean of observed feature vectors).
inline RewardParams average_features_reward(const Eigen::MatrixXd& observed_features) {
  if (observed_features.rows() == 0) throw ArgumentError("average_features_reward: no observed states");
  const Eigen::VectorXd mean = observed_features.colwise().mean().transpose();
  const double n = mean.norm();
  if (!(n > 1e-12)) throw NumericalError("average_features_reward: mean feature vector is zero");
  return RewardParams(mean / n);
}

/// R(s) = max_i <phi_i / |phi_i|, phi(s)> over observed feature vectors (rows). Not linear in phi.
class WaypointsReward {
 public:
  explicit WaypointsReward(const Eigen::MatrixXd& observed_features) {
    for (Eigen::Index i = 0; i < observed_features.rows(); ++i) {
      const double n = observed_features.row(i).norm();
      if (!(n > 1e-12)) {
        log_warning("waypoints_reward: zero feature vector dropped");
        continue;
      }
      dirs_.push_back(observed_features.row(i).transpose() / n);
    }
    if (dirs_.empty()) throw ArgumentError("waypoints_reward: no usable waypoints");
  }

  std::size_t size() const { return dirs_.size(); }

  double operator()(const Eigen::VectorXd& phi) const {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& d : dirs_) best = std::max(best, d.dot(phi));
    return best;
  }

 private:
  std::vector<Eigen::VectorXd> dirs_;
};

// ---------------------------------------------------------------------------
// The loop
// ---------------------------------------------------------------------------

struct DeepRlspConfig {
  double learning_rate = 0.01;
  int num_traj = 200;  // per observed state
  double grad_norm_threshold = 2.0;
  int max_steps_per_T = 10;
  int max_T = 10;
  bool normalize_theta = true;
  bool prior_weighting = false;
  double audit_fraction = 0.01;
  std::size_t replay_capacity = 100000;
  std::optional<Eigen::VectorXd> initial_theta;  // default: zero vector

  void validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("DeepRlspConfig: learning_rate must be finite and > 0");
    if (num_traj < 1) throw ConfigError("DeepRlspConfig: num_traj must be >= 1");
    if (max_T < 1) throw ConfigError("DeepRlspConfig: max_T must be >= 1");
    if (max_steps_per_T < 0) throw ConfigError("DeepRlspConfig: negative max_steps_per_T");
    if (audit_fraction < 0.0 || audit_fraction > 1.0) throw ConfigError("DeepRlspConfig: audit_fraction must be in [0, 1]");
    if (replay_capacity == 0) throw ConfigError("DeepRlspConfig: replay_capacity must be >= 1");
  }
};

struct EpochRecord {
  int epoch = 0;
  int horizon_T = 1;
  int steps_at_T = 0;  // before this epoch's curriculum update
  double grad_norm = 0.0;
  Eigen::VectorXd theta;
  double eval_return = std::numeric_limits<double>::quiet_NaN();
};

inline void write_epoch_log(std::ostream& out, const std::vector<EpochRecord>& log) {
  out << "epoch,T,steps_at_T,grad_norm,eval_return";
  const Eigen::Index d = log.empty() ? 0 : log.front().theta.size();
  for (Eigen::Index i = 0; i < d; ++i) out << ",theta_" << i;
  out << '\n';
  char buf[40];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (const auto& r : log) {
    out << r.epoch << ',' << r.horizon_T << ',' << r.steps_at_T << ',' << num(r.grad_norm) << ','
        << (std::isnan(r.eval_return) ? std::string() : num(r.eval_return));
    for (Eigen::Index i = 0; i < r.theta.size(); ++i) out << ',' << num(r.theta(i));
    out << '\n';
  }
}

struct DeepRlspResult {
  RewardParams theta;
  std::vector<EpochRecord> log;
  std::size_t audited = 0;
  std::size_t audit_passed = 0;
};

/// Learner interface (in addition to the compute_grad model interface):
///   refresh_policy(theta, T, rng), refresh_inverse(replay, rng), replays(transition),
///   eval_return(rng) -> double (NaN to skip).
template <class Learner>
DeepRlspResult run_deep_rlsp(Learner& learner, const ObservedStateSet<typename Learner::State>& obs,
                             ReplayBuffer<typename Learner::State, typename Learner::Action>& replay,
                             const DeepRlspConfig& cfg, int feature_dim, Rng& rng) {
  cfg.validate();
  obs.validate();
  if (cfg.prior_weighting && !obs.prior_sampler) throw ConfigError("deep_rlsp: prior weighting needs a prior sampler");
  DeepRlspResult res;
  res.theta = RewardParams(cfg.initial_theta ? *cfg.initial_theta : Eigen::VectorXd::Zero(feature_dim));
  if (res.theta.dim() != feature_dim) throw ConfigError("deep_rlsp: initial theta has wrong dimension");
  CurriculumState cs;
  cs.grad_norm_threshold = cfg.grad_norm_threshold;
  cs.max_steps_per_T = cfg.max_steps_per_T;
  cs.max_T = cfg.max_T;

  for (int epoch = 0; !cs.finished; ++epoch) {
    learner.refresh_policy(res.theta.weights, cs.horizon_T, rng);
    learner.refresh_inverse(replay, rng);
    const GradientEstimate est = compute_grad(learner, obs, cs.horizon_T, cfg.num_traj, rng, &replay);
    const Eigen::VectorXd g =
        cfg.prior_weighting ? weight_by_prior(est.per_trajectory, est.terminal_states, obs.prior_sampler(rng)) : est.gradient;
    res.theta.weights += cfg.learning_rate * g;
    if (!res.theta.finite()) throw NumericalError("deep_rlsp: theta became non-finite at epoch " + std::to_string(epoch));
    const double n = res.theta.weights.norm();
    if (cfg.normalize_theta && n > 0.0) res.theta.weights /= n;

    const auto [checked, ok] = replay.audit(cfg.audit_fraction, learner, rng);
    res.audited += checked;
    res.audit_passed += ok;
    if (ok != checked) throw StateError("deep_rlsp: replay audit found a transition that does not replay");

    EpochRecord rec;
    rec.epoch = epoch;
    rec.horizon_T = cs.horizon_T;
    rec.steps_at_T = cs.steps_at_T;
    rec.grad_norm = g.norm();
    rec.theta = res.theta.weights;
    rec.eval_return = learner.eval_return(rng);
    res.log.push_back(rec);
    cs = curriculum_advance(cs, rec.grad_norm);
  }
  return res;
}

// ---------------------------------------------------------------------------
// Tabular learner (gridworlds and small test MDPs)
// ---------------------------------------------------------------------------

/// How the tabular adapter gets its inverse models.
///   exact: Bayes on forward marginals from the MDP's initial distribution under the current policy.
///          The policy is planned over the MDP horizon H and a curriculum horizon T uses its last T steps.
///   uniform_prior / replay_prior: one stationary table from a uniform or replay-count state prior
///          and the time-averaged policy (the learned-model analogue).
enum class TabularInverse { exact, uniform_prior, replay_prior };

/// Handcoded features, soft value iteration as the forward optimizer and Bayes inverse models.
class TabularLearner {
 public:
  using State = int;
  using Action = int;

  TabularLearner(const TabularMdp& mdp, const FeatureMap& features, TabularInverse mode = TabularInverse::exact,
                 double prior_smoothing = 1.0)
      : mdp_(&mdp), features_(&features), mode_(mode), smoothing_(prior_smoothing) {}

  bool ready() const { return inverse_.ready() && policy_.horizon() > 0; }
  const PolicySchedule& policy() const { return policy_; }
  int offset() const { return offset_; }

  void refresh_policy(const Eigen::VectorXd& theta, int T, Rng&) {
    if (mode_ != TabularInverse::exact) {
      policy_ = boltzmann_policy(soft_value_iteration(*mdp_, *features_, RewardParams(theta), T));
      offset_ = 0;
      return;
    }
    const int H = mdp_->horizon();
    if (T > H) throw ArgumentError("TabularLearner: curriculum horizon exceeds the MDP horizon");
    policy_ = boltzmann_policy(soft_value_iteration(*mdp_, *features_, RewardParams(theta), H));
    offset_ = H - T;
    inverse_ = TabularInverseModels(*mdp_, forward_marginals(*mdp_, policy_), policy_);
  }

  void refresh_inverse(const ReplayBuffer<int, int>& replay, Rng&) {
    if (mode_ == TabularInverse::exact) return;  // rebuilt with the policy
    Eigen::VectorXd prior = Eigen::VectorXd::Constant(mdp_->num_states(), smoothing_);
    if (mode_ == TabularInverse::replay_prior)
      for (const auto& tr : replay.items()) prior(tr.s) += 1.0;
    prior /= prior.sum();
    Eigen::MatrixXd avg = Eigen::MatrixXd::Zero(mdp_->num_states(), mdp_->num_actions());
    for (const auto& p : policy_.probs) avg += p;
    avg /= static_cast<double>(policy_.horizon());
    inverse_ = TabularInverseModels(*mdp_, prior, avg);
  }

  std::vector<std::pair<int, int>> backward(const std::vector<int>& next, int t_next, Rng& rng) const {
    std::vector<std::pair<int, int>> out;
    out.reserve(next.size());
    for (int s : next) out.push_back(inverse_.backward_step(s, t_next + offset_, rng));
    return out;
  }

  std::vector<int> act(const std::vector<int>& states, int t, Rng& rng) const {
    std::vector<int> out;
    out.reserve(states.size());
    for (int s : states) out.push_back(sample_categorical(policy_.at(t + offset_, s), rng));
    return out;
  }

  /// Deterministic MDPs only for replay purposes; stochastic rows use the most likely outcome.
  SimStep<int> step(int s, int a) const {
    const auto row = mdp_->row(s, a);
    const Outcome* best = &row.front();
    for (const auto& o : row)
      if (o.prob > best->prob) best = &o;
    return {best->next, false};
  }

  bool replays(const Transition<int, int>& tr) const {
    for (const auto& o : mdp_->row(tr.s, tr.a))
      if (o.next == tr.s_next && o.prob > 0.0) return true;
    return false;
  }

  Eigen::MatrixXd features(const std::vector<int>& states) const {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(states.size()), features_->dim());
    for (std::size_t i = 0; i < states.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = features_->row(states[i]);
    return out;
  }

  Eigen::VectorXd raw(int s) const { return features_->row(s).transpose(); }
  double eval_return(Rng&) const { return std::numeric_limits<double>::quiet_NaN(); }

 private:
  const TabularMdp* mdp_;
  const FeatureMap* features_;
  TabularInverse mode_;
  double smoothing_;
  PolicySchedule policy_;
  int offset_ = 0;
  TabularInverseModels inverse_;
};

/// Random-action rollouts from `start` (the agent's own exploration data).
inline void fill_tabular_replay(const TabularMdp& mdp, int start, int num_rollouts, int rollout_len,
                                ReplayBuffer<int, int>& replay, Rng& rng) {
  for (int r = 0; r < num_rollouts; ++r) {
    int s = start;
    for (int t = 0; t < rollout_len; ++t) {
      const int a = uniform_int(0, mdp.num_actions() - 1, rng);
      const auto row = mdp.row(s, a);
      int next = row.front().next;
      double u = uniform01(rng);
      for (const auto& o : row) {
        next = o.next;
        if (u < o.prob) break;
        u -= o.prob;
      }
      replay.push({s, a, next});
      s = next;
    }
  }
}

// ---------------------------------------------------------------------------
// Continuous learner
// ---------------------------------------------------------------------------

struct ContinuousLearnerConfig {
  SoftQConfig policy;
  InversePolicyConfig inverse_policy;
  bool warm_start = true;  // forced off on pendulum-class envs
  int eval_episodes = 0;   // per epoch, for the log; 0 skips
};

/// Learned encoder features, soft Q-learning forward policy, learned inverse models, true simulator.
class ContinuousLearner {
 public:
  using State = Eigen::VectorXd;
  using Action = Eigen::VectorXd;

  ContinuousLearner(const ContinuousEnv& env, const EncoderDecoder& encoder, const InverseDynamics& inv_dyn,
                    ContinuousLearnerConfig cfg)
      : env_(&env), encoder_(&encoder), inv_dyn_(&inv_dyn), cfg_(std::move(cfg)) {}

  bool ready() const { return inv_dyn_->trained() && inv_pol_.ready; }
  const MaxEntPolicy& policy() const { return policy_; }
  const InversePolicy& inverse_policy() const { return inv_pol_; }

  StateReward reward_for(const Eigen::VectorXd& theta) const {
    const EncoderDecoder* enc = encoder_;
    return [enc, theta](const Eigen::VectorXd& s) { return theta.dot(enc->encode(s)); };
  }

  void refresh_policy(const Eigen::VectorXd& theta, int, Rng& rng) {
    SoftQConfig pc = cfg_.policy;
    pc.seed = rng();
    const bool warm = cfg_.warm_start && !env_->is_pendulum_class() && policy_.trained();
    policy_ = optimize_policy(*env_, reward_for(theta), pc, rng, warm ? &policy_ : nullptr);
  }

  void refresh_inverse(const ReplayBuffer<State, Action>& replay, Rng& rng) {
    const EncoderDecoder* enc = encoder_;
    StateFeaturizer cond = [enc](const Eigen::MatrixXd& cols) { return enc->encode_cols(cols); };
    inv_pol_ = train_inverse_policy(replay.states(), policy_, *env_, cond, cfg_.inverse_policy, rng);
  }

  std::vector<std::pair<Action, State>> backward(const std::vector<State>& next, int, Rng& rng) const {
    const Eigen::MatrixXd s = to_cols(next);
    const Eigen::MatrixXd a = inv_pol_.sample_cols(s, rng);
    const Eigen::MatrixXd prev = inv_dyn_->predict_cols(s, a);
    std::vector<std::pair<Action, State>> out;
    out.reserve(next.size());
    for (Eigen::Index j = 0; j < s.cols(); ++j) out.emplace_back(a.col(j), prev.col(j));
    return out;
  }

  std::vector<Action> act(const std::vector<State>& states, int, Rng& rng) const {
    const Eigen::MatrixXd q = policy_.q_values_cols(to_cols(states)) / policy_.temperature();
    std::vector<Action> out;
    out.reserve(states.size());
    for (Eigen::Index j = 0; j < q.cols(); ++j) {
      Eigen::VectorXd p = (q.col(j).array() - q.col(j).maxCoeff()).exp();
      p /= p.sum();
      out.push_back(policy_.grid().col(sample_categorical(p, rng)));
    }
    return out;
  }

  SimStep<State> step(const State& s, const Action& a) const {
    StepResult r = env_->step(s, a);
    return {std::move(r.next), r.terminated};
  }

  bool replays(const Transition<State, Action>& tr) const { return env_->step(tr.s, tr.a).next == tr.s_next; }

  Eigen::MatrixXd features(const std::vector<State>& states) const { return encoder_->encode_cols(to_cols(states)).transpose(); }

  Eigen::VectorXd raw(const State& s) const { return s; }

  double eval_return(Rng& rng) const {
    if (cfg_.eval_episodes <= 0) return std::numeric_limits<double>::quiet_NaN();
    return evaluate_policy(*env_, policy_, cfg_.eval_episodes, rng).mean;
  }

  static Eigen::MatrixXd to_cols(const std::vector<State>& states) {
    Eigen::MatrixXd m(states.empty() ? 0 : states.front().size(), static_cast<Eigen::Index>(states.size()));
    for (std::size_t j = 0; j < states.size(); ++j) m.col(static_cast<Eigen::Index>(j)) = states[j];
    return m;
  }

 private:
  const ContinuousEnv* env_;
  const EncoderDecoder* encoder_;
  const InverseDynamics* inv_dyn_;
  ContinuousLearnerConfig cfg_;
  MaxEntPolicy policy_;
  InversePolicy inv_pol_;
};

inline ReplayBuffer<Eigen::VectorXd, Eigen::VectorXd> replay_from_dataset(const InteractionDataset& data,
                                                                          std::size_t capacity) {
  ReplayBuffer<Eigen::VectorXd, Eigen::VectorXd> replay(capacity);
  for (const auto& tr : data.transitions) replay.push({tr.s, tr.a, tr.s_next});
  return replay;
}

}  // namespace rlsp
