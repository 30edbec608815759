#pragma once

#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rlsp/error.hpp"

namespace rlsp {

/// One outcome of a (state, action) pair.
struct Outcome {
  int next = 0;
  double prob = 0.0;
};

/// Finite-horizon MDP over integer states and actions.
///
/// Transition rows are stored sparsely; `step_dist` densifies one row on demand.
/// Immutable once built, so a single instance can be shared between threads.
class TabularMdp {
 public:
  static constexpr double kTolerance = 1e-9;

  TabularMdp() = default;
  TabularMdp(int num_states, int num_actions, int horizon)
      : num_states_(num_states),
        num_actions_(num_actions),
        horizon_(horizon),
        rows_(static_cast<std::size_t>(num_states) * num_actions),
        initial_(Eigen::VectorXd::Zero(num_states)) {
    if (num_states < 1 || num_actions < 1) throw ArgumentError("TabularMdp: empty state or action space");
    if (horizon < 1) throw ArgumentError("TabularMdp: horizon must be >= 1");
    initial_(0) = 1.0;
  }

  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }
  int horizon() const { return horizon_; }

  void set_horizon(int horizon) {
    if (horizon < 1) throw ArgumentError("TabularMdp: horizon must be >= 1");
    horizon_ = horizon;
  }

  /// Replaces the outcome list of (s, a). Duplicate targets are merged.
  void set_row(int s, int a, std::vector<Outcome> row) {
    check_index(s, a);
    std::vector<Outcome> merged;
    for (const auto& o : row) {
      if (o.next < 0 || o.next >= num_states_) throw ArgumentError("TabularMdp: outcome state out of range");
      if (!(o.prob >= 0.0) || !std::isfinite(o.prob)) throw ArgumentError("TabularMdp: negative or non-finite probability");
      if (o.prob == 0.0) continue;
      bool found = false;
      for (auto& m : merged) {
        if (m.next == o.next) {
          m.prob += o.prob;
          found = true;
        }
      }
      if (!found) merged.push_back(o);
    }
    rows_[index(s, a)] = std::move(merged);
  }

  void set_deterministic(int s, int a, int next) { set_row(s, a, {{next, 1.0}}); }

  std::span<const Outcome> row(int s, int a) const {
    check_index(s, a);
    return rows_[index(s, a)];
  }

  /// Dense copy of the next-state distribution for (s, a).
  Eigen::VectorXd step_dist(int s, int a) const {
    Eigen::VectorXd p = Eigen::VectorXd::Zero(num_states_);
    for (const auto& o : row(s, a)) p(o.next) += o.prob;
    return p;
  }

  const Eigen::VectorXd& initial_dist() const { return initial_; }

  void set_initial_dist(Eigen::VectorXd dist) {
    if (dist.size() != num_states_) throw ArgumentError("TabularMdp: initial distribution has wrong size");
    initial_ = std::move(dist);
  }

  void set_initial_state(int s) {
    check_state(s);
    initial_.setZero();
    initial_(s) = 1.0;
  }

  /// Throws ArgumentError when any row or the initial distribution is not a distribution.
  void validate() const {
    for (int s = 0; s < num_states_; ++s) {
      for (int a = 0; a < num_actions_; ++a) {
        double total = 0.0;
        for (const auto& o : rows_[index(s, a)]) {
          if (o.prob < 0.0) throw ArgumentError("TabularMdp: negative transition probability");
          total += o.prob;
        }
        if (std::abs(total - 1.0) > kTolerance)
          throw ArgumentError("TabularMdp: row (" + std::to_string(s) + ", " + std::to_string(a) +
                              ") sums to " + std::to_string(total));
      }
    }
    if ((initial_.array() < 0.0).any() || std::abs(initial_.sum() - 1.0) > kTolerance)
      throw ArgumentError("TabularMdp: initial distribution is not a distribution");
  }

  bool is_deterministic() const {
    for (const auto& r : rows_)
      if (r.size() != 1) return false;
    return true;
  }

  void check_state(int s) const {
    if (s < 0 || s >= num_states_) throw ArgumentError("TabularMdp: state index " + std::to_string(s) + " out of range");
  }

 private:
  std::size_t index(int s, int a) const { return static_cast<std::size_t>(s) * num_actions_ + a; }

  void check_index(int s, int a) const {
    check_state(s);
    if (a < 0 || a >= num_actions_) throw ArgumentError("TabularMdp: action index " + std::to_string(a) + " out of range");
  }

  int num_states_ = 0;
  int num_actions_ = 0;
  int horizon_ = 1;
  std::vector<std::vector<Outcome>> rows_;
  Eigen::VectorXd initial_;
};

/// Handcoded or learned feature table, one row per state.
class FeatureMap {
 public:
  FeatureMap() = default;
  explicit FeatureMap(Eigen::MatrixXd table, std::vector<std::string> names = {})
      : table_(std::move(table)), names_(std::move(names)) {
    if (!names_.empty() && static_cast<Eigen::Index>(names_.size()) != table_.cols())
      throw ArgumentError("FeatureMap: one name per feature column required");
  }

  int dim() const { return static_cast<int>(table_.cols()); }
  int num_states() const { return static_cast<int>(table_.rows()); }

  Eigen::VectorXd operator()(int s) const { return table_.row(s).transpose(); }
  auto row(int s) const { return table_.row(s); }

  const Eigen::MatrixXd& table() const { return table_; }
  const std::vector<std::string>& names() const { return names_; }

  /// Column index of a named feature, or -1.
  int index_of(const std::string& name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
      if (names_[i] == name) return static_cast<int>(i);
    return -1;
  }

 private:
  Eigen::MatrixXd table_;
  std::vector<std::string> names_;
};

/// Linear reward weights, r(s) = theta . phi(s).
struct RewardParams {
  Eigen::VectorXd weights;

  RewardParams() = default;
  explicit RewardParams(Eigen::VectorXd w) : weights(std::move(w)) {}

  static RewardParams zeros(int dim) { return RewardParams(Eigen::VectorXd::Zero(dim)); }

  int dim() const { return static_cast<int>(weights.size()); }
  bool finite() const { return weights.allFinite(); }

  void require_finite() const {
    if (!finite()) throw NumericalError("RewardParams: non-finite weights");
  }

  /// Per-state reward vector under a feature table.
  Eigen::VectorXd state_rewards(const FeatureMap& f) const {
    if (f.dim() != dim()) throw ArgumentError("RewardParams: feature dimension mismatch");
    return f.table() * weights;
  }
};

/// Returns the row transition[s][a] as a dense vector.
inline Eigen::VectorXd step_dist(const TabularMdp& mdp, int s, int a) { return mdp.step_dist(s, a); }

}  // namespace rlsp
