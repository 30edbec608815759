#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rlsp/env_constants.hpp"
#include "rlsp/error.hpp"
#include "rlsp/random.hpp"

namespace rlsp {

enum class EnvName { pendulum, runner_forward, runner_backward, hopper_lite_terminate, hopper_lite_penalty };

inline const std::vector<std::string>& env_names() {
  static const std::vector<std::string> names{"pendulum", "runner_forward", "runner_backward", "hopper_lite_terminate",
                                              "hopper_lite_penalty"};
  return names;
}

inline bool is_env_name(const std::string& name) {
  for (const auto& n : env_names())
    if (n == name) return true;
  return false;
}

struct StepResult {
  Eigen::VectorXd next;
  double reward = 0.0;
  bool terminated = false;
};

/// Deterministic continuous-control environment. `step(state, action)` is pure; the
/// set_state/step(action) pair gives simulator-style access for relabeling.
class ContinuousEnv {
 public:
  ContinuousEnv() = default;
  explicit ContinuousEnv(EnvName name) : name_(name) {
    switch (name) {
      case EnvName::pendulum: state_dim_ = 4, action_dim_ = 1; break;
      case EnvName::runner_forward:
      case EnvName::runner_backward: state_dim_ = 2, action_dim_ = 1; break;
      default: state_dim_ = 4, action_dim_ = 2; break;
    }
    state_ = Eigen::VectorXd::Zero(state_dim_);
  }

  EnvName name() const { return name_; }
  std::string name_string() const { return env_names()[static_cast<int>(name_)]; }
  int state_dim() const { return state_dim_; }
  int action_dim() const { return action_dim_; }
  int max_steps() const { return env_constants::kEpisodeSteps; }
  Eigen::VectorXd action_low() const { return Eigen::VectorXd::Constant(action_dim_, -1.0); }
  Eigen::VectorXd action_high() const { return Eigen::VectorXd::Constant(action_dim_, 1.0); }
  bool is_pendulum_class() const { return name_ == EnvName::pendulum; }

  Eigen::VectorXd clip_action(const Eigen::VectorXd& a) const {
    if (a.size() != action_dim_) throw ArgumentError("ContinuousEnv: action has wrong dimension");
    return a.cwiseMax(-1.0).cwiseMin(1.0);
  }

  Eigen::VectorXd reset(Rng& rng) const {
    Eigen::VectorXd s = Eigen::VectorXd::Zero(state_dim_);
    auto noise = [&](double scale) { return scale * (2.0 * uniform01(rng) - 1.0); };
    switch (name_) {
      case EnvName::pendulum:
        for (int i = 0; i < 4; ++i) s(i) = noise(env_constants::pendulum::kInitNoise);
        break;
      case EnvName::runner_forward:
      case EnvName::runner_backward:
        for (int i = 0; i < 2; ++i) s(i) = noise(env_constants::runner::kInitNoise);
        break;
      default:
        s(0) = noise(env_constants::hopper::kInitNoise);
        s(1) = env_constants::hopper::kInitHeight + noise(env_constants::hopper::kInitNoise);
        s(2) = noise(env_constants::hopper::kInitNoise);
        s(3) = noise(env_constants::hopper::kInitNoise);
        break;
    }
    return s;
  }

  StepResult step(const Eigen::VectorXd& s, const Eigen::VectorXd& action) const {
    if (s.size() != state_dim_) throw ArgumentError("ContinuousEnv: state has wrong dimension");
    const Eigen::VectorXd a = clip_action(action);
    switch (name_) {
      case EnvName::pendulum: return step_pendulum(s, a);
      case EnvName::runner_forward:
      case EnvName::runner_backward: return step_runner(s, a);
      default: return step_hopper(s, a);
    }
  }

  void set_state(const Eigen::VectorXd& s) {
    if (s.size() != state_dim_) throw ArgumentError("ContinuousEnv: state has wrong dimension");
    state_ = s;
  }
  const Eigen::VectorXd& state() const { return state_; }
  StepResult step(const Eigen::VectorXd& action) {
    StepResult r = step(state_, action);
    state_ = r.next;
    return r;
  }

  /// Documented state bounds under bounded actions (positions of runner/hopper are unbounded along x).
  bool in_bounds(const Eigen::VectorXd& s) const {
    using namespace env_constants;
    if (!s.allFinite()) return false;
    switch (name_) {
      case EnvName::pendulum:
        return std::abs(s(0)) <= pendulum::kRail && std::abs(s(1)) <= pendulum::kMaxSpeed &&
               std::abs(s(2)) <= std::numbers::pi && std::abs(s(3)) <= pendulum::kMaxAngularSpeed;
      case EnvName::runner_forward:
      case EnvName::runner_backward: return std::abs(s(1)) <= runner::kThrust / runner::kDrag + 1e-9;
      default: return s(1) >= 0.0 && std::abs(s(2)) <= hopper::kMaxSpeed && std::abs(s(3)) <= hopper::kMaxSpeed;
    }
  }

  /// Pendulum only: pole close to vertical and nearly still.
  static bool near_upright(const Eigen::VectorXd& s) {
    using namespace env_constants::pendulum;
    return std::abs(s(2)) < kUprightAngle && std::abs(s(3)) < kUprightAngularSpeed;
  }

 private:
  static double wrap_angle(double a) {
    a = std::remainder(a, 2.0 * std::numbers::pi);
    return a == -std::numbers::pi ? std::numbers::pi : a;
  }

  static StepResult step_pendulum(const Eigen::VectorXd& s, const Eigen::VectorXd& a) {
    using namespace env_constants::pendulum;
    const double x = s(0), xd = s(1), th = s(2), thd = s(3);
    const double force = kForce * a(0);
    const double total = kCartMass + kPoleMass;
    const double sin_t = std::sin(th), cos_t = std::cos(th);
    const double temp = (force - kCartFriction * xd + kPoleMass * kHalfLength * thd * thd * sin_t) / total;
    const double thdd = (kGravity * sin_t - cos_t * temp - kPoleFriction * thd / (kPoleMass * kHalfLength)) /
                        (kHalfLength * (4.0 / 3.0 - kPoleMass * cos_t * cos_t / total));
    const double xdd = temp - kPoleMass * kHalfLength * thdd * cos_t / total;
    StepResult r;
    r.next.resize(4);
    double nxd = std::clamp(xd + kDt * xdd, -kMaxSpeed, kMaxSpeed);
    double nx = x + kDt * nxd;
    if (std::abs(nx) > kRail) {
      nx = std::clamp(nx, -kRail, kRail);
      nxd = 0.0;
    }
    const double nthd = std::clamp(thd + kDt * thdd, -kMaxAngularSpeed, kMaxAngularSpeed);
    const double nth = wrap_angle(th + kDt * nthd);
    r.next << nx, nxd, nth, nthd;
    r.terminated = std::abs(nth) > kFailAngle;
    r.reward = r.terminated ? 0.0 : 1.0;
    return r;
  }

  StepResult step_runner(const Eigen::VectorXd& s, const Eigen::VectorXd& a) const {
    using namespace env_constants::runner;
    StepResult r;
    r.next.resize(2);
    const double v = s(1) + kDt * (kThrust * a(0) - kDrag * s(1));
    r.next << s(0) + kDt * v, v;
    r.reward = name_ == EnvName::runner_forward ? v : -v;
    return r;
  }

  StepResult step_hopper(const Eigen::VectorXd& s, const Eigen::VectorXd& a) const {
    using namespace env_constants::hopper;
    const double z = s(1), xd = s(2), zd = s(3);
    const bool contact = z < kLegLength;
    double zdd = -kGravity, xdd = -kAirDrag * xd;
    if (contact) {
      const double gain = std::max(0.0, (1.0 + kPush * a(1)) * (1.0 - kThrustLoss * std::abs(a(0))));
      zdd += gain * kStiffness * (kLegLength - z) - kDamping * zd;
      xdd = kThrust * a(0) - kGroundDrag * xd;
    }
    double nzd = std::clamp(zd + kDt * zdd, -kMaxSpeed, kMaxSpeed);
    const double nxd = std::clamp(xd + kDt * xdd, -kMaxSpeed, kMaxSpeed);
    double nz = z + kDt * nzd;
    if (nz < 0.0) {
      nz = 0.0;
      nzd = 0.0;
    }
    StepResult r;
    r.next.resize(4);
    r.next << s(0) + kDt * nxd, nz, nxd, nzd;
    const bool fallen = nz < kFallHeight;
    if (name_ == EnvName::hopper_lite_terminate) {
      r.terminated = fallen;
      r.reward = fallen ? 0.0 : nxd + kAliveBonus;
    } else {
      r.reward = fallen ? kFallPenalty : nxd + kAliveBonus;
    }
    return r;
  }

  EnvName name_ = EnvName::pendulum;
  int state_dim_ = 4;
  int action_dim_ = 1;
  Eigen::VectorXd state_;
};

inline ContinuousEnv make_env(const std::string& name) {
  const auto& names = env_names();
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return ContinuousEnv(static_cast<EnvName>(i));
  throw ConfigError("unknown environment '" + name + "'");
}

/// The env's true reward as a function of the next state (every built-in reward depends only on s').
inline std::function<double(const Eigen::VectorXd&)> true_state_reward(const ContinuousEnv& env) {
  using namespace env_constants;
  switch (env.name()) {
    case EnvName::pendulum: return [](const Eigen::VectorXd& s) { return std::abs(s(2)) > pendulum::kFailAngle ? 0.0 : 1.0; };
    case EnvName::runner_forward: return [](const Eigen::VectorXd& s) { return s(1); };
    case EnvName::runner_backward: return [](const Eigen::VectorXd& s) { return -s(1); };
    case EnvName::hopper_lite_terminate:
      return [](const Eigen::VectorXd& s) { return s(1) < hopper::kFallHeight ? 0.0 : s(2) + hopper::kAliveBonus; };
    default:
      return [](const Eigen::VectorXd& s) { return s(1) < hopper::kFallHeight ? hopper::kFallPenalty : s(2) + hopper::kAliveBonus; };
  }
}

/// Scripted controllers used for datasets, sanity checks and the discriminator self-test.
namespace scripted {

/// PD balancer on pole angle plus weak cart centering.
inline Eigen::VectorXd pendulum_balancer(const Eigen::VectorXd& s) {
  const double f = 1.0 * s(0) + 1.5 * s(1) + 30.0 * s(2) + 5.0 * s(3);
  return Eigen::VectorXd::Constant(1, std::clamp(f / env_constants::pendulum::kForce, -1.0, 1.0));
}

inline Eigen::VectorXd full_throttle(int action_dim, double sign) { return Eigen::VectorXd::Constant(action_dim, sign); }

}  // namespace scripted

}  // namespace rlsp
