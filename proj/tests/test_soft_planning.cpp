#include <cmath>
#include <functional>

#include <gtest/gtest.h>

#include "rlsp/gridworld.hpp"
#include "rlsp/soft_planning.hpp"
#include "test_util.hpp"

using namespace rlsp;
using rlsp::testing::random_problem;

namespace {

// States {0, 1}; action 0 stays, action 1 moves to state 1. phi = (0, 1).
struct Chain {
  TabularMdp mdp{2, 2, 1};
  FeatureMap features{Eigen::MatrixXd((Eigen::MatrixXd(2, 1) << 0, 1).finished())};
  Chain(int horizon = 1) {
    mdp.set_horizon(horizon);
    for (int s = 0; s < 2; ++s) {
      mdp.set_deterministic(s, 0, s);
      mdp.set_deterministic(s, 1, 1);
    }
  }
};

double log_traj_prob(const TabularMdp& mdp, const PolicySchedule& pi, const Trajectory& tau) {
  double lp = std::log(mdp.initial_dist()(tau.states[0]));
  for (int t = 0; t < tau.length(); ++t)
    lp += std::log(pi.probs[t](tau.states[t], tau.actions[t]) * mdp.step_dist(tau.states[t], tau.actions[t])(tau.states[t + 1]));
  return lp;
}

// Calls f(tau, p) for every length-H trajectory with nonzero probability.
void enumerate(const TabularMdp& mdp, const PolicySchedule& pi, int H,
               const std::function<void(const Trajectory&, double)>& f) {
  Trajectory tau;
  std::function<void(int, double)> go = [&](int t, double p) {
    if (t == H) return f(tau, p);
    const int s = tau.states.back();
    for (int a = 0; a < mdp.num_actions(); ++a)
      for (const auto& o : mdp.row(s, a)) {
        tau.actions.push_back(a);
        tau.states.push_back(o.next);
        go(t + 1, p * pi.probs[t](s, a) * o.prob);
        tau.actions.pop_back();
        tau.states.pop_back();
      }
  };
  for (int s = 0; s < mdp.num_states(); ++s)
    if (mdp.initial_dist()(s) > 0.0) {
      tau.states = {s};
      go(0, mdp.initial_dist()(s));
    }
}

}  // namespace

TEST(SoftValueIteration, ZeroRewardGivesUniformPolicy) {
  Rng rng = make_stream(1, 0);
  auto p = random_problem(rng);
  const auto pi = boltzmann_policy(soft_value_iteration(p.mdp, p.features, RewardParams::zeros(p.features.dim())));
  for (const auto& m : pi.probs) EXPECT_LT((m.array() - 1.0 / p.mdp.num_actions()).abs().maxCoeff(), 1e-12);
}

TEST(SoftValueIteration, OneBackupByHand) {
  Chain c;
  const auto q = soft_value_iteration(c.mdp, c.features, RewardParams(Eigen::VectorXd::Ones(1)));
  EXPECT_NEAR(q.q[0](0, 1) - q.q[0](0, 0), 1.0, 1e-12);
}

TEST(SoftValueIteration, ValueIsLogSumExpOfQ) {
  Rng rng = make_stream(2, 0);
  for (int k = 0; k < 20; ++k) {
    auto p = random_problem(rng);
    const auto q = soft_value_iteration(p.mdp, p.features, p.theta);
    for (int t = 0; t < q.horizon(); ++t)
      for (int s = 0; s < p.mdp.num_states(); ++s)
        EXPECT_NEAR(q.v[t](s), std::log(q.q[t].row(s).array().exp().sum()), 1e-9);
    EXPECT_TRUE(q.v.back().isApprox(p.theta.state_rewards(p.features)));
  }
}

TEST(SoftValueIteration, ActionPermutationPermutesQ) {
  Rng rng = make_stream(3, 0);
  auto p = random_problem(rng, 5, 3, 4);
  while (p.mdp.num_actions() < 2) p = random_problem(rng, 5, 3, 4);
  const int A = p.mdp.num_actions();
  TabularMdp flipped(p.mdp.num_states(), A, p.mdp.horizon());
  flipped.set_initial_dist(p.mdp.initial_dist());
  for (int s = 0; s < p.mdp.num_states(); ++s)
    for (int a = 0; a < A; ++a) {
      const auto row = p.mdp.row(s, A - 1 - a);
      flipped.set_row(s, a, {row.begin(), row.end()});
    }
  const auto q = soft_value_iteration(p.mdp, p.features, p.theta);
  const auto qf = soft_value_iteration(flipped, p.features, p.theta);
  for (int t = 0; t < q.horizon(); ++t)
    EXPECT_TRUE(q.q[t].rowwise().reverse().isApprox(qf.q[t], 1e-12));
}

TEST(SoftValueIteration, MonotoneInStateReward) {
  Rng rng = make_stream(4, 0);
  for (int k = 0; k < 20; ++k) {
    auto p = random_problem(rng);
    // a private indicator feature for one state
    const int star = uniform_int(0, p.mdp.num_states() - 1, rng);
    Eigen::MatrixXd table(p.mdp.num_states(), p.features.dim() + 1);
    table << p.features.table(), Eigen::VectorXd::Zero(p.mdp.num_states());
    table(star, p.features.dim()) = 1.0;
    const FeatureMap f(table);
    Eigen::VectorXd w(p.features.dim() + 1);
    w << p.theta.weights, 0.0;
    const auto lo = soft_value_iteration(p.mdp, f, RewardParams(w));
    w(p.features.dim()) = 0.5;
    const auto hi = soft_value_iteration(p.mdp, f, RewardParams(w));
    for (std::size_t t = 0; t < lo.v.size(); ++t) EXPECT_GT(hi.v[t](star), lo.v[t](star));
  }
}

TEST(BoltzmannPolicy, HandValues) {
  QSchedule q;
  q.q.push_back((Eigen::MatrixXd(2, 2) << 0, 0, 2.0, 2.0 + std::log(3.0)).finished());
  const auto pi = boltzmann_policy(q);
  EXPECT_NEAR(pi.probs[0](0, 0), 0.5, 1e-15);
  EXPECT_NEAR(pi.probs[0](1, 0), 0.25, 1e-12);
  EXPECT_NEAR(pi.probs[0](1, 1), 0.75, 1e-12);
}

TEST(BoltzmannPolicy, ShiftInvariantAndNormalized) {
  Rng rng = make_stream(5, 0);
  auto p = random_problem(rng);
  auto q = soft_value_iteration(p.mdp, p.features, p.theta);
  const auto pi = boltzmann_policy(q);
  for (auto& m : q.q) m.array() += 17.25;
  const auto pi2 = boltzmann_policy(q);
  for (std::size_t t = 0; t < pi.probs.size(); ++t) {
    EXPECT_LT((pi.probs[t] - pi2.probs[t]).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((pi.probs[t].rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-9);
  }
}

TEST(Rollout, ZeroStepsAndDeterminism) {
  Chain c(3);
  const auto pi = optimal_policy(c.mdp, c.features.table().col(0), 3);
  Rng rng = make_stream(6, 0);
  const auto empty = rollout(c.mdp, pi, 0, 0, rng);
  EXPECT_EQ(empty.states.size(), 1u);
  EXPECT_TRUE(empty.actions.empty());
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng r = make_stream(seed, 1);
    const auto tau = rollout(c.mdp, pi, 0, 3, r);
    EXPECT_EQ(tau.states, (std::vector<int>{0, 1, 1, 1}));
  }
}

TEST(Rollout, VisitFrequenciesMatchExactOccupancy) {
  Rng rng = make_stream(7, 0);
  auto p = random_problem(rng, 5, 3, 4);
  const int H = p.mdp.horizon();
  const auto pi = boltzmann_policy(soft_value_iteration(p.mdp, p.features, p.theta));
  const int start = 0;
  // exact marginals from the start state
  std::vector<Eigen::VectorXd> occ(H + 1, Eigen::VectorXd::Zero(p.mdp.num_states()));
  occ[0](start) = 1.0;
  for (int t = 0; t < H; ++t)
    for (int s = 0; s < p.mdp.num_states(); ++s)
      for (int a = 0; a < p.mdp.num_actions(); ++a)
        occ[t + 1] += occ[t](s) * pi.probs[t](s, a) * p.mdp.step_dist(s, a);
  const int n = 100000;
  std::vector<Eigen::VectorXd> counts(H + 1, Eigen::VectorXd::Zero(p.mdp.num_states()));
  for (int i = 0; i < n; ++i) {
    const auto tau = rollout(p.mdp, pi, start, H, rng);
    for (int t = 0; t <= H; ++t) counts[t](tau.states[t]) += 1.0;
  }
  for (int t = 0; t <= H; ++t)
    for (int s = 0; s < p.mdp.num_states(); ++s) {
      const double q = occ[t](s), se = std::sqrt(q * (1 - q) / n);
      EXPECT_LE(std::abs(counts[t](s) / n - q), 3 * se + 1e-12) << "t=" << t << " s=" << s;
    }
}

TEST(FeatureExpectations, BaseCaseAndAbsorbingState) {
  TabularMdp m(1, 2, 4);
  m.set_deterministic(0, 0, 0);
  m.set_deterministic(0, 1, 0);
  const FeatureMap f((Eigen::MatrixXd(1, 2) << 1, 0).finished());
  const auto fe = feature_expectations(m, f, boltzmann_policy(soft_value_iteration(m, f, RewardParams::zeros(2))));
  EXPECT_EQ(fe.f[4], f.table());
  for (int k = 0; k <= 4; ++k) EXPECT_EQ(fe.f[4 - k](0, 0), k + 1.0);
  EXPECT_EQ(fe.f[0](0, 1), 0.0);
}

TEST(FeatureExpectations, MatchesEnumeration) {
  Rng rng = make_stream(8, 0);
  for (int k = 0; k < 50; ++k) {
    auto p = random_problem(rng);
    const int H = p.mdp.horizon();
    const auto pi = boltzmann_policy(soft_value_iteration(p.mdp, p.features, p.theta));
    const auto fe = feature_expectations(p.mdp, p.features, pi);
    for (int s = 0; s < p.mdp.num_states(); ++s) {
      TabularMdp from_s = p.mdp;
      from_s.set_initial_state(s);
      Eigen::VectorXd acc = Eigen::VectorXd::Zero(p.features.dim());
      enumerate(from_s, pi, H, [&](const Trajectory& tau, double w) {
        for (int x : tau.states) acc += w * p.features(x);
      });
      EXPECT_LT((acc - fe.f[0].row(s).transpose()).cwiseAbs().maxCoeff(), 1e-8);
    }
  }
}

TEST(FeatureExpectations, MatchesMonteCarloOnRoomVase) {
  const auto c = build_gridworld(CaseName::room_vase);
  const Eigen::VectorXd w = (Eigen::VectorXd(3) << -0.5, 1.0, 0.3).finished();
  const auto pi = boltzmann_policy(soft_value_iteration(c.mdp, c.features, RewardParams(w)));
  const auto fe = feature_expectations(c.mdp, c.features, pi);
  const int n = 100000, H = c.mdp.horizon(), d = c.features.dim();
  Rng rng = make_stream(9, 0);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(d), sq = Eigen::VectorXd::Zero(d);
  for (int i = 0; i < n; ++i) {
    const auto tau = rollout(c.mdp, pi, c.true_initial_state, H, rng);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
    for (int s : tau.states) x += c.features(s);
    sum += x;
    sq += x.cwiseProduct(x);
  }
  const Eigen::VectorXd mean = sum / n;
  const Eigen::VectorXd se = ((sq / n - mean.cwiseProduct(mean)) / n).cwiseMax(0.0).cwiseSqrt();
  const Eigen::VectorXd exact = fe.f[0].row(c.true_initial_state).transpose();
  for (int i = 0; i < d; ++i) EXPECT_LE(std::abs(mean(i) - exact(i)), 3 * se(i) + 1e-12) << i;
}

TEST(MceirlGradient, NearZeroWhenDemoIsOptimal) {
  Chain c(2);
  const RewardParams theta(Eigen::VectorXd::Constant(1, 40.0));
  Trajectory tau{{0, 1, 1}, {1, 0}};
  EXPECT_LT(mceirl_trajectory_gradient(c.mdp, c.features, theta, tau, true).norm(), 1e-9);
}

TEST(MceirlGradient, CorrectionVanishesOnDeterministicMdp) {
  Chain c(3);
  const RewardParams theta(Eigen::VectorXd::Constant(1, 0.4));
  Trajectory tau{{0, 0, 1, 1}, {0, 1, 0}};
  const auto with = mceirl_trajectory_gradient(c.mdp, c.features, theta, tau, true);
  const auto without = mceirl_trajectory_gradient(c.mdp, c.features, theta, tau, false);
  EXPECT_EQ((with - without).norm(), 0.0);
}

TEST(MceirlGradient, TooLongTrajectoryRejected) {
  Chain c(1);
  Trajectory tau{{0, 1, 1}, {1, 0}};
  EXPECT_THROW(mceirl_trajectory_gradient(c.mdp, c.features, RewardParams::zeros(1), tau, true), ArgumentError);
}

// With the correction the per-trajectory gradient is d/dtheta ln p(tau | theta); checked by
// central differences on every trajectory of small random MDPs.
TEST(MceirlGradient, EqualsFiniteDifferenceOfLogLikelihood) {
  Rng rng = make_stream(10, 0);
  for (int k = 0; k < 20; ++k) {
    auto p = random_problem(rng, 4, 3, 3);
    const int H = p.mdp.horizon(), d = p.features.dim();
    const auto pi = boltzmann_policy(soft_value_iteration(p.mdp, p.features, p.theta));
    Eigen::VectorXd avg_analytic = Eigen::VectorXd::Zero(d), avg_fd = Eigen::VectorXd::Zero(d);
    enumerate(p.mdp, pi, H, [&](const Trajectory& tau, double w) {
      const Eigen::VectorXd g = mceirl_trajectory_gradient(p.mdp, p.features, p.theta, tau, true);
      Eigen::VectorXd fd(d);
      const double h = 1e-5;
      for (int i = 0; i < d; ++i) {
        RewardParams up = p.theta, dn = p.theta;
        up.weights(i) += h;
        dn.weights(i) -= h;
        fd(i) = (log_traj_prob(p.mdp, boltzmann_policy(soft_value_iteration(p.mdp, p.features, up)), tau) -
                 log_traj_prob(p.mdp, boltzmann_policy(soft_value_iteration(p.mdp, p.features, dn)), tau)) / (2 * h);
      }
      EXPECT_LT((g - fd).cwiseAbs().maxCoeff(), 1e-5);
      avg_analytic += w * g;
      avg_fd += w * fd;
    });
    EXPECT_LT((avg_analytic - avg_fd).cwiseAbs().maxCoeff(), 1e-5);
  }
}

TEST(MceirlGradient, CorrectionHasZeroMeanOnPolicy) {
  Rng rng = make_stream(11, 0);
  auto p = random_problem(rng, 5, 3, 4);
  const int H = p.mdp.horizon(), d = p.features.dim(), n = 10000;
  const auto pi = boltzmann_policy(soft_value_iteration(p.mdp, p.features, p.theta));
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(d), sq = Eigen::VectorXd::Zero(d);
  for (int i = 0; i < n; ++i) {
    const int s = sample_categorical(p.mdp.initial_dist().transpose(), rng);
    const auto tau = rollout(p.mdp, pi, s, H, rng);
    const Eigen::VectorXd c = mceirl_trajectory_gradient(p.mdp, p.features, p.theta, tau, true) -
                              mceirl_trajectory_gradient(p.mdp, p.features, p.theta, tau, false);
    sum += c;
    sq += c.cwiseProduct(c);
  }
  const Eigen::VectorXd mean = sum / n;
  const Eigen::VectorXd se = ((sq / n - mean.cwiseProduct(mean)) / n).cwiseMax(0.0).cwiseSqrt();
  EXPECT_LT(mean.norm(), 3 * se.norm());
}
