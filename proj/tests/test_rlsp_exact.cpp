#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "rlsp/rlsp_exact.hpp"
#include "test_util.hpp"

using namespace rlsp;
using rlsp::testing::random_problem;

TEST(ExactGradient, MatchesBruteForceOnRandomMdps) {
  Rng rng = make_stream(100, 0);
  for (int k = 0; k < 60; ++k) {
    auto p = random_problem(rng);
    for (bool corr : {true, false}) {
      const auto e = exact_state_gradient(p.mdp, p.features, p.theta, p.s0, p.T, corr);
      const auto b = brute_force_state_gradient(p.mdp, p.features, p.theta, p.s0, p.T, corr);
      EXPECT_LT((e - b).cwiseAbs().maxCoeff(), 1e-8) << "instance " << k;
    }
  }
}

TEST(ExactGradient, EqualsFiniteDifferenceOfLogLikelihood) {
  Rng rng = make_stream(101, 0);
  for (int k = 0; k < 30; ++k) {
    auto p = random_problem(rng);
    const auto g = exact_state_gradient(p.mdp, p.features, p.theta, p.s0, p.T);
    for (int i = 0; i < p.features.dim(); ++i) {
      RewardParams up = p.theta, dn = p.theta;
      up.weights(i) += 1e-5;
      dn.weights(i) -= 1e-5;
      const double fd = (state_log_likelihood(p.mdp, p.features, up, p.s0, p.T) -
                         state_log_likelihood(p.mdp, p.features, dn, p.s0, p.T)) / 2e-5;
      EXPECT_NEAR(g(i), fd, 1e-6);
    }
  }
}

TEST(ExactGradient, SingleConsistentTrajectory) {
  // chain where only 0 -> 1 -> 2 reaches state 2 in two steps
  TabularMdp m(3, 2, 2);
  for (int s = 0; s < 3; ++s) {
    m.set_deterministic(s, 0, s);
    m.set_deterministic(s, 1, std::min(2, s + 1));
  }
  const FeatureMap f((Eigen::MatrixXd(3, 2) << 1, 0, 0, 1, 0.5, 0.5).finished());
  const RewardParams theta(Eigen::Vector2d(0.2, -0.4));
  const Trajectory tau{{0, 1, 2}, {1, 1}};
  EXPECT_LT((exact_state_gradient(m, f, theta, 2, 2) - mceirl_trajectory_gradient(m, f, theta, tau, true)).norm(), 1e-12);
}

TEST(ExactGradient, ZeroLikelihoodIsReported) {
  TabularMdp m(2, 1, 2);
  m.set_deterministic(0, 0, 0);
  m.set_deterministic(1, 0, 1);
  const FeatureMap f(Eigen::MatrixXd::Identity(2, 2));
  try {
    exact_state_gradient(m, f, RewardParams::zeros(2), 1, 2);
    FAIL();
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("observed state has zero likelihood"), std::string::npos);
  }
}

TEST(ExactGradient, HorizonOutOfRange) {
  auto p = rlsp::testing::four_state_problem();
  EXPECT_THROW(exact_state_gradient(p.mdp, p.features, p.theta, p.s0, p.mdp.horizon() + 1), ArgumentError);
}

TEST(ExactGradient, RoomVasePushesAgainstBreaking) {
  const auto c = build_gridworld(CaseName::room_vase);
  const RewardParams theta(Eigen::Vector3d(1.0, 0.5, 0.0));
  EXPECT_LT(exact_state_gradient(c.mdp, c.features, theta, c.observed_state, c.mdp.horizon())(0), 0.0);
}

TEST(BruteForce, SingleStateIsZero) {
  TabularMdp m(1, 1, 3);
  m.set_deterministic(0, 0, 0);
  const FeatureMap f(Eigen::MatrixXd::Ones(1, 2));
  EXPECT_EQ(brute_force_state_gradient(m, f, RewardParams(Eigen::Vector2d(0.3, 0.1)), 0, 3).norm(), 0.0);
}

TEST(BruteForce, RefusesLargeSearch) {
  const auto c = build_gridworld(CaseName::apples);
  EXPECT_THROW(brute_force_state_gradient(c.mdp, c.features, RewardParams::zeros(2), c.observed_state, c.mdp.horizon()),
               ArgumentError);
}

TEST(BruteForce, UnreachablePaddingChangesNothing) {
  Rng rng = make_stream(102, 0);
  auto p = random_problem(rng, 4, 3, 3);
  const int S = p.mdp.num_states(), A = p.mdp.num_actions();
  TabularMdp padded(2 * S, A, p.mdp.horizon());
  Eigen::VectorXd init = Eigen::VectorXd::Zero(2 * S);
  init.head(S) = p.mdp.initial_dist();
  padded.set_initial_dist(init);
  for (int s = 0; s < 2 * S; ++s)
    for (int a = 0; a < A; ++a) {
      if (s < S) {
        const auto row = p.mdp.row(s, a);
        padded.set_row(s, a, {row.begin(), row.end()});
      } else {
        padded.set_deterministic(s, a, s);
      }
    }
  Eigen::MatrixXd table(2 * S, p.features.dim());
  table << p.features.table(), p.features.table();
  const auto a = brute_force_state_gradient(p.mdp, p.features, p.theta, p.s0, p.T);
  const auto b = brute_force_state_gradient(padded, FeatureMap(table), p.theta, p.s0, p.T);
  EXPECT_LT((a - b).norm(), 1e-12);
}

TEST(InferReward, ConstantFeaturesStayZero) {
  auto p = rlsp::testing::four_state_problem();
  const FeatureMap flat(Eigen::MatrixXd::Ones(4, 2));
  RlspConfig cfg;
  cfg.horizon_T = p.T;
  cfg.iterations = 20;
  EXPECT_LT(infer_reward(p.mdp, flat, p.s0, cfg).weights.norm(), 1e-12);
}

TEST(InferReward, LikelihoodNonDecreasingForSmallSteps) {
  Rng rng = make_stream(103, 0);
  for (int k = 0; k < 10; ++k) {
    auto p = random_problem(rng);
    RewardParams theta = RewardParams::zeros(p.features.dim());
    double prev = state_log_likelihood(p.mdp, p.features, theta, p.s0, p.T);
    for (int it = 0; it < 50; ++it) {
      theta.weights += 1e-2 * exact_state_gradient(p.mdp, p.features, theta, p.s0, p.T);
      const double ll = state_log_likelihood(p.mdp, p.features, theta, p.s0, p.T);
      EXPECT_GE(ll, prev - 1e-12);
      prev = ll;
    }
  }
}

TEST(InferReward, BadConfigRejected) {
  RlspConfig cfg;
  cfg.learning_rate = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.learning_rate = std::nan("");
  EXPECT_THROW(cfg.validate(), ConfigError);
}

namespace {
RewardParams infer_for(const GridworldCase& c) {
  RlspConfig cfg;
  cfg.horizon_T = c.mdp.horizon();
  return infer_reward(c.mdp, c.features, c.observed_state, cfg);
}
}  // namespace

TEST(InferReward, RoomVaseDislikesBrokenVases) {
  const auto c = build_gridworld(CaseName::room_vase);
  const auto theta = infer_for(c);
  EXPECT_LT(theta.weights(c.features.index_of("broken_vases")), 0.0);
  EXPECT_NEAR(theta.weights.norm(), 1.0, 1e-12);
}

TEST(InferReward, FarVaseLearnsNothingAboutTheVase) {
  const auto c = build_gridworld(CaseName::far_vase);
  EXPECT_LT(std::abs(infer_for(c).weights(c.features.index_of("broken_vases"))), 0.1);
}

TEST(LambdaSweep, ExactRlspRecoversEveryCase) {
  for (const auto& name : case_names()) {
    const auto c = build_gridworld(name);
    const auto theta = infer_for(c);
    const auto report = lambda_sweep(c, theta);
    EXPECT_EQ(report.lambdas.size(), report.behavior_labels.size());
    EXPECT_EQ(report.lambdas.size(), report.returns_true.size());
    if (c.name != CaseName::far_vase) EXPECT_NE(report.behavior_labels.front(), c.desired_label) << name;
    EXPECT_EQ(case_label(c, theta, report), c.desired_label) << name;
  }
}

TEST(LambdaSweep, ZeroInferredRewardIsFlat) {
  const auto c = build_gridworld(CaseName::room_vase);
  const auto report = lambda_sweep(c, RewardParams::zeros(c.features.dim()));
  for (double r : report.returns_true) EXPECT_EQ(r, report.returns_true.front());
}

TEST(LambdaSweep, CsvColumns) {
  const auto c = build_gridworld(CaseName::room_vase);
  std::ostringstream out;
  lambda_sweep(c, RewardParams::zeros(3), {0.0, 1.0}).write_csv(out);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "lambda,return_true,behavior_label");
}

TEST(LambdaSweep, RejectsUnsortedLambdas) {
  const auto c = build_gridworld(CaseName::room_vase);
  EXPECT_THROW(lambda_sweep(c, RewardParams::zeros(3), {1.0, 0.5}), ArgumentError);
}
