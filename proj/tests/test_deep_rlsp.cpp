#include <sstream>

#include <gtest/gtest.h>

#include "rlsp/deep_rlsp.hpp"
#include "rlsp/gridworld.hpp"
#include "rlsp/harness.hpp"
#include "rlsp/rlsp_exact.hpp"
#include "test_util.hpp"

using namespace rlsp;

TEST(Curriculum, Transitions) {
  CurriculumState cs;
  cs.horizon_T = 3;
  auto next = curriculum_advance(cs, 1.9);
  EXPECT_EQ(next.horizon_T, 4);
  EXPECT_EQ(next.steps_at_T, 0);
  cs.steps_at_T = 10;
  next = curriculum_advance(cs, 5.0);
  EXPECT_EQ(next.horizon_T, 4);
  cs.steps_at_T = 3;
  next = curriculum_advance(cs, 5.0);
  EXPECT_EQ(next.horizon_T, 3);
  EXPECT_EQ(next.steps_at_T, 4);
}

TEST(Curriculum, FinishesAtMaxT) {
  CurriculumState cs;
  int epochs = 0;
  while (!cs.finished) {
    cs = curriculum_advance(cs, 100.0);
    ++epochs;
    ASSERT_LE(cs.horizon_T, cs.max_T);
  }
  EXPECT_EQ(cs.horizon_T, 10);
  EXPECT_EQ(epochs, 10 * 11);
  CurriculumState bad;
  bad.horizon_T = 11;
  EXPECT_THROW(curriculum_advance(bad, 0.0), ConfigError);
}

TEST(ReplayBuffer, FifoAndAudit) {
  ReplayBuffer<int, int> rb(3);
  for (int i = 0; i < 5; ++i) rb.push({i, 0, i + 1});
  EXPECT_EQ(rb.size(), 3u);
  EXPECT_EQ(rb.items().front().s, 2);
  struct Sim {
    bool replays(const Transition<int, int>& tr) const { return tr.s_next == tr.s + 1; }
  };
  Rng rng = make_stream(1, 0);
  const auto [n, ok] = rb.audit(0.01, Sim{}, rng);
  EXPECT_EQ(n, 1u);
  EXPECT_EQ(ok, 1u);
  rb.push({9, 0, 0});
  const auto [n2, ok2] = rb.audit(1.0, Sim{}, rng);
  EXPECT_EQ(n2, 3u);
  EXPECT_LE(ok2, n2);
  EXPECT_THROW((ReplayBuffer<int, int>(0)), ConfigError);
}

namespace {

GradientEstimate tabular_estimate(const rlsp::testing::SmallProblem& p, int num_traj, Rng& rng) {
  TabularLearner learner(p.mdp, p.features);
  learner.refresh_policy(p.theta.weights, p.T, rng);
  ObservedStateSet<int> obs{{p.s0}, {}};
  return compute_grad(learner, obs, p.T, num_traj, rng);
}

}  // namespace

TEST(ComputeGrad, MatchesExactTabularGradient) {
  const auto p = rlsp::testing::four_state_problem();
  const Eigen::VectorXd exact = exact_state_gradient(p.mdp, p.features, p.theta, p.s0, p.T, false);
  Rng rng = make_stream(2, 0);
  const auto est = tabular_estimate(p, 10000, rng);
  for (int i = 0; i < exact.size(); ++i) EXPECT_LE(std::abs(est.gradient(i) - exact(i)), 3 * est.std_error(i)) << i;
}

TEST(ComputeGrad, StandardErrorShrinksAsRootN) {
  const auto p = rlsp::testing::four_state_problem();
  Rng rng = make_stream(3, 0);
  std::vector<double> xs, ys;
  for (int n : {100, 1000, 10000}) {
    xs.push_back(std::log(n));
    ys.push_back(std::log(tabular_estimate(p, n, rng).std_error.norm()));
  }
  const double slope = ((ys[2] - ys[0]) / (xs[2] - xs[0]));
  EXPECT_NEAR(slope, -0.5, 0.1);
}

TEST(ComputeGrad, StayOnlyDynamicsGiveZero) {
  TabularMdp m(3, 1, 4);
  for (int s = 0; s < 3; ++s) m.set_row(s, 0, {{s, 1.0}});
  m.set_initial_dist(Eigen::Vector3d(0.2, 0.5, 0.3));
  const FeatureMap f((Eigen::MatrixXd(3, 2) << 1, 0, 0, 1, 1, 1).finished());
  TabularLearner learner(m, f);
  Rng rng = make_stream(4, 0);
  learner.refresh_policy(Eigen::Vector2d(0.4, -0.2), 4, rng);
  const auto est = compute_grad(learner, ObservedStateSet<int>{{1, 2}, {}}, 4, 50, rng);
  EXPECT_EQ(est.gradient.norm(), 0.0);
  EXPECT_EQ(est.per_trajectory.rows(), 100);
}

TEST(ComputeGrad, PenalizesSideEffectsAbsentFromThePast) {
  // state 0 intact, state 1 broken; action 1 breaks. The observed state is intact.
  TabularMdp m(2, 2, 3);
  m.set_row(0, 0, {{0, 1.0}});
  m.set_row(0, 1, {{1, 1.0}});
  m.set_row(1, 0, {{1, 1.0}});
  m.set_row(1, 1, {{1, 1.0}});
  m.set_initial_dist(Eigen::Vector2d(1, 0));
  const FeatureMap f((Eigen::MatrixXd(2, 1) << 0, 1).finished());
  TabularLearner learner(m, f);
  Rng rng = make_stream(5, 0);
  learner.refresh_policy(Eigen::VectorXd::Ones(1), 3, rng);
  const auto est = compute_grad(learner, ObservedStateSet<int>{{0}, {}}, 3, 200, rng);
  EXPECT_LT(est.gradient(0), 0.0);
}

TEST(ComputeGrad, Errors) {
  const auto p = rlsp::testing::four_state_problem();
  TabularLearner learner(p.mdp, p.features);
  Rng rng = make_stream(6, 0);
  ObservedStateSet<int> obs{{p.s0}, {}};
  EXPECT_THROW(compute_grad(learner, obs, 2, 10, rng), StateError);
  learner.refresh_policy(p.theta.weights, p.T, rng);
  EXPECT_THROW(compute_grad(learner, obs, 0, 10, rng), ArgumentError);
  EXPECT_THROW(compute_grad(learner, obs, 2, 0, rng), ArgumentError);
  EXPECT_THROW(compute_grad(learner, ObservedStateSet<int>{}, 2, 10, rng), ArgumentError);
  EXPECT_THROW(learner.refresh_policy(p.theta.weights, p.T + 1, rng), ArgumentError);
}

TEST(ComputeGrad, RelabelsIntoReplay) {
  const auto p = rlsp::testing::four_state_problem();
  TabularLearner learner(p.mdp, p.features);
  Rng rng = make_stream(7, 0);
  learner.refresh_policy(p.theta.weights, p.T, rng);
  ReplayBuffer<int, int> replay(1000);
  compute_grad(learner, ObservedStateSet<int>{{p.s0}, {}}, p.T, 20, rng, &replay);
  EXPECT_EQ(replay.size(), 2u * 20 * p.T);
  for (const auto& tr : replay.items()) EXPECT_TRUE(learner.replays(tr));
}

TEST(WeightByPrior, AllAlignedEqualsMean) {
  Eigen::MatrixXd g(3, 2);
  g << 1, 2, 3, 4, 5, 9;
  const Eigen::Vector2d prior(1.0, 2.0);
  const std::vector<Eigen::VectorXd> term(3, Eigen::VectorXd(prior * 3.0));
  EXPECT_TRUE(weight_by_prior(g, term, prior).isApprox(g.colwise().mean().transpose()));
}

TEST(WeightByPrior, OrthogonalAndZeroStatesExcluded) {
  Eigen::MatrixXd g(3, 1);
  g << 1, 100, 1000;
  const std::vector<Eigen::VectorXd> term{Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1), Eigen::Vector2d(0, 0)};
  EXPECT_DOUBLE_EQ(weight_by_prior(g, term, Eigen::Vector2d(1, 0))(0), 1.0);
  EXPECT_THROW(weight_by_prior(g, {term[0]}, Eigen::Vector2d(1, 0)), ArgumentError);
}

TEST(Ablations, AverageFeatures) {
  const Eigen::MatrixXd one = (Eigen::MatrixXd(1, 3) << 3, 0, 4).finished();
  EXPECT_TRUE(average_features_reward(one).weights.isApprox(Eigen::Vector3d(0.6, 0, 0.8)));
  const Eigen::MatrixXd opposite = (Eigen::MatrixXd(2, 2) << 1, -1, -1, 1).finished();
  EXPECT_THROW(average_features_reward(opposite), NumericalError);
  const auto c = build_gridworld(CaseName::room_vase);
  const auto theta = average_features_reward(c.features.row(c.observed_state));
  EXPECT_EQ(theta.weights(c.features.index_of("broken_vases")), 0.0);
}

TEST(Ablations, Waypoints) {
  const Eigen::MatrixXd pts = (Eigen::MatrixXd(3, 2) << 3, 4, 0, 2, 0, 0).finished();
  const WaypointsReward w(pts);
  EXPECT_EQ(w.size(), 2u);
  EXPECT_DOUBLE_EQ(w(Eigen::Vector2d(3, 4)), 5.0);
  const WaypointsReward flipped((Eigen::MatrixXd(2, 2) << 0, 2, 3, 4).finished());
  Rng rng = make_stream(8, 0);
  for (int i = 0; i < 20; ++i) {
    const Eigen::Vector2d phi(standard_normal(rng), standard_normal(rng));
    EXPECT_EQ(w(phi), flipped(phi));
  }
  const WaypointsReward single(pts.topRows(1));
  const auto af = average_features_reward(pts.topRows(1));
  for (int i = 0; i < 20; ++i) {
    const Eigen::Vector2d phi(standard_normal(rng), standard_normal(rng));
    EXPECT_NEAR(single(phi), af.weights.dot(phi), 1e-12);
  }
  EXPECT_THROW(WaypointsReward(Eigen::MatrixXd::Zero(2, 2)), ArgumentError);
}

TEST(DeepRlsp, ConfigValidation) {
  DeepRlspConfig cfg;
  cfg.num_traj = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.audit_fraction = 1.5;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(DeepRlsp, EpochLogFollowsCurriculumAndAuditsPass) {
  const auto c = build_gridworld(CaseName::room_vase);
  GridworldDeepConfig g;
  g.deep.grad_norm_threshold = 2.0;  // the stock rule
  std::vector<EpochRecord> log;
  const auto out = run_gridworld_deep(c, 0, g, &log);
  ASSERT_FALSE(log.empty());
  for (std::size_t i = 1; i < log.size(); ++i) {
    const auto& prev = log[i - 1];
    const bool advance = prev.grad_norm < 2.0 || prev.steps_at_T >= 10;
    EXPECT_EQ(log[i].horizon_T, advance ? prev.horizon_T + 1 : prev.horizon_T);
  }
  EXPECT_EQ(log.back().horizon_T, c.mdp.horizon());
  for (const auto& r : log) EXPECT_NEAR(r.theta.norm(), 1.0, 1e-9);
  EXPECT_EQ(out.epochs, static_cast<int>(log.size()));
}

TEST(DeepRlsp, ConstantFeaturesLeaveThetaAtInit) {
  auto p = rlsp::testing::four_state_problem();
  const FeatureMap flat(Eigen::MatrixXd::Ones(4, 2));
  TabularLearner learner(p.mdp, flat);
  ReplayBuffer<int, int> replay(100);
  DeepRlspConfig cfg;
  cfg.max_T = p.T;
  cfg.num_traj = 20;
  cfg.initial_theta = Eigen::Vector2d(0.6, 0.8);
  Rng rng = make_stream(9, 0);
  const auto res = run_deep_rlsp(learner, ObservedStateSet<int>{{p.s0}, {}}, replay, cfg, 2, rng);
  EXPECT_TRUE(res.theta.weights.isApprox(Eigen::Vector2d(0.6, 0.8), 1e-12));
  EXPECT_EQ(res.audited, res.audit_passed);
  EXPECT_GT(res.audited, 0u);
}

TEST(DeepRlsp, EpochLogCsv) {
  EpochRecord r;
  r.theta = Eigen::Vector2d(0.5, -0.5);
  std::ostringstream out;
  write_epoch_log(out, {r});
  EXPECT_EQ(out.str(), "epoch,T,steps_at_T,grad_norm,eval_return,theta_0,theta_1\n0,1,0,0,,0.5,-0.5\n");
}

TEST(TabularLearner, StationaryModesAreUsable) {
  const auto c = build_gridworld(CaseName::room_vase);
  for (auto mode : {TabularInverse::uniform_prior, TabularInverse::replay_prior}) {
    TabularLearner learner(c.mdp, c.features, mode);
    ReplayBuffer<int, int> replay(1000);
    Rng rng = make_stream(10, 0);
    fill_tabular_replay(c.mdp, c.true_initial_state, 5, 10, replay, rng);
    learner.refresh_policy(Eigen::Vector3d(0, 1, 0), 3, rng);
    EXPECT_FALSE(learner.ready());
    learner.refresh_inverse(replay, rng);
    ASSERT_TRUE(learner.ready());
    const auto est = compute_grad(learner, ObservedStateSet<int>{{c.observed_state}, {}}, 3, 10, rng);
    EXPECT_TRUE(est.gradient.allFinite());
  }
}

TEST(GridworldParity, RoomVaseMatchesExact) {
  const auto c = build_gridworld(CaseName::room_vase);
  const auto deep = run_gridworld_deep(c, 0, GridworldDeepConfig{});
  EXPECT_EQ(deep.label, run_gridworld_exact(c).label);
  EXPECT_EQ(deep.label, c.desired_label);
  EXPECT_LT(deep.theta.weights(c.features.index_of("broken_vases")), 0.0);
}
