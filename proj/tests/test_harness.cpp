#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "rlsp/harness.hpp"

using namespace rlsp;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunReport sample_report() {
  RunReport r;
  r.config.env = "pendulum";
  r.config.seeds = {3, 4};
  SeedResult a;
  a.seed = 3;
  a.return_mean = 101.25;
  a.return_std_error = 0.1;
  a.theta = {0.6, -0.8, 1e-17};
  a.epochs = 12;
  a.expert_return = 190.0;
  SeedResult b;
  b.seed = 4;
  b.ok = false;
  b.error = "diverged, \"badly\"";
  r.seeds = {a, b};
  r.summarize();
  return r;
}

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("rlsp_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST(ExperimentConfig, JsonRoundTrip) {
  ExperimentConfig c;
  c.env = "runner_backward";
  c.method = "average_features";
  c.seeds = {7, 8};
  c.prior_weighting = true;
  c.threads = 2;
  const auto back = ExperimentConfig::from_json(nlohmann::json::parse(c.to_json().dump()));
  EXPECT_EQ(back.to_json(), c.to_json());
}

TEST(ExperimentConfig, RejectsBadInput) {
  EXPECT_THROW(ExperimentConfig::from_json({{"num_states", 3}}), ConfigError);
  ExperimentConfig c;
  c.env = "no_such_env";
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.method = "rlsp_exact";
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.env = "room_vase";
  EXPECT_THROW(c.validate(), ConfigError);  // gridworlds have one observed state
  c.num_observed_states = 1;
  EXPECT_NO_THROW(c.validate());
  c.profile = "laptop";
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Reports, CsvRoundTrip) {
  const auto r = sample_report();
  std::stringstream ss;
  write_report_csv(ss, r);
  const auto seeds = read_report_csv(ss);
  ASSERT_EQ(seeds.size(), 2u);
  EXPECT_EQ(seeds[0].theta, r.seeds[0].theta);
  EXPECT_EQ(seeds[0].return_mean, 101.25);
  EXPECT_EQ(seeds[0].epochs, 12);
  EXPECT_TRUE(std::isnan(seeds[0].random_return));
  EXPECT_FALSE(seeds[1].ok);
  EXPECT_EQ(seeds[1].error, r.seeds[1].error);
}

TEST(Reports, JsonlRoundTrip) {
  const auto r = sample_report();
  std::stringstream ss;
  write_report_jsonl(ss, r);
  const auto back = read_report_jsonl(ss);
  EXPECT_TRUE(back.partial);
  EXPECT_EQ(back.mean, r.mean);
  EXPECT_EQ(back.config.to_json(), r.config.to_json());
  ASSERT_EQ(back.seeds.size(), 2u);
  EXPECT_EQ(back.seeds[0].theta, r.seeds[0].theta);
  EXPECT_EQ(back.seeds[1].error, r.seeds[1].error);
}

TEST(Reports, EmptyRunIsHeaderOnly) {
  RunReport r;
  r.config.seeds.clear();
  std::ostringstream out;
  write_report_csv(out, r);
  const std::string text = out.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1);
  std::istringstream in(text);
  EXPECT_TRUE(read_report_csv(in).empty());
  std::istringstream junk("theta\n1\n");
  EXPECT_THROW(read_report_csv(junk), ConfigError);
  EXPECT_THROW(export_report(r, "xml", "/tmp"), ConfigError);
}

TEST(RunExperiment, GridworldExportsAreReproducible) {
  ExperimentConfig c;
  c.env = "room_vase";
  c.method = "deep_rlsp";
  c.num_observed_states = 1;
  c.seeds = {0, 1};
  std::string csv[2];
  for (int k = 0; k < 2; ++k) {
    const auto dir = scratch_dir("repro" + std::to_string(k));
    c.output_dir = dir.string();
    const auto r = run_experiment(c);
    ASSERT_FALSE(r.partial);
    for (const auto& s : r.seeds) EXPECT_EQ(s.label, "avoids-vase");
    csv[k] = slurp((dir / "report.csv").string());
    EXPECT_TRUE(std::filesystem::exists(dir / "room_vase_deep_rlsp_seed0_lambda.csv"));
  }
  EXPECT_EQ(csv[0], csv[1]);
}

TEST(RunExperiment, ThreadCountDoesNotChangeResults) {
  ExperimentConfig c;
  c.env = "toy_train";
  c.method = "deep_rlsp";
  c.num_observed_states = 1;
  c.seeds = {0, 1, 2};
  std::ostringstream one, three;
  write_report_csv(one, run_experiment(c));
  c.threads = 3;
  write_report_csv(three, run_experiment(c));
  EXPECT_EQ(one.str(), three.str());
}

TEST(RunExperiment, FailedSeedMarksPartial) {
  ExperimentConfig c;
  c.env = "batteries";
  c.method = "deep_rlsp";
  c.num_observed_states = 1;
  c.prior_weighting = true;  // rejected per seed on gridworlds
  c.seeds = {0};
  const auto r = run_experiment(c);
  EXPECT_TRUE(r.partial);
  EXPECT_FALSE(r.seeds[0].ok);
  EXPECT_NE(r.seeds[0].error.find("prior weighting"), std::string::npos);
}

TEST(Parity, ExactAndAverageFeaturesLabels) {
  for (const auto& row : gridworld_parity_suite()) {
    EXPECT_EQ(row.exact_label, row.desired_label) << row.case_name;
    EXPECT_TRUE(row.pass) << row.case_name << ": deep " << row.deep_label << " exact " << row.exact_label;
  }
}

TEST(Discriminator, CurvesShapeAndCsv) {
  const auto env = make_env("runner_forward");
  DiscriminatorConfig cfg;
  cfg.num_seeds = 2;
  cfg.train_steps = 20;
  cfg.episodes_per_policy = 2;
  const StochasticController fwd = [](const Eigen::VectorXd&, Rng&) { return Eigen::VectorXd::Ones(1); };
  const StochasticController rev = [](const Eigen::VectorXd&, Rng&) { return Eigen::VectorXd::Constant(1, -1.0); };
  const auto curves = discriminator_similarity(fwd, rev, env, cfg);
  ASSERT_EQ(curves.steps.size(), 3u);
  ASSERT_EQ(curves.per_seed.size(), 2u);
  for (double m : curves.mean) EXPECT_TRUE(m >= 0.0 && m <= 1.0);
  std::ostringstream out;
  write_curves_csv(out, curves);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "step,mean,seed_0,seed_1");
  const auto again = discriminator_similarity(fwd, rev, env, cfg);
  EXPECT_EQ(again.mean, curves.mean);
}

TEST(Profiles, PaperIsLargerThanDesk) {
  const auto env = make_env("pendulum");
  const auto desk = continuous_profile("desk", env), paper = continuous_profile("paper", env);
  EXPECT_GT(paper.data_rollouts, desk.data_rollouts);
  EXPECT_GT(paper.in_loop.budget, desk.in_loop.budget);
  EXPECT_EQ(paper.latent_dim, 30);
}
