// rlsp: command-line front end for the experiment harness.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rlsp/checkpoint.hpp"
#include "rlsp/harness.hpp"

namespace {

using namespace rlsp;

constexpr const char* kSeedEnv = "RLSP_SEED";

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    std::size_t used = 0;
    const unsigned long long v = std::stoull(tok, &used);
    if (used != tok.size()) throw ConfigError("bad seed '" + tok + "'");
    out.push_back(v);
  }
  return out;
}

/// RLSP_SEED, when set, replaces every seed given on the command line or in a config file.
std::vector<std::uint64_t> seed_override(std::vector<std::uint64_t> seeds) {
  if (const char* env = std::getenv(kSeedEnv); env && *env) return parse_seed_list(env);
  return seeds;
}

std::uint64_t single_seed(std::uint64_t seed) {
  const auto s = seed_override({seed});
  if (s.size() != 1) throw ConfigError(std::string(kSeedEnv) + " must be a single seed for this command");
  return s.front();
}

StochasticController named_controller(const std::string& name, const ContinuousEnv& env) {
  const int ad = env.action_dim();
  if (name == "random") return [ad](const Eigen::VectorXd&, Rng& rng) { return RandomPolicy{ad}.act(Eigen::VectorXd(), rng); };
  if (name == "forward") return [ad](const Eigen::VectorXd&, Rng&) { return scripted::full_throttle(ad, 1.0); };
  if (name == "reverse") return [ad](const Eigen::VectorXd&, Rng&) { return scripted::full_throttle(ad, -1.0); };
  if (name == "balancer") {
    if (!env.is_pendulum_class()) throw ConfigError("balancer policy is pendulum-only");
    return [](const Eigen::VectorXd& s, Rng&) { return scripted::pendulum_balancer(s); };
  }
  throw ConfigError("unknown policy '" + name + "' (random, forward, reverse, balancer)");
}

void print_report(const RunReport& r) {
  std::printf("%s %s states=%d profile=%s\n", r.config.env.c_str(), r.config.method.c_str(), r.config.num_observed_states,
              r.config.profile.c_str());
  for (const auto& s : r.seeds) {
    if (!s.ok) {
      std::printf("  seed %llu FAILED: %s\n", static_cast<unsigned long long>(s.seed), s.error.c_str());
      continue;
    }
    std::printf("  seed %llu return %.2f (%.2f)", static_cast<unsigned long long>(s.seed), s.return_mean, s.return_std_error);
    if (!s.label.empty()) std::printf(" label %s", s.label.c_str());
    if (std::isfinite(s.expert_return)) std::printf(" expert %.2f random %.2f", s.expert_return, s.random_return);
    std::printf("\n");
  }
  std::printf("  mean %.2f (%.2f)%s\n", r.mean, r.std_error, r.partial ? " [partial]" : "");
  for (const auto& a : r.artifacts) std::printf("  wrote %s\n", a.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reward learning by simulating the past: exact RLSP, Deep RLSP and ablations.\n"
               "Environment: RLSP_SEED overrides every seed (comma list for run, single value elsewhere)."};
  app.require_subcommand(1);

  // gridworld-parity
  auto* parity = app.add_subcommand("gridworld-parity", "Exact RLSP vs Deep RLSP vs AverageFeatures on the five gridworlds");
  std::uint64_t parity_seed = 0;
  std::string parity_out;
  parity->add_option("--seed", parity_seed, "Seed for Deep RLSP sampling")->capture_default_str();
  parity->add_option("--out", parity_out, "Directory for parity.csv");

  // run
  auto* run = app.add_subcommand("run", "Run one experiment configuration over seeds");
  std::string config_path, seeds_text;
  ExperimentConfig cli_cfg;
  run->add_option("--config", config_path, "JSON file mirroring ExperimentConfig; flags override it");
  auto* o_env = run->add_option("--env", cli_cfg.env, "Environment: pendulum, runner_forward, runner_backward, "
                                                      "hopper_lite_terminate, hopper_lite_penalty, or a gridworld case");
  auto* o_method = run->add_option("--method", cli_cfg.method, "rlsp_exact, deep_rlsp, average_features, waypoints");
  auto* o_states = run->add_option("--states", cli_cfg.num_observed_states, "Number of observed expert states (1, 10, 50)");
  auto* o_seeds = run->add_option("--seeds", seeds_text, "Comma-separated seeds (default 0,1,2)");
  auto* o_profile = run->add_option("--profile", cli_cfg.profile, "desk or paper");
  auto* o_out = run->add_option("--out", cli_cfg.output_dir, "Output directory for reports, logs and checkpoints");
  auto* o_pw = run->add_flag("--prior-weighting", cli_cfg.prior_weighting, "Cosine prior weighting of per-trajectory gradients");
  auto* o_budget = run->add_option("--policy-budget", cli_cfg.policy_budget, "In-loop soft Q steps (0: profile default)");
  auto* o_eval = run->add_option("--eval-episodes", cli_cfg.eval_episodes, "Episodes per final evaluation");
  auto* o_threads = run->add_option("--threads", cli_cfg.threads, "Seeds run concurrently");

  // discriminate
  auto* disc = app.add_subcommand("discriminate", "Discriminator similarity curves between two scripted policies");
  std::string disc_env = "runner_forward", pol_a = "forward", pol_b = "reverse", disc_out;
  std::uint64_t disc_seed = 0;
  DiscriminatorConfig dcfg;
  disc->add_option("--env", disc_env, "Continuous environment")->capture_default_str();
  disc->add_option("--policy-a", pol_a, "random, forward, reverse, balancer")->capture_default_str();
  disc->add_option("--policy-b", pol_b, "random, forward, reverse, balancer")->capture_default_str();
  disc->add_option("--seeds", dcfg.num_seeds, "Classifier seeds to average")->capture_default_str();
  disc->add_option("--steps", dcfg.train_steps, "Training steps")->capture_default_str();
  disc->add_option("--seed", disc_seed, "Base seed")->capture_default_str();
  disc->add_option("--out", disc_out, "CSV file for the curves (default: stdout)");

  // collect-data
  auto* collect = app.add_subcommand("collect-data", "Collect an interaction dataset");
  std::string col_env = "pendulum", col_policy = "random", col_out;
  int col_rollouts = 200, col_len = 100;
  std::uint64_t col_seed = 0;
  collect->add_option("--env", col_env, "Continuous environment")->capture_default_str();
  collect->add_option("--policy", col_policy, "random, balancer-mix (pendulum) or expert-mix (trains a soft Q expert)")
      ->capture_default_str();
  collect->add_option("--rollouts", col_rollouts, "Number of rollouts")->capture_default_str();
  collect->add_option("--length", col_len, "Steps per rollout")->capture_default_str();
  collect->add_option("--seed", col_seed, "Seed")->capture_default_str();
  collect->add_option("--out", col_out, "Dataset file")->required();

  // train-models
  auto* train = app.add_subcommand("train-models", "Train the encoder and inverse dynamics on a dataset");
  std::string tr_data, tr_out;
  std::uint64_t tr_seed = 0;
  std::string tr_profile = "desk";
  train->add_option("--data", tr_data, "Dataset file from collect-data")->required();
  train->add_option("--out", tr_out, "Directory for encoder.ckpt and inverse_dynamics.ckpt")->required();
  train->add_option("--profile", tr_profile, "desk or paper")->capture_default_str();
  train->add_option("--seed", tr_seed, "Seed")->capture_default_str();

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate a scripted policy, or optimize and evaluate a learned reward");
  std::string ev_env = "pendulum", ev_policy = "random", ev_theta, ev_encoder;
  int ev_episodes = 10, ev_budget = 20000;
  std::uint64_t ev_seed = 0;
  eval->add_option("--env", ev_env, "Continuous environment")->capture_default_str();
  eval->add_option("--policy", ev_policy, "Scripted policy when no reward is given")->capture_default_str();
  eval->add_option("--theta", ev_theta, "Reward weights checkpoint (needs --encoder)");
  eval->add_option("--encoder", ev_encoder, "Encoder checkpoint");
  eval->add_option("--budget", ev_budget, "Soft Q steps when optimizing a reward")->capture_default_str();
  eval->add_option("--episodes", ev_episodes, "Evaluation episodes")->capture_default_str();
  eval->add_option("--seed", ev_seed, "Seed")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (parity->parsed()) {
      const auto rows = gridworld_parity_suite(single_seed(parity_seed));
      bool all = true;
      std::printf("%-10s %-18s %-18s %-18s %s\n", "case", "exact", "deep_rlsp", "average_features", "pass");
      for (const auto& r : rows) {
        std::printf("%-10s %-18s %-18s %-18s %s\n", r.case_name.c_str(), r.exact_label.c_str(), r.deep_label.c_str(),
                    r.average_features_label.c_str(), r.pass ? "yes" : "NO");
        all = all && r.pass;
      }
      if (!parity_out.empty()) {
        std::filesystem::create_directories(parity_out);
        std::ofstream out(std::filesystem::path(parity_out) / "parity.csv");
        out << "case,exact,deep_rlsp,average_features,desired,pass\n";
        for (const auto& r : rows)
          out << r.case_name << ',' << r.exact_label << ',' << r.deep_label << ',' << r.average_features_label << ','
              << r.desired_label << ',' << (r.pass ? 1 : 0) << '\n';
      }
      return all ? 0 : 1;
    }

    if (run->parsed()) {
      ExperimentConfig cfg;
      if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw ConfigError("cannot open config '" + config_path + "'");
        cfg = ExperimentConfig::from_json(nlohmann::json::parse(in));
      }
      if (o_env->count()) cfg.env = cli_cfg.env;
      if (o_method->count()) cfg.method = cli_cfg.method;
      if (o_states->count()) cfg.num_observed_states = cli_cfg.num_observed_states;
      if (o_seeds->count()) cfg.seeds = parse_seed_list(seeds_text);
      if (o_profile->count()) cfg.profile = cli_cfg.profile;
      if (o_out->count()) cfg.output_dir = cli_cfg.output_dir;
      if (o_pw->count()) cfg.prior_weighting = true;
      if (o_budget->count()) cfg.policy_budget = cli_cfg.policy_budget;
      if (o_eval->count()) cfg.eval_episodes = cli_cfg.eval_episodes;
      if (o_threads->count()) cfg.threads = cli_cfg.threads;
      cfg.seeds = seed_override(cfg.seeds);
      const RunReport r = run_experiment(cfg);
      print_report(r);
      return r.partial ? 2 : 0;
    }

    if (disc->parsed()) {
      const ContinuousEnv env = make_env(disc_env);
      const auto curves = discriminator_similarity(named_controller(pol_a, env), named_controller(pol_b, env), env, dcfg,
                                                   single_seed(disc_seed));
      if (disc_out.empty()) {
        write_curves_csv(std::cout, curves);
      } else {
        std::ofstream out(disc_out);
        if (!out) throw ConfigError("cannot write '" + disc_out + "'");
        write_curves_csv(out, curves);
        std::printf("final mean accuracy %.3f; wrote %s\n", curves.mean.back(), disc_out.c_str());
      }
      return 0;
    }

    if (collect->parsed()) {
      const ContinuousEnv env = make_env(col_env);
      Rng rng = make_stream(single_seed(col_seed), 13);
      const RandomPolicy random{env.action_dim()};
      InteractionDataset d;
      if (col_policy == "random") {
        d = collect_dataset(env, random, col_rollouts, col_len, rng);
      } else if (col_policy == "balancer-mix") {
        if (!env.is_pendulum_class()) throw ConfigError("balancer-mix is pendulum-only");
        d = collect_mixed_dataset(env, random, FunctionPolicy{scripted::pendulum_balancer}, col_rollouts, col_len, rng);
      } else if (col_policy == "expert-mix") {
        const ContinuousProfile p = continuous_profile("desk", env);
        SoftQConfig ec = p.expert;
        ec.seed = rng();
        const MaxEntPolicy expert = optimize_policy(env, true_state_reward(env), ec, rng);
        d = collect_mixed_dataset(env, random, expert, col_rollouts, col_len, rng);
      } else {
        throw ConfigError("unknown dataset policy '" + col_policy + "'");
      }
      std::ofstream out(col_out);
      if (!out) throw ConfigError("cannot write '" + col_out + "'");
      d.write(out);
      std::printf("wrote %zu transitions to %s\n", d.size(), col_out.c_str());
      return 0;
    }

    if (train->parsed()) {
      std::ifstream in(tr_data);
      if (!in) throw ConfigError("cannot open dataset '" + tr_data + "'");
      const InteractionDataset d = InteractionDataset::read(in);
      if (tr_profile != "desk" && tr_profile != "paper") throw ConfigError("profile must be desk or paper");
      const std::uint64_t seed = single_seed(tr_seed);
      // Profiles only depend on the env through budgets, so any env with the right shape works here.
      const ContinuousProfile p = continuous_profile(tr_profile, ContinuousEnv());
      ApproximatorConfig ec = p.encoder;
      ec.seed = make_stream(seed, 14)();
      const EncoderDecoder enc = train_encoder(d.states(), ec, p.latent_dim, p.kl_weight);
      InverseDynamicsConfig ic = p.inverse_dynamics;
      ic.net.seed = make_stream(seed, 15)();
      const InverseDynamics idyn = train_inverse_dynamics(d, ic);
      std::filesystem::create_directories(tr_out);
      const auto dir = std::filesystem::path(tr_out);
      ckpt::save_file((dir / "encoder.ckpt").string(), enc);
      ckpt::save_file((dir / "inverse_dynamics.ckpt").string(), idyn);
      std::printf("encoder reconstruction %.5f, inverse dynamics loss %.5f; wrote %s\n", enc.train_recon_loss,
                  idyn.model.train_loss, tr_out.c_str());
      return 0;
    }

    if (eval->parsed()) {
      const ContinuousEnv env = make_env(ev_env);
      Rng rng = make_stream(single_seed(ev_seed), 21);
      EvalReport rep;
      if (!ev_theta.empty()) {
        if (ev_encoder.empty()) throw ConfigError("--theta needs --encoder");
        const auto enc = std::make_shared<EncoderDecoder>(ckpt::load_file<EncoderDecoder>(ev_encoder));
        const Eigen::VectorXd theta = ckpt::load_file<Eigen::VectorXd>(ev_theta);
        if (theta.size() != enc->latent_dim) throw ConfigError("theta and encoder dimensions differ");
        if (enc->state_dim() != env.state_dim()) throw ConfigError("encoder was trained on another environment");
        SoftQConfig qc;
        qc.budget = ev_budget;
        qc.seed = rng();
        const MaxEntPolicy pol =
            optimize_policy(env, [enc, theta](const Eigen::VectorXd& s) { return theta.dot(enc->encode(s)); }, qc, rng);
        rep = evaluate_policy(env, pol, ev_episodes, rng);
      } else {
        const StochasticController c = named_controller(ev_policy, env);
        struct Wrap {
          StochasticController c;
          Eigen::VectorXd act(const Eigen::VectorXd& s, Rng& r) const { return c(s, r); }
        };
        rep = evaluate_policy(env, Wrap{c}, ev_episodes, rng);
      }
      std::printf("%s true return %.3f (%.3f) over %d episodes\n", ev_env.c_str(), rep.mean, rep.std_error, ev_episodes);
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
