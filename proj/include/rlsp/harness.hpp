#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <future>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "rlsp/checkpoint.hpp"
#include "rlsp/continuous_env.hpp"
#include "rlsp/deep_rlsp.hpp"
#include "rlsp/error.hpp"
#include "rlsp/gridworld.hpp"
#include "rlsp/random.hpp"
#include "rlsp/rlsp_exact.hpp"
#include "rlsp/soft_q.hpp"
#include "rlsp/vae.hpp"
#include "rlsp/world_models.hpp"

namespace rlsp {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

inline const std::vector<std::string>& method_names() {
  static const std::vector<std::string> names{"rlsp_exact", "deep_rlsp", "average_features", "waypoints"};
  return names;
}

inline bool is_gridworld_name(const std::string& name) {
  for (const auto& n : case_names())
    if (n == name) return true;
  return false;
}

struct ExperimentConfig {
  std::string env = "pendulum";
  std::string method = "deep_rlsp";
  int num_observed_states = 10;
  std::vector<std::uint64_t> seeds{0, 1, 2};
  std::string profile = "desk";
  std::string output_dir;  // empty: nothing written
  bool prior_weighting = false;
  int policy_budget = 0;  // in-loop soft Q steps; 0 = profile default
  int eval_episodes = 10;
  int threads = 1;  // seeds run concurrently in batches of this size

  void validate() const {
    const bool grid = is_gridworld_name(env);
    if (!grid && !is_env_name(env)) throw ConfigError("unknown env '" + env + "'");
    if (std::find(method_names().begin(), method_names().end(), method) == method_names().end())
      throw ConfigError("unknown method '" + method + "'");
    if (method == "rlsp_exact" && !grid) throw ConfigError("rlsp_exact requires a tabular (gridworld) env");
    if (num_observed_states < 1) throw ConfigError("num_observed_states must be >= 1");
    if (grid && num_observed_states != 1) throw ConfigError("gridworld cases have exactly one observed state");
    if (profile != "desk" && profile != "paper") throw ConfigError("profile must be desk or paper");
    if (policy_budget < 0) throw ConfigError("policy_budget must be >= 0");
    if (eval_episodes < 1) throw ConfigError("eval_episodes must be >= 1");
    if (threads < 1) throw ConfigError("threads must be >= 1");
  }

  nlohmann::json to_json() const {
    return {{"env", env},         {"method", method},     {"num_observed_states", num_observed_states},
            {"seeds", seeds},     {"profile", profile},   {"output_dir", output_dir},
            {"prior_weighting", prior_weighting}, {"policy_budget", policy_budget}, {"eval_episodes", eval_episodes},
            {"threads", threads}};
  }

  /// Unknown keys are rejected so typos do not silently fall back to defaults.
  static ExperimentConfig from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    for (const auto& [key, value] : j.items()) {
      if (key == "env") c.env = value.get<std::string>();
      else if (key == "method") c.method = value.get<std::string>();
      else if (key == "num_observed_states") c.num_observed_states = value.get<int>();
      else if (key == "seeds") c.seeds = value.get<std::vector<std::uint64_t>>();
      else if (key == "profile") c.profile = value.get<std::string>();
      else if (key == "output_dir") c.output_dir = value.get<std::string>();
      else if (key == "prior_weighting") c.prior_weighting = value.get<bool>();
      else if (key == "policy_budget") c.policy_budget = value.get<int>();
      else if (key == "eval_episodes") c.eval_episodes = value.get<int>();
      else if (key == "threads") c.threads = value.get<int>();
      else throw ConfigError("unknown config key '" + key + "'");
    }
    return c;
  }
};

/// Everything a continuous run needs besides the method itself.
struct ContinuousProfile {
  int data_rollouts = 200;
  int data_len = 100;
  ApproximatorConfig encoder{{128, 128}, Activation::relu, 3e-3, 0.9, 64, 10, 0, true, 1.0};
  int latent_dim = 8;
  double kl_weight = 0.001;
  InverseDynamicsConfig inverse_dynamics;
  InversePolicyConfig inverse_policy;
  SoftQConfig expert;
  SoftQConfig in_loop;
  int reopt_multiplier = 10;
  double reopt_reward_scale = 10.0;  // the final policy should exploit the reward, not model a human
  DeepRlspConfig deep;
  int expert_episodes = 10;  // rollouts used to sample observed states
  int burn_in = 10;
  int random_episodes = 50;
};

inline ContinuousProfile continuous_profile(const std::string& profile, const ContinuousEnv& env) {
  ContinuousProfile p;
  p.expert.budget = env.is_pendulum_class() ? 20000 : (env.action_dim() > 1 ? 30000 : 10000);
  if (env.is_pendulum_class()) p.expert.reward_scale = 50.0;  // a sharper expert wobbles less
  p.in_loop.budget = 2000;
  // RLSP models the past policy as Boltzmann-rational at temperature 1 for r = theta . phi; a larger
  // scale makes the forward rollouts near-greedy and the gradient compares against the wrong model.
  p.in_loop.reward_scale = 1.0;
  if (profile == "paper") {
    p.data_rollouts = 1000;
    p.encoder = {{512, 512, 512}, Activation::relu, 1e-5, 0.9, 500, 100, 0, true, 1.0};
    p.latent_dim = 30;
    p.inverse_dynamics.net = {{1024, 1024, 1024, 1024, 1024}, Activation::relu, 1e-5, 0.9, 500, 100, 0, true, 10.0};
    p.inverse_policy.net = {{512, 512, 512}, Activation::relu, 1e-4, 0.9, 500, 10, 0, true, 10.0};
    // Per policy update: pendulum 5e4 (re-initialized), hopper 2e4, cheetah-like 1e4.
    p.in_loop.budget = env.is_pendulum_class() ? 50000 : (env.action_dim() > 1 ? 20000 : 10000);
  }
  return p;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct SeedResult {
  std::uint64_t seed = 0;
  bool ok = true;
  std::string error;
  double return_mean = 0.0;
  double return_std_error = 0.0;
  std::string label;  // gridworld behavior label
  std::vector<double> theta;
  int epochs = 0;
  double expert_return = std::numeric_limits<double>::quiet_NaN();
  double random_return = std::numeric_limits<double>::quiet_NaN();
};

inline constexpr int kReportSchemaVersion = 1;

struct RunReport {
  ExperimentConfig config;
  std::vector<SeedResult> seeds;
  double mean = 0.0;
  double std_error = 0.0;  // over seeds
  bool partial = false;
  std::vector<std::string> artifacts;

  void summarize() {
    std::vector<double> r;
    partial = false;
    for (const auto& s : seeds) {
      if (s.ok) r.push_back(s.return_mean);
      else partial = true;
    }
    const EvalReport e = summarize_returns(r);
    mean = e.mean;
    std_error = e.std_error;
  }

  double mean_of(double SeedResult::*field) const {
    double acc = 0.0;
    int n = 0;
    for (const auto& s : seeds)
      if (s.ok && std::isfinite(s.*field)) {
        acc += s.*field;
        ++n;
      }
    return n ? acc / n : std::numeric_limits<double>::quiet_NaN();
  }
};

namespace detail {

inline std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  return std::strtod(s.c_str(), nullptr);
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

inline std::vector<std::string> csv_split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') cur += '"', ++i;
      else if (c == '"') quoted = false;
      else cur += c;
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace detail

/// Per-seed CSV columns (see README):
/// schema_version,env,method,num_states,profile,seed,status,return_mean,return_se,label,epochs,expert_return,random_return,theta
/// theta is space-separated inside one field.
inline void write_report_csv(std::ostream& out, const RunReport& r) {
  out << "schema_version,env,method,num_states,profile,seed,status,return_mean,return_se,label,epochs,expert_return,"
         "random_return,theta\n";
  for (const auto& s : r.seeds) {
    std::string theta;
    for (std::size_t i = 0; i < s.theta.size(); ++i) theta += (i ? " " : "") + detail::fmt_double(s.theta[i]);
    out << kReportSchemaVersion << ',' << r.config.env << ',' << r.config.method << ',' << r.config.num_observed_states << ','
        << r.config.profile << ',' << s.seed << ',' << (s.ok ? "ok" : "failed") << ',' << detail::fmt_double(s.return_mean)
        << ',' << detail::fmt_double(s.return_std_error) << ',' << detail::csv_escape(s.ok ? s.label : s.error) << ','
        << s.epochs << ',' << detail::fmt_double(s.expert_return) << ',' << detail::fmt_double(s.random_return) << ','
        << theta << '\n';
  }
}

inline std::vector<SeedResult> read_report_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("schema_version,", 0) != 0) throw ConfigError("report csv: missing header");
  std::vector<SeedResult> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = detail::csv_split(line);
    if (f.size() != 14) throw ConfigError("report csv: expected 14 fields");
    if (std::stoi(f[0]) != kReportSchemaVersion) throw ConfigError("report csv: unsupported schema version");
    SeedResult s;
    s.seed = std::stoull(f[5]);
    s.ok = f[6] == "ok";
    s.return_mean = detail::parse_double(f[7]);
    s.return_std_error = detail::parse_double(f[8]);
    (s.ok ? s.label : s.error) = f[9];
    s.epochs = std::stoi(f[10]);
    s.expert_return = detail::parse_double(f[11]);
    s.random_return = detail::parse_double(f[12]);
    std::istringstream ts(f[13]);
    std::string tok;
    while (ts >> tok) s.theta.push_back(detail::parse_double(tok));
    out.push_back(std::move(s));
  }
  return out;
}

inline nlohmann::json seed_to_json(const SeedResult& s) {
  auto num = [](double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); };
  return {{"seed", s.seed},   {"status", s.ok ? "ok" : "failed"}, {"error", s.error},
          {"return_mean", num(s.return_mean)}, {"return_se", num(s.return_std_error)}, {"label", s.label},
          {"epochs", s.epochs}, {"theta", s.theta}, {"expert_return", num(s.expert_return)},
          {"random_return", num(s.random_return)}};
}

inline SeedResult seed_from_json(const nlohmann::json& j) {
  auto num = [](const nlohmann::json& v) { return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>(); };
  SeedResult s;
  s.seed = j.at("seed").get<std::uint64_t>();
  s.ok = j.at("status").get<std::string>() == "ok";
  s.error = j.at("error").get<std::string>();
  s.return_mean = num(j.at("return_mean"));
  s.return_std_error = num(j.at("return_se"));
  s.label = j.at("label").get<std::string>();
  s.epochs = j.at("epochs").get<int>();
  s.theta = j.at("theta").get<std::vector<double>>();
  s.expert_return = num(j.at("expert_return"));
  s.random_return = num(j.at("random_return"));
  return s;
}

/// First line: run summary with the config; then one line per seed.
inline void write_report_jsonl(std::ostream& out, const RunReport& r) {
  nlohmann::json head{{"schema", "rlsp-run-report"}, {"schema_version", kReportSchemaVersion},
                      {"config", r.config.to_json()}, {"mean", r.mean}, {"std_error", r.std_error},
                      {"partial", r.partial},         {"artifacts", r.artifacts}};
  out << head.dump() << '\n';
  for (const auto& s : r.seeds) out << seed_to_json(s).dump() << '\n';
}

inline RunReport read_report_jsonl(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("report jsonl: empty file");
  const auto head = nlohmann::json::parse(line);
  if (head.value("schema", "") != "rlsp-run-report" || head.value("schema_version", 0) != kReportSchemaVersion)
    throw ConfigError("report jsonl: unsupported schema");
  RunReport r;
  r.config = ExperimentConfig::from_json(head.at("config"));
  r.mean = head.at("mean").get<double>();
  r.std_error = head.at("std_error").get<double>();
  r.partial = head.at("partial").get<bool>();
  r.artifacts = head.at("artifacts").get<std::vector<std::string>>();
  while (std::getline(in, line))
    if (!line.empty()) r.seeds.push_back(seed_from_json(nlohmann::json::parse(line)));
  return r;
}

/// Writes report.csv or report.jsonl into `dir` and returns the path.
inline std::string export_report(const RunReport& r, const std::string& format, const std::string& dir) {
  if (format != "csv" && format != "jsonl") throw ConfigError("export_report: format must be csv or jsonl");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const std::string path = (std::filesystem::path(dir) / ("report." + format)).string();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("export_report: cannot write '" + path + "'");
  if (format == "csv") write_report_csv(out, r);
  else write_report_jsonl(out, r);
  return path;
}

// ---------------------------------------------------------------------------
// Gridworld runs
// ---------------------------------------------------------------------------

struct GridworldDeepConfig {
  DeepRlspConfig deep;
  int data_rollouts = 20;
  int data_len = 20;
  TabularInverse inverse = TabularInverse::exact;
  double prior_smoothing = 1.0;

  GridworldDeepConfig() {
    // Tabular gradients never reach the 2.0 threshold scale, so every horizon gets its full 10 steps.
    deep.grad_norm_threshold = 0.0;
    deep.learning_rate = 0.1;
    deep.replay_capacity = 20000;
  }
};

struct GridworldOutcome {
  RewardParams theta;
  LambdaReport sweep;
  std::string label;
  int epochs = 0;
};

inline GridworldOutcome gridworld_outcome(const GridworldCase& c, RewardParams theta, int epochs = 0) {
  GridworldOutcome out;
  out.theta = std::move(theta);
  out.sweep = lambda_sweep(c, out.theta);
  out.label = case_label(c, out.theta, out.sweep);
  out.epochs = epochs;
  return out;
}

inline GridworldOutcome run_gridworld_exact(const GridworldCase& c) {
  RlspConfig cfg;
  cfg.horizon_T = c.mdp.horizon();
  return gridworld_outcome(c, infer_reward(c.mdp, c.features, c.observed_state, cfg), cfg.iterations);
}

inline GridworldOutcome run_gridworld_average_features(const GridworldCase& c) {
  return gridworld_outcome(c, average_features_reward(c.features.row(c.observed_state)));
}

/// Deep RLSP with handcoded features and tabular Bayes inverse models. Exploration data are random
/// rollouts from the environment's start state, like the continuous pipeline's reset rollouts.
inline GridworldOutcome run_gridworld_deep(const GridworldCase& c, std::uint64_t seed,
                                           const GridworldDeepConfig& gcfg = GridworldDeepConfig(),
                                           std::vector<EpochRecord>* log = nullptr) {
  Rng rng = make_stream(seed, 31);
  TabularLearner learner(c.mdp, c.features, gcfg.inverse, gcfg.prior_smoothing);
  ReplayBuffer<int, int> replay(gcfg.deep.replay_capacity);
  fill_tabular_replay(c.mdp, c.true_initial_state, gcfg.data_rollouts, gcfg.data_len, replay, rng);
  ObservedStateSet<int> obs;
  obs.states = {c.observed_state};
  DeepRlspConfig dc = gcfg.deep;
  dc.max_T = c.mdp.horizon();
  const auto res = run_deep_rlsp(learner, obs, replay, dc, c.features.dim(), rng);
  if (log) *log = res.log;
  return gridworld_outcome(c, res.theta, static_cast<int>(res.log.size()));
}

struct ParityRow {
  std::string case_name;
  std::string exact_label;
  std::string deep_label;
  std::string average_features_label;
  std::string desired_label;
  bool pass = false;
};

/// Deep RLSP must match exact RLSP on every case; AverageFeatures must miss the desired label on
/// room_vase, toy_train and batteries; far_vase must stay neutral under all methods.
inline std::vector<ParityRow> gridworld_parity_suite(std::uint64_t seed = 0) {
  std::vector<ParityRow> rows;
  for (const auto& name : case_names()) {
    const GridworldCase c = build_gridworld(name);
    ParityRow row;
    row.case_name = name;
    row.desired_label = c.desired_label;
    row.exact_label = run_gridworld_exact(c).label;
    row.deep_label = run_gridworld_deep(c, seed).label;
    row.average_features_label = run_gridworld_average_features(c).label;
    row.pass = row.deep_label == row.exact_label;
    if (c.name == CaseName::room_vase || c.name == CaseName::toy_train || c.name == CaseName::batteries)
      row.pass = row.pass && row.average_features_label != c.desired_label;
    if (c.name == CaseName::far_vase)
      row.pass = row.pass && row.exact_label == "neutral-on-vase" && row.deep_label == "neutral-on-vase" &&
                 row.average_features_label == "neutral-on-vase";
    rows.push_back(row);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Continuous runs
// ---------------------------------------------------------------------------

/// Seed-level artifacts shared by all methods: expert, observed-state pool, dataset and learned models.
struct SeedArtifacts {
  MaxEntPolicy expert;
  double expert_return = 0.0;
  double random_return = 0.0;
  std::vector<Eigen::VectorXd> state_pool;  // expert states after burn-in, shuffled
  InteractionDataset dataset;
  EncoderDecoder encoder;
  InverseDynamics inverse_dynamics;
};

inline std::shared_ptr<const SeedArtifacts> prepare_seed(const ContinuousEnv& env, const ContinuousProfile& p,
                                                         std::uint64_t seed, int eval_episodes) {
  auto art = std::make_shared<SeedArtifacts>();
  const StateReward truth = true_state_reward(env);
  {
    Rng rng = make_stream(seed, 11);
    SoftQConfig ec = p.expert;
    ec.seed = rng();
    art->expert = optimize_policy(env, truth, ec, rng);
    art->expert_return = evaluate_policy(env, art->expert, eval_episodes, rng).mean;
    art->random_return = evaluate_policy(env, RandomPolicy{env.action_dim()}, p.random_episodes, rng).mean;
  }
  {
    Rng rng = make_stream(seed, 12);
    for (int e = 0; e < p.expert_episodes; ++e) {
      Eigen::VectorXd s = env.reset(rng);
      for (int t = 0; t < env.max_steps(); ++t) {
        const StepResult r = env.step(s, art->expert.act(s, rng));
        if (r.terminated) break;
        s = r.next;
        if (t + 1 >= p.burn_in) art->state_pool.push_back(s);
      }
    }
    std::shuffle(art->state_pool.begin(), art->state_pool.end(), rng);
  }
  {
    Rng rng = make_stream(seed, 13);
    const RandomPolicy random{env.action_dim()};
    // Random pendulum rollouts almost never visit upright states, so half of the rollouts follow the expert.
    if (env.is_pendulum_class()) {
      art->dataset = collect_mixed_dataset(env, random, art->expert, p.data_rollouts, p.data_len, rng);
    } else {
      art->dataset = collect_dataset(env, random, p.data_rollouts, p.data_len, rng);
    }
  }
  {
    ApproximatorConfig ec = p.encoder;
    ec.seed = make_stream(seed, 14)();
    art->encoder = train_encoder(art->dataset.states(), ec, p.latent_dim, p.kl_weight);
    InverseDynamicsConfig ic = p.inverse_dynamics;
    ic.net.seed = make_stream(seed, 15)();
    art->inverse_dynamics = train_inverse_dynamics(art->dataset, ic);
  }
  return art;
}

/// Caches seed artifacts across runs keyed by (env, profile, seed).
class ArtifactCache {
 public:
  /// Thread-safe; concurrent requests for the same key may both compute, the first stored wins.
  std::shared_ptr<const SeedArtifacts> get(const ContinuousEnv& env, const std::string& profile, const ContinuousProfile& p,
                                           std::uint64_t seed, int eval_episodes) {
    const std::string key = env.name_string() + "/" + profile + "/" + std::to_string(seed) + "/" + std::to_string(eval_episodes);
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto it = cache_.find(key);
      if (it != cache_.end()) return it->second;
    }
    auto art = prepare_seed(env, p, seed, eval_episodes);
    std::lock_guard<std::mutex> lock(mu_);
    return cache_.emplace(key, art).first->second;
  }

 private:
  std::mutex mu_;
  std::map<std::string, std::shared_ptr<const SeedArtifacts>> cache_;
};

struct ContinuousOutcome {
  StateReward reward;
  RewardParams theta;
  std::vector<EpochRecord> log;
  std::size_t audited = 0;
  std::size_t audit_passed = 0;
};

inline SeedResult run_continuous_seed(const ExperimentConfig& cfg, const ContinuousEnv& env, const SeedArtifacts& art,
                                      std::uint64_t seed, std::vector<std::string>* artifacts,
                                      ContinuousOutcome* outcome_out = nullptr) {
  const ContinuousProfile p = continuous_profile(cfg.profile, env);
  SeedResult res;
  res.seed = seed;
  res.expert_return = art.expert_return;
  res.random_return = art.random_return;
  if (static_cast<int>(art.state_pool.size()) < cfg.num_observed_states)
    throw StateError("expert rollouts yielded fewer states than requested");

  ObservedStateSet<Eigen::VectorXd> obs;
  obs.states.assign(art.state_pool.begin(), art.state_pool.begin() + cfg.num_observed_states);
  obs.prior_sampler = [&env](Rng& r) { return env.reset(r); };
  Eigen::MatrixXd obs_features(cfg.num_observed_states, art.encoder.latent_dim);
  for (int i = 0; i < cfg.num_observed_states; ++i) obs_features.row(i) = art.encoder.encode(obs.states[i]).transpose();

  ContinuousOutcome outcome;
  const EncoderDecoder* enc = &art.encoder;
  Rng rng = make_stream(seed, 21);
  SoftQConfig in_loop = p.in_loop;
  if (cfg.policy_budget > 0) in_loop.budget = cfg.policy_budget;

  if (cfg.method == "average_features" || (cfg.method == "waypoints" && cfg.num_observed_states == 1)) {
    outcome.theta = average_features_reward(obs_features);
    const Eigen::VectorXd w = outcome.theta.weights;
    outcome.reward = [enc, w](const Eigen::VectorXd& s) { return w.dot(enc->encode(s)); };
  } else if (cfg.method == "waypoints") {
    auto wp = std::make_shared<WaypointsReward>(obs_features);
    outcome.reward = [enc, wp](const Eigen::VectorXd& s) { return (*wp)(enc->encode(s)); };
  } else {
    ContinuousLearnerConfig lc;
    lc.policy = in_loop;
    lc.inverse_policy = p.inverse_policy;
    ContinuousLearner learner(env, art.encoder, art.inverse_dynamics, lc);
    auto replay = replay_from_dataset(art.dataset, p.deep.replay_capacity);
    DeepRlspConfig dc = p.deep;
    dc.prior_weighting = cfg.prior_weighting;
    const DeepRlspResult dr = run_deep_rlsp(learner, obs, replay, dc, art.encoder.latent_dim, rng);
    outcome.theta = dr.theta;
    outcome.log = dr.log;
    outcome.audited = dr.audited;
    outcome.audit_passed = dr.audit_passed;
    outcome.reward = learner.reward_for(dr.theta.weights);
    res.epochs = static_cast<int>(dr.log.size());
    if (!cfg.output_dir.empty() && artifacts) {
      namespace fs = std::filesystem;
      const fs::path dir = fs::path(cfg.output_dir) / ("seed_" + std::to_string(seed));
      fs::create_directories(dir);
      const std::string log_path = (dir / "epochs.csv").string();
      std::ofstream lf(log_path);
      write_epoch_log(lf, dr.log);
      artifacts->push_back(log_path);
      ckpt::save_file((dir / "theta.ckpt").string(), dr.theta.weights);
      ckpt::save_file((dir / "encoder.ckpt").string(), art.encoder);
      ckpt::save_file((dir / "inverse_dynamics.ckpt").string(), art.inverse_dynamics);
      ckpt::save_file((dir / "inverse_policy.ckpt").string(), learner.inverse_policy().model);
      for (const char* f : {"theta.ckpt", "encoder.ckpt", "inverse_dynamics.ckpt", "inverse_policy.ckpt"})
        artifacts->push_back((dir / f).string());
    }
  }
  res.theta.assign(outcome.theta.weights.data(), outcome.theta.weights.data() + outcome.theta.weights.size());

  SoftQConfig reopt = in_loop;
  reopt.budget = in_loop.budget * p.reopt_multiplier;
  reopt.reward_scale = p.reopt_reward_scale;
  reopt.seed = rng();
  const MaxEntPolicy final_policy = optimize_policy(env, outcome.reward, reopt, rng);
  const EvalReport ev = evaluate_policy(env, final_policy, cfg.eval_episodes, rng);
  res.return_mean = ev.mean;
  res.return_std_error = ev.std_error;
  if (outcome_out) *outcome_out = std::move(outcome);
  return res;
}

inline RunReport run_experiment(const ExperimentConfig& cfg, ArtifactCache* cache = nullptr) {
  cfg.validate();
  RunReport report;
  report.config = cfg;
  ArtifactCache local;
  if (!cache) cache = &local;
  // Each seed owns its random streams, so running seeds concurrently does not change any output.
  auto run_seed = [&cfg, cache](std::uint64_t seed, std::vector<std::string>* artifacts) {
    SeedResult res;
    res.seed = seed;
    try {
      if (is_gridworld_name(cfg.env)) {
        if (cfg.method == "deep_rlsp" && cfg.prior_weighting) throw ConfigError("prior weighting is continuous-only");
        const GridworldCase c = build_gridworld(cfg.env);
        GridworldOutcome g;
        if (cfg.method == "rlsp_exact") g = run_gridworld_exact(c);
        else if (cfg.method == "deep_rlsp") g = run_gridworld_deep(c, seed);
        else g = run_gridworld_average_features(c);
        res.label = g.label;
        res.epochs = g.epochs;
        res.theta.assign(g.theta.weights.data(), g.theta.weights.data() + g.theta.dim());
        // true return of the first lambda showing the summary behavior
        const auto& labels = g.sweep.behavior_labels;
        const auto idx = std::find(labels.begin(), labels.end(), g.sweep.summary_label()) - labels.begin();
        res.return_mean = g.sweep.returns_true[static_cast<std::size_t>(idx)];
        if (!cfg.output_dir.empty()) {
          std::filesystem::create_directories(cfg.output_dir);
          const std::string path = (std::filesystem::path(cfg.output_dir) /
                                    (cfg.env + "_" + cfg.method + "_seed" + std::to_string(seed) + "_lambda.csv"))
                                       .string();
          std::ofstream out(path);
          g.sweep.write_csv(out);
          artifacts->push_back(path);
        }
      } else {
        const ContinuousEnv env = make_env(cfg.env);
        const ContinuousProfile p = continuous_profile(cfg.profile, env);
        const auto art = cache->get(env, cfg.profile, p, seed, cfg.eval_episodes);
        res = run_continuous_seed(cfg, env, *art, seed, artifacts);
      }
    } catch (const std::exception& e) {
      res.ok = false;
      res.error = e.what();
    }
    return res;
  };
  const std::size_t n = cfg.seeds.size();
  std::vector<SeedResult> results(n);
  std::vector<std::vector<std::string>> artifacts(n);
  const std::size_t width = static_cast<std::size_t>(std::max(1, cfg.threads));
  for (std::size_t begin = 0; begin < n; begin += width) {
    const std::size_t end = std::min(n, begin + width);
    if (end - begin == 1) {
      results[begin] = run_seed(cfg.seeds[begin], &artifacts[begin]);
      continue;
    }
    std::vector<std::future<SeedResult>> jobs;
    for (std::size_t i = begin; i < end; ++i)
      jobs.push_back(std::async(std::launch::async, run_seed, cfg.seeds[i], &artifacts[i]));
    for (std::size_t i = begin; i < end; ++i) results[i] = jobs[i - begin].get();
  }
  for (std::size_t i = 0; i < n; ++i) {
    report.seeds.push_back(std::move(results[i]));
    report.artifacts.insert(report.artifacts.end(), artifacts[i].begin(), artifacts[i].end());
  }
  report.summarize();
  if (!cfg.output_dir.empty()) {
    report.artifacts.push_back((std::filesystem::path(cfg.output_dir) / "report.csv").string());
    report.artifacts.push_back((std::filesystem::path(cfg.output_dir) / "report.jsonl").string());
    export_report(report, "csv", cfg.output_dir);
    export_report(report, "jsonl", cfg.output_dir);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Discriminator similarity
// ---------------------------------------------------------------------------

using StochasticController = std::function<Eigen::VectorXd(const Eigen::VectorXd&, Rng&)>;

struct DiscriminatorConfig {
  int hidden = 10;
  int window = 5;
  int episodes_per_policy = 10;
  int train_steps = 200;
  int eval_every = 10;
  int batch_size = 32;
  int test_windows = 1000;
  double learning_rate = 0.01;
  int num_seeds = 10;
};

struct DiscriminatorCurves {
  std::vector<int> steps;
  std::vector<std::vector<double>> per_seed;  // held-out accuracy at each step
  std::vector<double> mean;
};

namespace detail {

inline std::vector<Eigen::VectorXd> policy_windows(const ContinuousEnv& env, const StochasticController& pol, int episodes,
                                                   int window, Rng& rng) {
  std::vector<Eigen::VectorXd> out;
  for (int e = 0; e < episodes; ++e) {
    std::vector<Eigen::VectorXd> traj{env.reset(rng)};
    for (int t = 0; t < env.max_steps(); ++t) {
      const StepResult r = env.step(traj.back(), pol(traj.back(), rng));
      traj.push_back(r.next);
      if (r.terminated) break;
    }
    for (std::size_t i = 0; i + window <= traj.size(); ++i) {
      Eigen::VectorXd w(window * env.state_dim());
      for (int k = 0; k < window; ++k) w.segment(k * env.state_dim(), env.state_dim()) = traj[i + k];
      out.push_back(std::move(w));
    }
  }
  if (out.empty()) throw StateError("discriminator: episodes shorter than the window");
  return out;
}

}  // namespace detail

/// Learning curves of a one-hidden-layer classifier separating 5-observation windows of two policies.
inline DiscriminatorCurves discriminator_similarity(const StochasticController& a, const StochasticController& b,
                                                    const ContinuousEnv& env, const DiscriminatorConfig& cfg = {},
                                                    std::uint64_t base_seed = 0) {
  DiscriminatorCurves curves;
  for (int step = 0; step <= cfg.train_steps; step += cfg.eval_every) curves.steps.push_back(step);
  curves.mean.assign(curves.steps.size(), 0.0);
  for (int k = 0; k < cfg.num_seeds; ++k) {
    Rng rng = make_stream(base_seed, 1000 + static_cast<std::uint64_t>(k));
    const auto wa = detail::policy_windows(env, a, cfg.episodes_per_policy, cfg.window, rng);
    const auto wb = detail::policy_windows(env, b, cfg.episodes_per_policy, cfg.window, rng);
    // Test windows come from fresh episodes; sharing the training pool lets the classifier memorize
    // which pool a window came from, even when both policies are the same.
    const auto ta = detail::policy_windows(env, a, cfg.episodes_per_policy, cfg.window, rng);
    const auto tb = detail::policy_windows(env, b, cfg.episodes_per_policy, cfg.window, rng);
    const int dim = static_cast<int>(wa.front().size());
    auto draw = [&](int n, const auto& pa, const auto& pb, Eigen::MatrixXd& x, Eigen::VectorXd& y) {
      x.resize(dim, n);
      y.resize(n);
      for (int i = 0; i < n; ++i) {
        const bool from_b = uniform01(rng) < 0.5;
        const auto& pool = from_b ? pb : pa;
        x.col(i) = pool[uniform_int(0, static_cast<int>(pool.size()) - 1, rng)];
        y(i) = from_b ? 1.0 : 0.0;
      }
    };
    Eigen::MatrixXd x_test;
    Eigen::VectorXd y_test;
    draw(cfg.test_windows, ta, tb, x_test, y_test);
    Eigen::MatrixXd all(dim, static_cast<Eigen::Index>(wa.size() + wb.size()));
    for (std::size_t i = 0; i < wa.size(); ++i) all.col(static_cast<Eigen::Index>(i)) = wa[i];
    for (std::size_t i = 0; i < wb.size(); ++i) all.col(static_cast<Eigen::Index>(wa.size() + i)) = wb[i];
    const Normalizer norm = Normalizer::fit(all.transpose());
    Mlp net(dim, {cfg.hidden}, 1, Activation::relu, rng);
    MomentumSgd opt{cfg.learning_rate, 0.9, 0.0, {}};
    auto accuracy = [&]() {
      const Eigen::MatrixXd logits = net.forward(norm.apply(x_test));
      int correct = 0;
      for (Eigen::Index i = 0; i < logits.cols(); ++i) correct += (logits(0, i) > 0.0) == (y_test(i) > 0.5);
      return static_cast<double>(correct) / static_cast<double>(logits.cols());
    };
    std::vector<double> curve{accuracy()};
    for (int step = 1; step <= cfg.train_steps; ++step) {
      Eigen::MatrixXd x;
      Eigen::VectorXd y;
      draw(cfg.batch_size, wa, wb, x, y);
      Mlp::Cache cache;
      const Eigen::MatrixXd logits = net.forward(norm.apply(x), cache);
      Eigen::MatrixXd d(1, cfg.batch_size);
      for (int i = 0; i < cfg.batch_size; ++i) d(0, i) = (1.0 / (1.0 + std::exp(-logits(0, i))) - y(i)) / cfg.batch_size;
      opt.step(net.params(), net.backward(cache, d));
      if (step % cfg.eval_every == 0) curve.push_back(accuracy());
    }
    for (std::size_t i = 0; i < curve.size(); ++i) curves.mean[i] += curve[i] / cfg.num_seeds;
    curves.per_seed.push_back(std::move(curve));
  }
  return curves;
}

inline void write_curves_csv(std::ostream& out, const DiscriminatorCurves& c) {
  out << "step,mean";
  for (std::size_t k = 0; k < c.per_seed.size(); ++k) out << ",seed_" << k;
  out << '\n';
  for (std::size_t i = 0; i < c.steps.size(); ++i) {
    out << c.steps[i] << ',' << detail::fmt_double(c.mean[i]);
    for (const auto& s : c.per_seed) out << ',' << detail::fmt_double(s[i]);
    out << '\n';
  }
}

}  // namespace rlsp
