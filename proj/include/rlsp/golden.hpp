#pragma once

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rlsp/continuous_env.hpp"
#include "rlsp/env_constants.hpp"
#include "rlsp/error.hpp"
#include "rlsp/random.hpp"

// Golden dynamics fixtures: a fixed open-loop action sequence from a fixed start state.
//   # rlsp-golden v1 env <name> constants <version> steps <n>
//   start <s...>
//   <a...> | <s'...> | <reward> <terminated>
namespace rlsp::golden {

struct Step {
  Eigen::VectorXd action;
  Eigen::VectorXd next;
  double reward = 0.0;
  bool terminated = false;
};

struct Fixture {
  std::string env;
  int constants_version = 0;
  Eigen::VectorXd start;
  std::vector<Step> steps;
};

inline constexpr int kSteps = 60;

/// Smooth deterministic actions that sweep the full range, including saturated values.
inline Eigen::VectorXd action_at(int t, int action_dim) {
  Eigen::VectorXd a(action_dim);
  for (int i = 0; i < action_dim; ++i) a(i) = 1.3 * std::sin(0.37 * t + 1.1 * i);
  return a;
}

/// Stepping continues through termination so the fixture also pins post-failure dynamics.
inline Fixture record(const ContinuousEnv& env) {
  Fixture f;
  f.env = env.name_string();
  f.constants_version = env_constants::kVersion;
  Rng rng = make_stream(20240, 7);
  f.start = env.reset(rng);
  Eigen::VectorXd s = f.start;
  for (int t = 0; t < kSteps; ++t) {
    Step st;
    st.action = action_at(t, env.action_dim());
    const StepResult r = env.step(s, st.action);
    st.next = r.next;
    st.reward = r.reward;
    st.terminated = r.terminated;
    s = r.next;
    f.steps.push_back(std::move(st));
  }
  return f;
}

namespace detail {
inline void put(std::ostream& out, const Eigen::VectorXd& v) {
  char buf[40];
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", v(i));
    out << (i ? " " : "") << buf;
  }
}
inline Eigen::VectorXd get(std::istringstream& in, Eigen::Index n) {
  Eigen::VectorXd v(n);
  std::string tok;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(in >> tok)) throw ConfigError("golden: short record");
    v(i) = std::strtod(tok.c_str(), nullptr);
  }
  return v;
}
inline void expect_bar(std::istringstream& in) {
  std::string bar;
  if (!(in >> bar) || bar != "|") throw ConfigError("golden: expected '|'");
}
}  // namespace detail

inline void write(std::ostream& out, const Fixture& f) {
  out << "# rlsp-golden v1 env " << f.env << " constants " << f.constants_version << " steps " << f.steps.size() << '\n';
  out << "start ";
  detail::put(out, f.start);
  out << '\n';
  char buf[40];
  for (const auto& st : f.steps) {
    detail::put(out, st.action);
    out << " | ";
    detail::put(out, st.next);
    std::snprintf(buf, sizeof buf, "%.17g", st.reward);
    out << " | " << buf << ' ' << (st.terminated ? 1 : 0) << '\n';
  }
}

inline Fixture read(std::istream& in, const ContinuousEnv& env) {
  Fixture f;
  std::string line, tok;
  std::size_t count = 0;
  if (!std::getline(in, line)) throw ConfigError("golden: empty file");
  {
    std::istringstream hs(line);
    std::string hash, tag, version;
    hs >> hash >> tag >> version;
    if (tag != "rlsp-golden" || version != "v1") throw ConfigError("golden: bad header");
    while (hs >> tok) {
      if (tok == "env") hs >> f.env;
      else if (tok == "constants") hs >> f.constants_version;
      else if (tok == "steps") hs >> count;
    }
  }
  if (!std::getline(in, line)) throw ConfigError("golden: missing start line");
  {
    std::istringstream ls(line);
    ls >> tok;
    if (tok != "start") throw ConfigError("golden: missing start line");
    f.start = detail::get(ls, env.state_dim());
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    Step st;
    st.action = detail::get(ls, env.action_dim());
    detail::expect_bar(ls);
    st.next = detail::get(ls, env.state_dim());
    detail::expect_bar(ls);
    int term = 0;
    if (!(ls >> tok >> term)) throw ConfigError("golden: short record");
    st.reward = std::strtod(tok.c_str(), nullptr);
    st.terminated = term != 0;
    f.steps.push_back(std::move(st));
  }
  if (f.steps.size() != count) throw ConfigError("golden: step count mismatch");
  return f;
}

}  // namespace rlsp::golden
