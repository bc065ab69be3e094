#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "r2csl/common.hpp"

namespace r2csl {

/// Finite-horizon tabular MDP with stage-dependent dynamics and rewards.
/// Stages are 0-based internally and 1-based in every external format.
struct Mdp {
  std::string name;
  int horizon = 0;
  int num_states = 0;
  int num_actions = 0;
  bool deterministic = false;

  // deterministic: succ[(h*S + s)*A + a] = next state
  std::vector<int> succ;
  // stochastic: prob[((h*S + s)*A + a)*S + s'] = transition probability
  std::vector<double> prob;
  // reward[(h*S + s)*A + a], nonnegative
  std::vector<double> reward;
  std::vector<double> initial_dist;

  int sa_index(int h, int s, int a) const {
    return (h * num_states + s) * num_actions + a;
  }
  int next_state(int h, int s, int a) const { return succ[sa_index(h, s, a)]; }
  const double* transition_row(int h, int s, int a) const {
    return prob.data() + static_cast<std::size_t>(sa_index(h, s, a)) * num_states;
  }
  double reward_at(int h, int s, int a) const { return reward[sa_index(h, s, a)]; }
  double max_reward() const;
};

/// Throws on malformed shapes, non-stochastic rows, or negative rewards.
/// Rewards above 1 are accepted verbatim.
void validate_mdp(const Mdp& mdp);

/// Per-stage action distribution table, probs[(h*S + s)*A + a].
/// Used both for behavior policies and for learned deployable policies.
struct TabularPolicy {
  int horizon = 0;
  int num_states = 0;
  int num_actions = 0;
  std::vector<double> probs;

  double at(int h, int s, int a) const {
    return probs[(static_cast<std::size_t>(h) * num_states + s) * num_actions + a];
  }
  double* row(int h, int s) {
    return probs.data() + (static_cast<std::size_t>(h) * num_states + s) * num_actions;
  }
  const double* row(int h, int s) const {
    return probs.data() + (static_cast<std::size_t>(h) * num_states + s) * num_actions;
  }
  std::vector<int> support(int h, int s) const;
};

using BehaviorPolicy = TabularPolicy;
using StagePolicy = TabularPolicy;

TabularPolicy uniform_policy(int horizon, int num_states, int num_actions);
void validate_policy(const TabularPolicy& policy);

struct Step {
  int s = 0;
  int a = 0;
  double r = 0.0;
};

/// One episode of exactly `horizon` steps plus its return-to-go annotation:
/// rtg[h] = sum of rewards from step h on, rtg.size() == steps.size().
struct Trajectory {
  std::vector<Step> steps;
  std::vector<double> rtg;
};

/// Recomputes rtg by backward accumulation. The single authoritative code
/// path: generators and loaders both call it, so equal reward sequences get
/// bit-identical annotations.
void annotate_rtg(Trajectory& trajectory);

/// Return values are compared through a quantization grid so that float noise
/// cannot split one logical return into two table entries. Generators emit
/// rewards with at most six decimal digits, which makes the default grid
/// lossless.
inline std::int64_t rtg_key(double g, double resolution) {
  return std::llround(g / resolution);
}

/// Per-(s,h) partial table of doubles; undefined cells are tracked explicitly.
struct StageTable {
  int horizon = 0;
  int num_states = 0;
  std::vector<double> value;
  std::vector<std::uint8_t> defined;

  static StageTable empty(int horizon, int num_states) {
    StageTable t;
    t.horizon = horizon;
    t.num_states = num_states;
    t.value.assign(static_cast<std::size_t>(horizon) * num_states, 0.0);
    t.defined.assign(static_cast<std::size_t>(horizon) * num_states, 0);
    return t;
  }
  std::size_t idx(int h, int s) const {
    return static_cast<std::size_t>(h) * num_states + s;
  }
  bool has(int h, int s) const { return defined[idx(h, s)] != 0; }
  double at(int h, int s) const { return value[idx(h, s)]; }
  void set(int h, int s, double v) {
    value[idx(h, s)] = v;
    defined[idx(h, s)] = 1;
  }
};

// JSON spec files; round-trips are bit-exact for all double fields.
std::string mdp_to_json(const Mdp& mdp);
Mdp mdp_from_json(const std::string& text);
void save_mdp(const Mdp& mdp, const std::string& path);
Mdp load_mdp(const std::string& path);

std::string policy_to_json(const TabularPolicy& policy, const std::string& name);
TabularPolicy policy_from_json(const std::string& text);
void save_policy(const TabularPolicy& policy, const std::string& name,
                 const std::string& path);
TabularPolicy load_policy(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace r2csl
