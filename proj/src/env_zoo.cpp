#include "r2csl/env_zoo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "r2csl/oracle.hpp"
#include "r2csl/rng.hpp"

namespace r2csl {

Mdp toy_stitch_mdp() {
  Mdp mdp;
  mdp.name = "toy-stitch";
  mdp.horizon = 3;
  mdp.num_states = 1;
  mdp.num_actions = 3;
  mdp.deterministic = true;
  mdp.succ.assign(9, 0);
  mdp.reward = {70.0, 65.0, 40.0,   // stage 1
                0.0, 15.0, 20.0,    // stage 2
                10.0, 1.0, 15.0};   // stage 3
  mdp.initial_dist = {1.0};
  return mdp;
}

BehaviorPolicy toy_uniform_beta() { return uniform_policy(3, 1, 3); }

Dataset toy_demonstrations() {
  const Mdp mdp = toy_stitch_mdp();
  Dataset out;
  out.horizon = mdp.horizon;
  out.env_name = mdp.name;
  out.behavior_id = "demonstrations";
  out.seed = 0;
  for (int a = 0; a < mdp.num_actions; ++a) {
    Trajectory traj;
    for (int h = 0; h < mdp.horizon; ++h)
      traj.steps.push_back({0, a, mdp.reward_at(h, 0, a)});
    annotate_rtg(traj);
    out.trajectories.push_back(std::move(traj));
  }
  return out;
}

int pointmaze_cell(const PointMazeConfig& config, int x, int y) {
  return x + y * config.width;
}

namespace {

void check_maze(const PointMazeConfig& c) {
  auto inside = [&](int x, int y) {
    return x >= 0 && x < c.width && y >= 0 && y < c.height;
  };
  if (c.width < 2 || c.height < 2 || c.horizon < 1 ||
      !inside(c.left_start_x, c.left_start_y) ||
      !inside(c.bottom_start_x, c.bottom_start_y) || !inside(c.goal_x, c.goal_y) ||
      c.type1_fraction < 0.0 || c.type1_fraction > 1.0 || c.action_noise < 0.0 ||
      c.action_noise > 1.0)
    fail(ErrorKind::InvalidConfig, "malformed maze configuration");
}

constexpr int kMoveDx[5] = {0, 0, -1, 1, 0};
constexpr int kMoveDy[5] = {1, -1, 0, 0, 0};

int maze_move(const PointMazeConfig& c, int x, int y, int a) {
  const int nx = std::clamp(x + kMoveDx[a], 0, c.width - 1);
  const int ny = std::clamp(y + kMoveDy[a], 0, c.height - 1);
  return pointmaze_cell(c, nx, ny);
}

// Self-correcting goal seeker: close the vertical gap to the goal corridor,
// then walk the corridor toward the goal.
int type1_action(const PointMazeConfig& c, int x, int y) {
  if (y < c.goal_y) return 0;
  if (y > c.goal_y) return 1;
  if (x < c.goal_x) return 3;
  if (x > c.goal_x) return 2;
  return 4;
}

// Walks its own corridor upward and parks at the top wall.
int type2_action(const PointMazeConfig& c, int /*x*/, int y) {
  return y < c.height - 1 ? 0 : 4;
}

}  // namespace

Mdp pointmaze_mdp(const PointMazeConfig& config) {
  check_maze(config);
  Mdp mdp;
  mdp.name = "pointmaze";
  mdp.horizon = config.horizon;
  mdp.num_states = config.width * config.height + 1;
  mdp.num_actions = 5;
  mdp.deterministic = true;
  const int absorb = config.width * config.height;
  const int goal = pointmaze_cell(config, config.goal_x, config.goal_y);
  mdp.succ.assign(
      static_cast<std::size_t>(mdp.horizon) * mdp.num_states * mdp.num_actions, 0);
  mdp.reward.assign(mdp.succ.size(), 0.0);
  for (int h = 0; h < mdp.horizon; ++h)
    for (int s = 0; s < mdp.num_states; ++s)
      for (int a = 0; a < mdp.num_actions; ++a) {
        const int i = mdp.sa_index(h, s, a);
        if (s == absorb || s == goal) {
          mdp.succ[i] = absorb;
          continue;
        }
        const int t = maze_move(config, s % config.width, s / config.width, a);
        mdp.succ[i] = t;
        if (t == goal) mdp.reward[i] = 1.0;
      }
  mdp.initial_dist.assign(mdp.num_states, 0.0);
  const int left = pointmaze_cell(config, config.left_start_x, config.left_start_y);
  const int bottom =
      pointmaze_cell(config, config.bottom_start_x, config.bottom_start_y);
  mdp.initial_dist[left] += config.type1_fraction;
  mdp.initial_dist[bottom] += 1.0 - config.type1_fraction;
  return mdp;
}

Dataset pointmaze_dataset(const PointMazeConfig& config, std::int64_t n,
                          std::uint64_t seed, Execution exec) {
  check_maze(config);
  if (n <= 0) fail(ErrorKind::InvalidConfig, "episode count must be positive");
  const Mdp mdp = pointmaze_mdp(config);
  const int absorb = config.width * config.height;
  const int goal = pointmaze_cell(config, config.goal_x, config.goal_y);
  const int left = pointmaze_cell(config, config.left_start_x, config.left_start_y);
  const int bottom =
      pointmaze_cell(config, config.bottom_start_x, config.bottom_start_y);
  Dataset out;
  out.horizon = config.horizon;
  out.env_name = mdp.name;
  out.behavior_id = "scripted-mix";
  out.seed = seed;
  out.trajectories.resize(static_cast<std::size_t>(n));
  parallel_for(n, exec, [&](std::int64_t i) {
    SplitMix64 rng(derive_stream(seed, static_cast<std::uint64_t>(i)));
    const bool type1 = rng.uniform01() < config.type1_fraction;
    int s = type1 ? left : bottom;
    Trajectory traj;
    traj.steps.reserve(static_cast<std::size_t>(config.horizon));
    for (int h = 0; h < config.horizon; ++h) {
      int a;
      if (s == absorb || s == goal) {
        a = 4;
      } else {
        const int x = s % config.width;
        const int y = s / config.width;
        a = type1 ? type1_action(config, x, y) : type2_action(config, x, y);
      }
      if (rng.uniform01() < config.action_noise) a = rng.below(5);
      traj.steps.push_back({s, a, mdp.reward_at(h, s, a)});
      s = mdp.next_state(h, s, a);
    }
    annotate_rtg(traj);
    out.trajectories[static_cast<std::size_t>(i)] = std::move(traj);
  });
  return out;
}

namespace {

void check_random_config(const RandomMdpConfig& c) {
  if (c.num_states < 1 || c.num_actions < 1 || c.horizon < 1 ||
      c.behavior_support < 1 || c.behavior_support > c.num_actions ||
      c.rho_support < 1 || c.rho_support > c.num_states)
    fail(ErrorKind::InvalidConfig, "malformed generator configuration");
}

double six_decimals(double x) { return std::round(x * 1e6) / 1e6; }

// First k entries of a seeded partial shuffle of 0..n-1.
std::vector<int> draw_subset(SplitMix64& rng, int n, int k) {
  std::vector<int> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < k; ++i)
    std::swap(pool[i], pool[i + rng.below(n - i)]);
  pool.resize(static_cast<std::size_t>(k));
  return pool;
}

void fill_sparse_weights(SplitMix64& rng, double* row, int n, int k) {
  const std::vector<int> chosen = draw_subset(rng, n, k);
  double total = 0.0;
  std::vector<double> w(chosen.size());
  for (std::size_t i = 0; i < chosen.size(); ++i) {
    w[i] = 1.0 + rng.uniform01();
    total += w[i];
  }
  std::fill(row, row + n, 0.0);
  for (std::size_t i = 0; i < chosen.size(); ++i) row[chosen[i]] = w[i] / total;
}

GeneratedEnv random_env_skeleton(const RandomMdpConfig& c, SplitMix64& rng,
                                 const char* prefix) {
  GeneratedEnv env;
  env.mdp.name = std::string(prefix) + std::to_string(c.seed);
  env.mdp.horizon = c.horizon;
  env.mdp.num_states = c.num_states;
  env.mdp.num_actions = c.num_actions;
  env.mdp.initial_dist.assign(static_cast<std::size_t>(c.num_states), 0.0);
  fill_sparse_weights(rng, env.mdp.initial_dist.data(), c.num_states, c.rho_support);
  env.beta.horizon = c.horizon;
  env.beta.num_states = c.num_states;
  env.beta.num_actions = c.num_actions;
  env.beta.probs.assign(
      static_cast<std::size_t>(c.horizon) * c.num_states * c.num_actions, 0.0);
  for (int h = 0; h < c.horizon; ++h)
    for (int s = 0; s < c.num_states; ++s)
      fill_sparse_weights(rng, env.beta.row(h, s), c.num_actions,
                          c.behavior_support);
  return env;
}

void draw_rewards(SplitMix64& rng, Mdp& mdp) {
  mdp.reward.resize(static_cast<std::size_t>(mdp.horizon) * mdp.num_states *
                    mdp.num_actions);
  for (double& r : mdp.reward) r = six_decimals(rng.uniform01());
}

}  // namespace

GeneratedEnv random_deterministic_mdp(const RandomMdpConfig& config) {
  check_random_config(config);
  if (config.stochastic)
    fail(ErrorKind::InvalidConfig, "deterministic generator got stochastic=true");
  SplitMix64 rng(derive_stream(config.seed, 0));
  GeneratedEnv env = random_env_skeleton(config, rng, "random-det-");
  env.mdp.deterministic = true;
  env.mdp.succ.resize(static_cast<std::size_t>(config.horizon) *
                      config.num_states * config.num_actions);
  for (int& s : env.mdp.succ) s = rng.below(config.num_states);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    draw_rewards(rng, env.mdp);
    if (!config.tie_free || verify_tie_free(env.mdp, env.beta)) {
      validate_mdp(env.mdp);
      validate_policy(env.beta);
      return env;
    }
  }
  fail(ErrorKind::InvalidConfig, "could not draw a tie-free reward table");
}

GeneratedEnv random_stochastic_mdp(const RandomMdpConfig& config) {
  check_random_config(config);
  if (config.tie_free)
    fail(ErrorKind::InvalidConfig, "tie-freeness needs deterministic dynamics");
  SplitMix64 rng(derive_stream(config.seed, 0));
  GeneratedEnv env = random_env_skeleton(config, rng, "random-stoch-");
  env.mdp.deterministic = false;
  const std::size_t rows = static_cast<std::size_t>(config.horizon) *
                           config.num_states * config.num_actions;
  env.mdp.prob.assign(rows * config.num_states, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    double* row = env.mdp.prob.data() + i * config.num_states;
    double total = 0.0;
    for (int t = 0; t < config.num_states; ++t) {
      row[t] = -std::log(1.0 - rng.uniform01());
      total += row[t];
    }
    for (int t = 0; t < config.num_states; ++t) row[t] /= total;
  }
  draw_rewards(rng, env.mdp);
  validate_mdp(env.mdp);
  validate_policy(env.beta);
  return env;
}

}  // namespace r2csl
