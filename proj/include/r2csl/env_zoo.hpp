#pragma once

#include <cstdint>
#include <vector>

#include "r2csl/data.hpp"
#include "r2csl/mdp.hpp"

namespace r2csl {

/// Single-state, three-action, three-stage environment whose demonstrated
/// trajectories reward trajectory stitching: per-stage rewards
///   a1: 70, 0, 10   a2: 65, 15, 1   a3: 40, 20, 15.
Mdp toy_stitch_mdp();
BehaviorPolicy toy_uniform_beta();
/// The three constant-action demonstrations (returns 80, 81, 75).
Dataset toy_demonstrations();

/// Gridworld with two corridors crossing at a junction. Type I trajectories
/// walk from the left start through the junction to the goal; Type II walk
/// from the bottom start upward through the junction and never turn toward
/// the goal. Reaching the goal pays 1 once, then the episode is absorbed.
struct PointMazeConfig {
  int width = 8;
  int height = 8;
  int left_start_x = 0, left_start_y = 4;
  int bottom_start_x = 4, bottom_start_y = 0;
  int goal_x = 5, goal_y = 4;
  int horizon = 12;
  double type1_fraction = 0.1;   // probability a trajectory is Type I
  double action_noise = 0.1;     // per-step chance the move is replaced uniformly
};

/// Moves: 0 up, 1 down, 2 left, 3 right, 4 stay. States are cells in row-major
/// order (x + y*width) plus one absorbing state at index width*height. The
/// dynamics themselves are deterministic; noise lives only in the recipe.
Mdp pointmaze_mdp(const PointMazeConfig& config);

/// Scripted dataset recipe: each episode picks its type, then follows the
/// type's self-correcting script under per-step action noise. Episode i uses
/// derive_stream(seed, i); output is independent of execution mode.
Dataset pointmaze_dataset(const PointMazeConfig& config, std::int64_t n,
                          std::uint64_t seed, Execution exec = Execution::Parallel);

int pointmaze_cell(const PointMazeConfig& config, int x, int y);

struct RandomMdpConfig {
  int num_states = 3;
  int num_actions = 3;
  int horizon = 3;
  bool stochastic = false;
  bool tie_free = true;        // requires stochastic == false
  int behavior_support = 2;    // per-(s,h) support size of the generated beta
  int rho_support = 2;         // support size of the initial distribution
  std::uint64_t seed = 0;
};

struct GeneratedEnv {
  Mdp mdp;
  BehaviorPolicy beta;
};

/// Seeded deterministic MDP with random successors, rewards drawn uniformly
/// and rounded to six decimals, and a behavior policy with per-cell support of
/// the configured size (weights in [1,2], normalized). With tie_free set, the
/// rewards are re-rolled until no two supported trajectories sharing (s,h) but
/// differing in the action carry equal returns; verification is by exact
/// enumeration and refuses instances too large to enumerate.
GeneratedEnv random_deterministic_mdp(const RandomMdpConfig& config);

/// Seeded stochastic MDP; each transition row is an exponential-weight draw
/// (e_i = -log(1 - u_i), normalized), so no row degenerates to a point mass.
GeneratedEnv random_stochastic_mdp(const RandomMdpConfig& config);

}  // namespace r2csl
