// Times each data-parallel kernel in serial and OpenMP mode and checks that
// the two produce bit-identical results.

#include <cstdio>
#include <cstdlib>
#include <string>

#include "r2csl/data.hpp"
#include "r2csl/env_zoo.hpp"
#include "r2csl/estimators.hpp"
#include "r2csl/oracle.hpp"
#include "r2csl/parallel.hpp"
#include "r2csl/relabel.hpp"

using namespace r2csl;

namespace {

bool same_dataset(const Dataset& a, const Dataset& b) {
  if (a.trajectories.size() != b.trajectories.size()) return false;
  for (std::size_t i = 0; i < a.trajectories.size(); ++i) {
    const Trajectory& x = a.trajectories[i];
    const Trajectory& y = b.trajectories[i];
    if (x.steps.size() != y.steps.size()) return false;
    for (std::size_t h = 0; h < x.steps.size(); ++h)
      if (x.steps[h].s != y.steps[h].s || x.steps[h].a != y.steps[h].a ||
          x.steps[h].r != y.steps[h].r || x.rtg[h] != y.rtg[h])
        return false;
  }
  return true;
}

bool same_labels(const LabelMatrix& a, const LabelMatrix& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) return false;
  return true;
}

void report(const char* kernel, double serial_s, double parallel_s, bool match) {
  std::printf("%-18s %10.1f ms %10.1f ms %7.2fx  %s\n", kernel, serial_s * 1e3,
              parallel_s * 1e3, serial_s / parallel_s,
              match ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  const std::int64_t n = argc > 1 ? std::atoll(argv[1]) : 20000;
  int failures = 0;

  const PointMazeConfig maze;
  const Mdp maze_mdp = pointmaze_mdp(maze);

  double t0 = wall_seconds();
  const Dataset maze_serial = pointmaze_dataset(maze, n, 7, Execution::Serial);
  double t1 = wall_seconds();
  const Dataset maze_parallel = pointmaze_dataset(maze, n, 7, Execution::Parallel);
  double t2 = wall_seconds();
  bool ok = same_dataset(maze_serial, maze_parallel);
  failures += !ok;
  report("maze recipe", t1 - t0, t2 - t1, ok);

  RandomMdpConfig random_cfg;
  random_cfg.num_states = 6;
  random_cfg.num_actions = 4;
  random_cfg.horizon = 8;
  random_cfg.stochastic = true;
  random_cfg.tie_free = false;
  random_cfg.seed = 11;
  const GeneratedEnv env = random_stochastic_mdp(random_cfg);
  t0 = wall_seconds();
  const Dataset roll_serial = rollout(env.mdp, env.beta, n, 13, Execution::Serial);
  t1 = wall_seconds();
  const Dataset roll_parallel = rollout(env.mdp, env.beta, n, 13, Execution::Parallel);
  t2 = wall_seconds();
  ok = same_dataset(roll_serial, roll_parallel);
  failures += !ok;
  report("rollout", t1 - t0, t2 - t1, ok);

  LabelMatrix labels;
  labels.reserve(maze_serial.trajectories.size());
  for (const Trajectory& traj : maze_serial.trajectories) labels.push_back(traj.rtg);
  const StageTable fprev =
      empirical_max_table(build_index(maze_serial, kDefaultResolution,
                                      maze_mdp.num_states, maze_mdp.num_actions))
          .values;
  t0 = wall_seconds();
  const LabelMatrix relabel_serial =
      relabel_pass(maze_serial, labels, fprev, Execution::Serial);
  t1 = wall_seconds();
  const LabelMatrix relabel_parallel =
      relabel_pass(maze_serial, labels, fprev, Execution::Parallel);
  t2 = wall_seconds();
  ok = same_labels(relabel_serial, relabel_parallel);
  failures += !ok;
  report("relabel pass", t1 - t0, t2 - t1, ok);

  const StagePolicy uniform =
      uniform_policy(maze_mdp.horizon, maze_mdp.num_states, maze_mdp.num_actions);
  t0 = wall_seconds();
  const double mc_serial =
      monte_carlo_eval(maze_mdp, uniform, n, 17, Execution::Serial);
  t1 = wall_seconds();
  const double mc_parallel =
      monte_carlo_eval(maze_mdp, uniform, n, 17, Execution::Parallel);
  t2 = wall_seconds();
  ok = mc_serial == mc_parallel;
  failures += !ok;
  report("mc eval", t1 - t0, t2 - t1, ok);

  return failures ? 1 : 0;
}
