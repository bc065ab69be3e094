#include "r2csl/relabel.hpp"

#include <algorithm>

namespace r2csl {

namespace {

// Per-(s,h) empirical max of a label matrix; the between-pass target table.
StageTable label_max_table(const Dataset& dataset, const LabelMatrix& labels,
                           int num_states) {
  int max_s = num_states - 1;
  for (const Trajectory& traj : dataset.trajectories)
    for (const Step& st : traj.steps) max_s = std::max(max_s, st.s);
  StageTable table = StageTable::empty(dataset.horizon, max_s + 1);
  for (std::size_t i = 0; i < dataset.trajectories.size(); ++i) {
    const Trajectory& traj = dataset.trajectories[i];
    for (int h = 0; h < dataset.horizon; ++h) {
      const int s = traj.steps[h].s;
      const double g = labels[i][h];
      if (!table.has(h, s) || g > table.at(h, s)) table.set(h, s, g);
    }
  }
  return table;
}

}  // namespace

LabelMatrix relabel_pass(const Dataset& dataset, const LabelMatrix& previous,
                         const StageTable& fprev, Execution exec) {
  if (previous.size() != dataset.trajectories.size())
    fail(ErrorKind::PassMismatch, "label matrix does not match the dataset");
  const int H = dataset.horizon;
  LabelMatrix next(previous.size());
  parallel_for(static_cast<std::int64_t>(previous.size()), exec, [&](std::int64_t i) {
    const Trajectory& traj = dataset.trajectories[static_cast<std::size_t>(i)];
    const std::vector<double>& prev = previous[static_cast<std::size_t>(i)];
    std::vector<double>& out = next[static_cast<std::size_t>(i)];
    out.resize(H);
    out[H - 1] = prev[H - 1];
    for (int h = H - 2; h >= 0; --h) {
      const double r = traj.steps[h].r;
      const int s_next = traj.steps[h + 1].s;
      double best = r + out[h + 1];
      if (fprev.has(h + 1, s_next)) best = std::max(best, r + fprev.at(h + 1, s_next));
      out[h] = best;
    }
  });
  return next;
}

MultiStepResult multi_step_pipeline(const Dataset& dataset, int passes,
                                    double resolution, int num_states,
                                    int num_actions, Execution exec) {
  if (passes < 0) fail(ErrorKind::InvalidConfig, "pass count must be nonnegative");
  if (dataset.trajectories.empty())
    fail(ErrorKind::InvalidConfig, "dataset is empty");
  for (const Trajectory& traj : dataset.trajectories)
    if (static_cast<int>(traj.steps.size()) != dataset.horizon ||
        traj.rtg.size() != traj.steps.size())
      fail(ErrorKind::WrongLength, "trajectory length differs from dataset horizon");

  MultiStepResult result;
  LabelMatrix labels(dataset.trajectories.size());
  for (std::size_t i = 0; i < dataset.trajectories.size(); ++i)
    labels[i] = dataset.trajectories[i].rtg;
  result.labels.push_back(labels);
  for (int k = 0; k < passes; ++k) {
    StageTable fprev = label_max_table(dataset, labels, num_states);
    labels = relabel_pass(dataset, labels, fprev, exec);
    result.labels.push_back(labels);
  }
  result.relabeled_index =
      build_index_with_labels(dataset, labels, resolution, num_states, num_actions);
  result.policy = fit_mle_policy(result.relabeled_index);
  result.conditioning = empirical_max_table(result.relabeled_index);
  result.assembled = make_r2csl_policy(result.policy, result.conditioning,
                                       num_actions, num_states);
  return result;
}

}  // namespace r2csl
