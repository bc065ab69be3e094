#pragma once

#include <vector>

#include "r2csl/data.hpp"
#include "r2csl/estimators.hpp"

namespace r2csl {

using LabelMatrix = std::vector<std::vector<double>>;  // [trajectory][stage]

/// One backward relabeling sweep. For each trajectory, the final stage keeps
/// its previous label; earlier stages take
///   max(r_h + fprev(s_{h+1}, h+1), r_h + label_{h+1}),
/// where fprev is the per-(s,h) empirical max of the previous labels. Labels
/// never decrease across passes. Parallel over trajectories.
LabelMatrix relabel_pass(const Dataset& dataset, const LabelMatrix& previous,
                         const StageTable& fprev,
                         Execution exec = Execution::Parallel);

/// k relabeling passes starting from the raw return-to-go annotations,
/// followed by a refit of the conditional policy on the relabeled index and a
/// final empirical-max conditioning table. k = 0 reproduces the single-step
/// pipeline exactly.
struct MultiStepResult {
  std::vector<LabelMatrix> labels;  // labels[j] = after j passes; labels[0] = rtg
  DatasetIndex relabeled_index;
  ReturnConditionedPolicy policy;
  ConditioningTable conditioning;
  AssembledPolicy assembled;
};

MultiStepResult multi_step_pipeline(const Dataset& dataset, int passes,
                                    double resolution = kDefaultResolution,
                                    int num_states = 0, int num_actions = 0,
                                    Execution exec = Execution::Parallel);

}  // namespace r2csl
