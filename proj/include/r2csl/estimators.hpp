#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "r2csl/data.hpp"
#include "r2csl/mdp.hpp"

namespace r2csl {

/// Conditional action distribution per (s, h, quantized return). Tabular
/// maximum-likelihood fit: each cell's distribution is the empirical action
/// frequency among visits sharing that return key.
struct ReturnConditionedPolicy {
  struct Entry {
    std::int64_t key = 0;
    double g = 0.0;
    std::uint64_t count = 0;
    std::vector<double> dist;  // sized num_actions
  };
  struct Cell {
    std::vector<Entry> entries;  // sorted by key
  };

  int horizon = 0;
  int num_states = 0;
  int num_actions = 0;
  double resolution = kDefaultResolution;
  std::vector<Cell> cells;

  const Cell& cell(int h, int s) const {
    return cells[static_cast<std::size_t>(h) * num_states + s];
  }
  bool visited(int h, int s) const { return !cell(h, s).entries.empty(); }
};

ReturnConditionedPolicy fit_mle_policy(const DatasetIndex& index);

/// Average negative log-likelihood of the dataset index under an arbitrary
/// conditional policy; the MLE fit minimizes it (perturbation-tested).
double conditional_nll(const ReturnConditionedPolicy& policy, const DatasetIndex& index);

/// Estimators of the per-(s,h) optimal in-distribution return. All three are
/// defined on exactly the visited (s,h) cells.
struct ConditioningTable {
  StageTable values;
  std::string estimator;  // "empirical-max" | "expectile" | "quantile"
  double alpha = 0.0;     // meaningful for expectile/quantile
  double resolution = kDefaultResolution;
};

/// Largest observed return key per cell; output is always a member of the
/// observed multiset.
ConditioningTable empirical_max_table(const DatasetIndex& index);

/// Unique root m of  alpha * sum_{g >= m} c(g)(g - m) =
/// (1 - alpha) * sum_{g < m} c(g)(m - g), found by bisection on [min, max].
ConditioningTable expectile_table(const DatasetIndex& index, double alpha,
                                  double tol = 1e-10);

/// Smallest observed return whose empirical CDF reaches alpha; always a member
/// of the observed multiset.
ConditioningTable quantile_table(const DatasetIndex& index, double alpha);

enum class FallbackKind { None, SnappedKey, UnvisitedCell };

/// Conditioning lookup with the fallback rule: exact key hit uses the fitted
/// distribution; a missing key snaps down to the largest observed key at or
/// below it (below the minimum snaps up to the minimum); an unvisited (s,h)
/// acts uniformly. Every non-exact lookup is reported so callers can count it.
struct ConditionLookup {
  std::vector<double> dist;
  FallbackKind fallback = FallbackKind::None;
};
ConditionLookup conditioned_distribution(const ReturnConditionedPolicy& policy,
                                         int h, int s, double g,
                                         int num_actions_out = 0);

/// Stage policy obtained by conditioning every cell of the table's domain on
/// its value. Cells outside the domain act uniformly. num_actions_out lets the
/// caller widen rows to the environment's action count (extra actions get
/// probability zero in fitted rows).
struct AssembledPolicy {
  StagePolicy policy;
  std::uint64_t fallback_count = 0;
  std::uint64_t snapped = 0;
  std::uint64_t unvisited = 0;
};
AssembledPolicy make_r2csl_policy(const ReturnConditionedPolicy& policy,
                                  const ConditioningTable& conditioning,
                                  int num_actions_out = 0, int num_states_out = 0);

/// Return-conditioned baseline: pick an initial target return from the data,
/// then keep the target consistent along the episode (subtract each received
/// reward). Same conditional policy and fallback rule as above.
struct BaselineController {
  enum class InitMode { DatasetMaxInitial, Fraction };

  ReturnConditionedPolicy policy;
  InitMode mode = InitMode::DatasetMaxInitial;
  double phi = 0.0;          // Fraction mode knob in [0, 1]
  double fraction_g = 0.0;   // (max - min) * phi + min over initial returns
  StageTable initial_max;    // per initial state, max observed g at stage 1
  int num_actions_out = 0;

  double initial_target(int s) const;
};

BaselineController make_rcsl_baseline(const ReturnConditionedPolicy& policy,
                                      const DatasetIndex& index,
                                      BaselineController::InitMode mode,
                                      double phi = 0.0, int num_actions_out = 0);

}  // namespace r2csl
