#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "r2csl/data.hpp"
#include "r2csl/estimators.hpp"
#include "r2csl/mdp.hpp"

namespace r2csl {

/// Exact finite-horizon value tables. v is (horizon+1) x S with v[horizon]=0,
/// q is horizon x S x A.
struct ValueTables {
  int horizon = 0;
  int num_states = 0;
  int num_actions = 0;
  std::vector<double> v;
  std::vector<double> q;

  double value(int h, int s) const {
    return v[static_cast<std::size_t>(h) * num_states + s];
  }
  double qvalue(int h, int s, int a) const {
    return q[(static_cast<std::size_t>(h) * num_states + s) * num_actions + a];
  }
};

/// Unconstrained backward induction.
ValueTables value_iteration(const Mdp& mdp);

/// Backward induction with the max restricted to beta-supported actions.
ValueTables beta_constrained_dp(const Mdp& mdp, const BehaviorPolicy& beta);

double expected_initial_value(const ValueTables& tables, const Mdp& mdp);

/// Exact evaluation of a stage policy: state values by backward recursion and
/// stage occupancies by forward propagation. `value` comes from the backward
/// pass so that point-mass policies reproduce the DP arithmetic bit for bit.
struct EvalResult {
  double value = 0.0;
  std::vector<double> v;          // (horizon+1) x S
  std::vector<double> occupancy;  // horizon x S, each stage sums to 1
};
EvalResult exact_policy_eval(const Mdp& mdp, const StagePolicy& policy);

/// Monte Carlo evaluation; episode i uses derive_stream(seed, i). forced_start
/// >= 0 replaces the initial distribution with a point mass.
double monte_carlo_eval(const Mdp& mdp, const StagePolicy& policy,
                        std::int64_t episodes, std::uint64_t seed,
                        Execution exec = Execution::Parallel,
                        int forced_start = -1);

/// Exact distributions of the return-to-go under beta, one sorted map per
/// (s,h) cell keyed by quantized return. Each atom keeps a representative
/// double value alongside its probability. Deterministic MDPs only. The total
/// number of map entries is capped; exceeding the cap throws.
struct ReturnAtom {
  double g = 0.0;
  double p = 0.0;
};
struct ReturnDistributions {
  int horizon = 0;
  int num_states = 0;
  double resolution = kDefaultResolution;
  std::vector<std::map<std::int64_t, ReturnAtom>> cells;  // P(G_h = g | s_h = s)

  const std::map<std::int64_t, ReturnAtom>& cell(int h, int s) const {
    return cells[static_cast<std::size_t>(h) * num_states + s];
  }
};
ReturnDistributions return_distributions(const Mdp& mdp, const BehaviorPolicy& beta,
                                         double resolution = kDefaultResolution,
                                         std::int64_t size_bound = 2000000);

/// Population-exact optimal in-distribution return: per beta-reachable (s,h),
/// the max return-to-go over beta-supported continuations. For deterministic
/// MDPs equals the beta-constrained DP values on the reachable set.
StageTable exact_fstar_population(const Mdp& mdp, const BehaviorPolicy& beta,
                                  double resolution = kDefaultResolution);

/// Trajectory-set variant: max observed return-to-go per (s,h) over an
/// explicit trajectory list.
StageTable exact_fstar_trajectories(const std::vector<Trajectory>& trajectories,
                                    int horizon, int num_states,
                                    double resolution = kDefaultResolution);

/// Exact conditional action distribution P(a | s_h = s, G_h = g) under beta.
/// Throws EmptyCondition when no supported continuation attains g.
std::vector<double> exact_conditional(const Mdp& mdp, const BehaviorPolicy& beta,
                                      int h, int s, double g,
                                      double resolution = kDefaultResolution,
                                      std::int64_t size_bound = 2000000);

/// The stitched reference policy: condition every reachable (s,h) on the
/// population-exact optimal return. Unreachable cells act uniformly (they have
/// zero occupancy under the policy itself).
StagePolicy stitched_reference_policy(const Mdp& mdp, const BehaviorPolicy& beta,
                                      double resolution = kDefaultResolution);

/// Exact per-(s,h) probability that the return-to-go attains the population
/// optimum, min over reachable cells; the coverage constant behind the sample
/// bound.
double exact_coverage_constant(const Mdp& mdp, const BehaviorPolicy& beta,
                               double resolution = kDefaultResolution);

/// Exact evaluation of the return-conditioned baseline controller by forward
/// propagation over (state, target-return) pairs. Deterministic action choice
/// aside, the augmented support is finite; exceeding the bound throws.
double exact_controller_eval(const Mdp& mdp, const BaselineController& controller,
                             double resolution = kDefaultResolution,
                             std::int64_t support_bound = 1000000);

/// Verifies that no two supported trajectories sharing (s,h) but taking
/// different actions carry the same quantized return-to-go. Enumeration bound
/// as in return_distributions; oversized inputs throw TieFreeUnverifiable.
bool verify_tie_free(const Mdp& mdp, const BehaviorPolicy& beta,
                     double resolution = kDefaultResolution,
                     std::int64_t size_bound = 2000000);

/// All conditioning functions consistent along their own induced transitions,
/// together with the exact value of the policy they induce. Population
/// semantics: achievable returns come from the behavior-induced feasible set.
struct ConsistentF {
  StageTable f;
  double value = 0.0;
};
std::vector<ConsistentF> enumerate_consistent_f(const Mdp& mdp,
                                                const BehaviorPolicy& beta,
                                                double resolution = kDefaultResolution,
                                                std::int64_t size_bound = 2000000);

/// Trajectory-set semantics: achievable returns and conditionals come from an
/// explicit trajectory list.
std::vector<ConsistentF> enumerate_consistent_f(const Mdp& mdp,
                                                const std::vector<Trajectory>& trajectories,
                                                double resolution = kDefaultResolution,
                                                std::int64_t size_bound = 2000000);

}  // namespace r2csl
