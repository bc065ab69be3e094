#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "r2csl/env_zoo.hpp"
#include "r2csl/oracle.hpp"

using namespace r2csl;
using testutil::thrown_kind;

namespace {

BehaviorPolicy toy_beta_rows(std::vector<double> row) {
  BehaviorPolicy beta = toy_uniform_beta();
  for (int h = 0; h < beta.horizon; ++h)
    std::copy(row.begin(), row.end(), beta.row(h, 0));
  return beta;
}

}  // namespace

TEST_CASE("backward induction on the stitch instance") {
  const Mdp mdp = toy_stitch_mdp();
  const ValueTables vt = value_iteration(mdp);
  CHECK(vt.qvalue(0, 0, 0) == 105.0);
  CHECK(vt.qvalue(0, 0, 1) == 100.0);
  CHECK(vt.qvalue(0, 0, 2) == 75.0);
  CHECK(vt.qvalue(1, 0, 0) == 15.0);
  CHECK(vt.qvalue(1, 0, 1) == 30.0);
  CHECK(vt.qvalue(1, 0, 2) == 35.0);
  CHECK(vt.qvalue(2, 0, 0) == 10.0);
  CHECK(vt.qvalue(2, 0, 1) == 1.0);
  CHECK(vt.qvalue(2, 0, 2) == 15.0);
  CHECK(vt.value(0, 0) == 105.0);
  CHECK(vt.value(3, 0) == 0.0);
  CHECK(expected_initial_value(vt, mdp) == 105.0);
}

TEST_CASE("support-constrained induction") {
  const Mdp mdp = toy_stitch_mdp();
  CHECK(expected_initial_value(beta_constrained_dp(mdp, toy_uniform_beta()), mdp) ==
        105.0);
  CHECK(expected_initial_value(
            beta_constrained_dp(mdp, toy_beta_rows({1.0, 0.0, 0.0})), mdp) == 80.0);
  CHECK(expected_initial_value(
            beta_constrained_dp(mdp, toy_beta_rows({0.5, 0.5, 0.0})), mdp) == 95.0);
  BehaviorPolicy dead = toy_uniform_beta();
  dead.row(1, 0)[0] = dead.row(1, 0)[1] = dead.row(1, 0)[2] = 0.0;
  CHECK(thrown_kind([&] { beta_constrained_dp(mdp, dead); }) ==
        ErrorKind::EmptySupport);
}

TEST_CASE("exact evaluation of a stochastic stage policy") {
  const Mdp mdp = toy_stitch_mdp();
  const EvalResult res = exact_policy_eval(mdp, toy_uniform_beta());
  CHECK(res.value == doctest::Approx(236.0 / 3.0).epsilon(1e-12));
  REQUIRE(res.v.size() == 4);
  REQUIRE(res.occupancy.size() == 3);
  for (double mass : res.occupancy) CHECK(mass == 1.0);
  CHECK(res.v[3] == 0.0);
  CHECK(res.v[0] == res.value);
}

TEST_CASE("monte carlo evaluation agrees with the exact value") {
  const Mdp mdp = toy_stitch_mdp();
  const StagePolicy pi = toy_uniform_beta();
  const double exact = exact_policy_eval(mdp, pi).value;
  const double serial = monte_carlo_eval(mdp, pi, 20000, 99, Execution::Serial);
  const double parallel = monte_carlo_eval(mdp, pi, 20000, 99, Execution::Parallel);
  CHECK(serial == parallel);
  CHECK(std::abs(serial - exact) < 0.5);
}

TEST_CASE("monte carlo evaluation honors a forced start state") {
  const GeneratedEnv env = random_deterministic_mdp(RandomMdpConfig{.seed = 3});
  Mdp pinned = env.mdp;
  std::fill(pinned.initial_dist.begin(), pinned.initial_dist.end(), 0.0);
  pinned.initial_dist[1] = 1.0;
  const StagePolicy pi =
      uniform_policy(env.mdp.horizon, env.mdp.num_states, env.mdp.num_actions);
  const double forced =
      monte_carlo_eval(env.mdp, pi, 4000, 17, Execution::Serial, 1);
  CHECK(std::abs(forced - exact_policy_eval(pinned, pi).value) < 0.2);
}

TEST_CASE("return-to-go distributions under the uniform behavior") {
  const Mdp mdp = toy_stitch_mdp();
  const ReturnDistributions rd = return_distributions(mdp, toy_uniform_beta());
  REQUIRE(rd.horizon == 3);

  const auto& last = rd.cell(2, 0);
  REQUIRE(last.size() == 3);
  for (const auto& [key, atom] : last) CHECK(atom.p == doctest::Approx(1.0 / 3.0));
  CHECK(last.count(rtg_key(1.0, rd.resolution)) == 1);
  CHECK(last.count(rtg_key(15.0, rd.resolution)) == 1);

  const auto& mid = rd.cell(1, 0);
  CHECK(mid.size() == 8);
  const ReturnAtom& tie = mid.at(rtg_key(30.0, rd.resolution));
  CHECK(tie.g == 30.0);
  CHECK(tie.p == doctest::Approx(2.0 / 9.0).epsilon(1e-12));

  const auto& first = rd.cell(0, 0);
  CHECK(first.size() == 19);
  CHECK(first.rbegin()->second.g == 105.0);
  CHECK(first.rbegin()->second.p == doctest::Approx(1.0 / 27.0).epsilon(1e-12));
  double total = 0.0;
  for (const auto& [key, atom] : first) total += atom.p;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

  CHECK(thrown_kind([&] {
          return_distributions(mdp, toy_uniform_beta(), kDefaultResolution, 5);
        }) == ErrorKind::SizeBound);
}

TEST_CASE("tie detection over supported trajectories") {
  const Mdp mdp = toy_stitch_mdp();
  CHECK_FALSE(verify_tie_free(mdp, toy_uniform_beta()));  // 15+15 == 20+10
  CHECK(verify_tie_free(mdp, toy_beta_rows({0.0, 1.0, 0.0})));
  const GeneratedEnv env = random_deterministic_mdp(RandomMdpConfig{.seed = 11});
  CHECK(verify_tie_free(env.mdp, env.beta));
  CHECK(thrown_kind([&] {
          verify_tie_free(mdp, toy_uniform_beta(), kDefaultResolution, 5);
        }) == ErrorKind::TieFreeUnverifiable);
}

TEST_CASE("exact action conditionals given the return-to-go") {
  const Mdp mdp = toy_stitch_mdp();
  const BehaviorPolicy beta = toy_uniform_beta();
  CHECK(exact_conditional(mdp, beta, 0, 0, 105.0) ==
        std::vector<double>{1.0, 0.0, 0.0});
  const std::vector<double> two_ways = exact_conditional(mdp, beta, 0, 0, 100.0);
  CHECK(two_ways[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));  // 70 + 30
  CHECK(two_ways[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));  // 65 + 35
  CHECK(two_ways[2] == 0.0);
  CHECK(exact_conditional(mdp, beta, 1, 0, 16.0) ==
        std::vector<double>{0.0, 1.0, 0.0});
  const std::vector<double> tie = exact_conditional(mdp, beta, 1, 0, 30.0);
  CHECK(tie[0] == 0.0);
  CHECK(tie[1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(tie[2] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(thrown_kind([&] { exact_conditional(mdp, beta, 0, 0, 43.0); }) ==
        ErrorKind::EmptyCondition);
}

TEST_CASE("population-optimal conditioning targets") {
  const Mdp mdp = toy_stitch_mdp();
  const BehaviorPolicy beta = toy_uniform_beta();
  const StageTable fstar = exact_fstar_population(mdp, beta);
  CHECK(fstar.at(0, 0) == 105.0);
  CHECK(fstar.at(1, 0) == 35.0);
  CHECK(fstar.at(2, 0) == 15.0);

  const ValueTables ref = beta_constrained_dp(mdp, beta);
  for (int h = 0; h < 3; ++h) CHECK(fstar.at(h, 0) == ref.value(h, 0));

  const StageTable observed = exact_fstar_trajectories(
      toy_demonstrations().trajectories, 3, 1);
  CHECK(observed.at(0, 0) == 81.0);
  CHECK(observed.at(1, 0) == 35.0);
  CHECK(observed.at(2, 0) == 15.0);
}

TEST_CASE("the stitched reference policy attains the constrained optimum") {
  const Mdp mdp = toy_stitch_mdp();
  const BehaviorPolicy beta = toy_uniform_beta();
  const StagePolicy ref = stitched_reference_policy(mdp, beta);
  CHECK(exact_policy_eval(mdp, ref).value ==
        expected_initial_value(beta_constrained_dp(mdp, beta), mdp));
  CHECK(ref.at(0, 0, 0) == 1.0);
  CHECK(ref.at(1, 0, 2) == 1.0);
  CHECK(ref.at(2, 0, 2) == 1.0);
}

TEST_CASE("coverage constant of the uniform behavior") {
  CHECK(exact_coverage_constant(toy_stitch_mdp(), toy_uniform_beta()) ==
        doctest::Approx(1.0 / 27.0).epsilon(1e-12));
}

TEST_CASE("consistent conditioning functions from a trajectory set") {
  const Mdp mdp = toy_stitch_mdp();
  std::vector<ConsistentF> all =
      enumerate_consistent_f(mdp, toy_demonstrations().trajectories);
  REQUIRE(all.size() == 3);
  std::vector<double> values;
  for (const ConsistentF& cf : all) values.push_back(cf.value);
  std::sort(values.begin(), values.end());
  CHECK(values == std::vector<double>{75.0, 80.0, 81.0});
  for (const ConsistentF& cf : all)
    if (cf.value == 81.0) {
      CHECK(cf.f.at(0, 0) == 81.0);
      CHECK(cf.f.at(1, 0) == 16.0);
      CHECK(cf.f.at(2, 0) == 1.0);
    }
}

TEST_CASE("population-consistent conditioning never beats the constrained optimum") {
  const GeneratedEnv env = random_deterministic_mdp(RandomMdpConfig{.seed = 7});
  const double ref =
      expected_initial_value(beta_constrained_dp(env.mdp, env.beta), env.mdp);
  const std::vector<ConsistentF> all = enumerate_consistent_f(env.mdp, env.beta);
  REQUIRE(!all.empty());
  double best = -1e300;
  for (const ConsistentF& cf : all) {
    CHECK(cf.value <= ref + 1e-12);
    best = std::max(best, cf.value);
  }
  CHECK(best == doctest::Approx(ref).epsilon(1e-12));
  CHECK(thrown_kind([&] { enumerate_consistent_f(env.mdp, env.beta,
                                                 kDefaultResolution, 1); }) ==
        ErrorKind::SizeBound);
}

TEST_CASE("exact oracles refuse stochastic dynamics") {
  const GeneratedEnv env =
      random_stochastic_mdp(RandomMdpConfig{.stochastic = true, .tie_free = false,
                                            .seed = 5});
  CHECK(thrown_kind([&] { return_distributions(env.mdp, env.beta); }) ==
        ErrorKind::MissingOracle);
  CHECK(thrown_kind([&] { verify_tie_free(env.mdp, env.beta); }) ==
        ErrorKind::MissingOracle);
  CHECK(thrown_kind([&] { enumerate_consistent_f(env.mdp, env.beta); }) ==
        ErrorKind::MissingOracle);
}
