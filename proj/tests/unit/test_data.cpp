#include <algorithm>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "r2csl/data.hpp"
#include "r2csl/env_zoo.hpp"
#include "r2csl/oracle.hpp"

using namespace r2csl;
using testutil::thrown_kind;

TEST_CASE("rollout visits every toy sequence at roughly uniform frequency") {
  const Mdp mdp = toy_stitch_mdp();
  const Dataset data = rollout(mdp, toy_uniform_beta(), 27000, 17);
  REQUIRE(data.trajectories.size() == 27000);
  std::vector<int> sequence_counts(27, 0);
  for (const Trajectory& traj : data.trajectories) {
    REQUIRE(traj.steps.size() == 3);
    const int code = traj.steps[0].a * 9 + traj.steps[1].a * 3 + traj.steps[2].a;
    ++sequence_counts[code];
    CHECK(traj.steps[0].r == mdp.reward_at(0, 0, traj.steps[0].a));
  }
  for (int c : sequence_counts) {
    CHECK(c > 800);   // expected 1000 per sequence
    CHECK(c < 1200);
  }
}

TEST_CASE("episode substreams are stable when n grows") {
  const Mdp mdp = toy_stitch_mdp();
  const BehaviorPolicy beta = toy_uniform_beta();
  const Dataset small = rollout(mdp, beta, 500, 23);
  const Dataset big = rollout(mdp, beta, 1000, 23);
  for (std::size_t i = 0; i < 500; ++i) {
    CHECK(big.trajectories[i].rtg == small.trajectories[i].rtg);
    for (int h = 0; h < 3; ++h)
      CHECK(big.trajectories[i].steps[h].a == small.trajectories[i].steps[h].a);
  }
}

TEST_CASE("rollout on a stochastic environment is mode-independent") {
  RandomMdpConfig cfg;
  cfg.stochastic = true;
  cfg.tie_free = false;
  cfg.num_states = 5;
  cfg.horizon = 6;
  cfg.seed = 2;
  const GeneratedEnv env = random_stochastic_mdp(cfg);
  const Dataset a = rollout(env.mdp, env.beta, 2000, 9, Execution::Serial);
  const Dataset b = rollout(env.mdp, env.beta, 2000, 9, Execution::Parallel);
  for (std::size_t i = 0; i < a.trajectories.size(); ++i) {
    CHECK(a.trajectories[i].rtg == b.trajectories[i].rtg);
    for (int h = 0; h < 6; ++h) {
      CHECK(a.trajectories[i].steps[h].s == b.trajectories[i].steps[h].s);
      CHECK(a.trajectories[i].steps[h].a == b.trajectories[i].steps[h].a);
    }
  }
}

TEST_CASE("jsonl round trip preserves steps and recomputes annotations") {
  testutil::TempDir dir("jsonl");
  const Dataset data = pointmaze_dataset(PointMazeConfig{}, 50, 3);
  save_dataset(data, dir.file("d.jsonl"));
  const Dataset back = load_dataset(dir.file("d.jsonl"));
  CHECK(back.horizon == data.horizon);
  CHECK(back.env_name == data.env_name);
  CHECK(back.behavior_id == data.behavior_id);
  CHECK(back.seed == data.seed);
  REQUIRE(back.trajectories.size() == data.trajectories.size());
  for (std::size_t i = 0; i < data.trajectories.size(); ++i) {
    CHECK(back.trajectories[i].rtg == data.trajectories[i].rtg);
    for (std::size_t h = 0; h < 12; ++h) {
      CHECK(back.trajectories[i].steps[h].s == data.trajectories[i].steps[h].s);
      CHECK(back.trajectories[i].steps[h].a == data.trajectories[i].steps[h].a);
      CHECK(back.trajectories[i].steps[h].r == data.trajectories[i].steps[h].r);
    }
  }
}

TEST_CASE("dataset loader rejects malformed files with precise kinds") {
  testutil::TempDir dir("baddata");
  write_text_file(dir.file("a.jsonl"), "{\"steps\": [}\n");
  CHECK(thrown_kind([&] { load_dataset(dir.file("a.jsonl")); }) ==
        ErrorKind::SchemaError);

  write_text_file(dir.file("b.jsonl"),
                  "{\"meta\": {\"env\": \"x\", \"behavior\": \"y\", \"seed\": 0, "
                  "\"n\": 2}}\n"
                  "{\"steps\": [{\"s\": 0, \"a\": 0, \"r\": 1.0}]}\n"
                  "{\"steps\": [{\"s\": 0, \"a\": 0, \"r\": 1.0}, "
                  "{\"s\": 0, \"a\": 1, \"r\": 0.0}]}\n");
  CHECK(thrown_kind([&] { load_dataset(dir.file("b.jsonl")); }) ==
        ErrorKind::WrongLength);

  write_text_file(dir.file("c.jsonl"), "");
  CHECK(thrown_kind([&] { load_dataset(dir.file("c.jsonl")); }) ==
        ErrorKind::SchemaError);
}

TEST_CASE("index invariants hold and trajectory order does not matter") {
  Dataset data = pointmaze_dataset(PointMazeConfig{}, 300, 19);
  const DatasetIndex index = build_index(data, kDefaultResolution, 65, 5);

  for (int h = 0; h < index.horizon; ++h) {
    std::uint64_t stage_visits = 0;
    for (int s = 0; s < index.num_states; ++s) {
      const CellIndex& cell = index.cell(h, s);
      stage_visits += cell.visits;
      std::uint64_t bucket_total = 0;
      for (std::size_t b = 0; b < cell.buckets.size(); ++b) {
        const GBucket& bucket = cell.buckets[b];
        if (b) CHECK(bucket.key > cell.buckets[b - 1].key);
        CHECK(bucket.key == rtg_key(bucket.g, kDefaultResolution));
        bucket_total += bucket.count;
        std::uint64_t action_total = 0;
        for (std::uint64_t c : bucket.action_counts) action_total += c;
        CHECK(action_total == bucket.count);
      }
      CHECK(bucket_total == cell.visits);
    }
    CHECK(stage_visits == data.trajectories.size());
  }

  std::mt19937 shuffle_rng(99);
  std::shuffle(data.trajectories.begin(), data.trajectories.end(), shuffle_rng);
  const DatasetIndex shuffled = build_index(data, kDefaultResolution, 65, 5);
  for (int h = 0; h < index.horizon; ++h)
    for (int s = 0; s < index.num_states; ++s) {
      const CellIndex& a = index.cell(h, s);
      const CellIndex& b = shuffled.cell(h, s);
      REQUIRE(a.buckets.size() == b.buckets.size());
      CHECK(a.visits == b.visits);
      for (std::size_t k = 0; k < a.buckets.size(); ++k) {
        CHECK(a.buckets[k].key == b.buckets[k].key);
        CHECK(a.buckets[k].count == b.buckets[k].count);
        CHECK(a.buckets[k].action_counts == b.buckets[k].action_counts);
      }
    }
}

TEST_CASE("cell lookup finds exact keys only") {
  const DatasetIndex index = build_index(toy_demonstrations());
  const CellIndex& cell = index.cell(0, 0);
  REQUIRE(cell.buckets.size() == 3);
  CHECK(cell.find(rtg_key(81.0, kDefaultResolution))->g == 81.0);
  CHECK(cell.find(rtg_key(79.0, kDefaultResolution)) == nullptr);
}

TEST_CASE("index dimension inference and explicit bounds") {
  const DatasetIndex inferred = build_index(toy_demonstrations());
  CHECK(inferred.num_states == 1);
  CHECK(inferred.num_actions == 3);
  const DatasetIndex widened = build_index(toy_demonstrations(), kDefaultResolution, 4, 6);
  CHECK(widened.num_states == 4);
  CHECK(widened.num_actions == 6);
  CHECK(widened.cell(0, 0).visits == 3);
  CHECK(widened.cell(0, 3).visits == 0);
}

TEST_CASE("diagnostics report d_min, coverage, and missing reference cells") {
  const Dataset demos = toy_demonstrations();
  const DatasetIndex index = build_index(demos);
  const StageTable fstar = exact_fstar_trajectories(demos.trajectories, 3, 1);
  const Diagnostics diag = diagnostics(index, 3, fstar);
  CHECK(diag.d_min == 1.0);
  REQUIRE(diag.c_tilde.has_value());
  CHECK(*diag.c_tilde == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(diag.missing.empty());

  // reference domain cell with no visits is listed, not zeroed
  StageTable wider = fstar;
  wider = StageTable::empty(3, 2);
  for (int h = 0; h < 3; ++h) wider.set(h, 0, fstar.at(h, 0));
  wider.set(1, 1, 5.0);
  const DatasetIndex wide_index = build_index(demos, kDefaultResolution, 2, 3);
  const Diagnostics diag2 = diagnostics(wide_index, 3, wider);
  REQUIRE(diag2.missing.size() == 1);
  CHECK(diag2.missing[0] == std::pair<int, int>{1, 1});
}
