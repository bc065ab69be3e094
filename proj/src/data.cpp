#include "r2csl/data.hpp"

#include <algorithm>
#include <fstream>

#include "json.hpp"
#include "r2csl/rng.hpp"

namespace r2csl {

Dataset rollout(const Mdp& mdp, const BehaviorPolicy& beta, std::int64_t n,
                std::uint64_t seed, Execution exec) {
  if (beta.horizon != mdp.horizon || beta.num_states != mdp.num_states ||
      beta.num_actions != mdp.num_actions)
    fail(ErrorKind::ShapeMismatch, "behavior policy does not match the MDP");
  Dataset out;
  out.horizon = mdp.horizon;
  out.env_name = mdp.name;
  out.behavior_id = "behavior";
  out.seed = seed;
  out.trajectories.resize(static_cast<std::size_t>(n));
  parallel_for(n, exec, [&](std::int64_t i) {
    SplitMix64 rng(derive_stream(seed, static_cast<std::uint64_t>(i)));
    Trajectory& traj = out.trajectories[static_cast<std::size_t>(i)];
    traj.steps.resize(mdp.horizon);
    int s = rng.categorical(mdp.initial_dist);
    for (int h = 0; h < mdp.horizon; ++h) {
      int a = rng.categorical(beta.row(h, s), mdp.num_actions);
      double r = mdp.reward_at(h, s, a);
      traj.steps[h] = Step{s, a, r};
      s = mdp.deterministic ? mdp.next_state(h, s, a)
                            : rng.categorical(mdp.transition_row(h, s, a),
                                              mdp.num_states);
    }
    annotate_rtg(traj);
  });
  return out;
}

void save_dataset(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::IoError, "cannot open " + path + " for writing");
  nlohmann::ordered_json meta;
  meta["meta"] = {{"env", dataset.env_name},
                  {"behavior", dataset.behavior_id},
                  {"seed", dataset.seed},
                  {"n", dataset.trajectories.size()}};
  out << meta.dump() << "\n";
  for (const Trajectory& traj : dataset.trajectories) {
    nlohmann::ordered_json steps = nlohmann::ordered_json::array();
    for (const Step& st : traj.steps)
      steps.push_back({{"s", st.s}, {"a", st.a}, {"r", st.r}});
    nlohmann::ordered_json line;
    line["steps"] = std::move(steps);
    out << line.dump() << "\n";
  }
  if (!out) fail(ErrorKind::IoError, "short write to " + path);
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::IoError, "cannot open " + path);
  Dataset out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const std::exception& e) {
      fail(ErrorKind::SchemaError,
           path + ":" + std::to_string(lineno) + ": bad JSON: " + e.what());
    }
    if (j.contains("meta")) {
      if (lineno != 1)
        fail(ErrorKind::SchemaError, "meta line must come first in " + path);
      const auto& m = j.at("meta");
      out.env_name = m.value("env", "");
      out.behavior_id = m.value("behavior", "");
      out.seed = m.value("seed", std::uint64_t{0});
      continue;
    }
    if (!j.contains("steps"))
      fail(ErrorKind::SchemaError,
           path + ":" + std::to_string(lineno) + ": missing steps");
    Trajectory traj;
    try {
      for (const auto& st : j.at("steps")) {
        Step step;
        step.s = st.at("s").get<int>();
        step.a = st.at("a").get<int>();
        step.r = st.at("r").get<double>();
        if (step.s < 0 || step.a < 0)
          fail(ErrorKind::SchemaError, "negative state or action index");
        traj.steps.push_back(step);
      }
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      fail(ErrorKind::SchemaError,
           path + ":" + std::to_string(lineno) + ": bad step: " + e.what());
    }
    if (traj.steps.empty())
      fail(ErrorKind::SchemaError, path + ":" + std::to_string(lineno) + ": empty trajectory");
    if (out.horizon == 0) out.horizon = static_cast<int>(traj.steps.size());
    if (static_cast<int>(traj.steps.size()) != out.horizon)
      fail(ErrorKind::WrongLength,
           path + ":" + std::to_string(lineno) + ": trajectory length " +
               std::to_string(traj.steps.size()) + " != horizon " +
               std::to_string(out.horizon));
    annotate_rtg(traj);
    out.trajectories.push_back(std::move(traj));
  }
  if (out.trajectories.empty()) fail(ErrorKind::SchemaError, path + " holds no trajectories");
  return out;
}

const GBucket* CellIndex::find(std::int64_t key) const {
  auto it = std::lower_bound(buckets.begin(), buckets.end(), key,
                             [](const GBucket& b, std::int64_t k) { return b.key < k; });
  if (it == buckets.end() || it->key != key) return nullptr;
  return &*it;
}

namespace {

void tally(DatasetIndex& index, int h, int s, int a, double g) {
  CellIndex& cell = index.cell(h, s);
  const std::int64_t key = rtg_key(g, index.resolution);
  auto it = std::lower_bound(cell.buckets.begin(), cell.buckets.end(), key,
                             [](const GBucket& b, std::int64_t k) { return b.key < k; });
  if (it == cell.buckets.end() || it->key != key) {
    GBucket fresh;
    fresh.key = key;
    fresh.g = g;
    fresh.action_counts.assign(index.num_actions, 0);
    it = cell.buckets.insert(it, std::move(fresh));
  }
  ++it->count;
  ++it->action_counts[a];
  ++cell.visits;
}

DatasetIndex build_index_impl(const Dataset& dataset,
                              const std::vector<std::vector<double>>* labels,
                              double resolution, int num_states, int num_actions) {
  if (resolution <= 0.0) fail(ErrorKind::InvalidConfig, "resolution must be positive");
  if (labels && labels->size() != dataset.trajectories.size())
    fail(ErrorKind::PassMismatch, "label matrix does not match the dataset");
  int max_s = -1, max_a = -1;
  for (const Trajectory& traj : dataset.trajectories) {
    if (static_cast<int>(traj.steps.size()) != dataset.horizon)
      fail(ErrorKind::WrongLength, "trajectory length differs from dataset horizon");
    for (const Step& st : traj.steps) {
      max_s = std::max(max_s, st.s);
      max_a = std::max(max_a, st.a);
    }
  }
  DatasetIndex index;
  index.horizon = dataset.horizon;
  index.num_states = std::max(num_states, max_s + 1);
  index.num_actions = std::max(num_actions, max_a + 1);
  index.resolution = resolution;
  index.cells.resize(static_cast<std::size_t>(index.horizon) * index.num_states);
  for (std::size_t i = 0; i < dataset.trajectories.size(); ++i) {
    const Trajectory& traj = dataset.trajectories[i];
    const std::vector<double>* gs = labels ? &(*labels)[i] : &traj.rtg;
    if (gs->size() != traj.steps.size())
      fail(ErrorKind::PassMismatch, "label row does not match trajectory length");
    for (int h = 0; h < index.horizon; ++h)
      tally(index, h, traj.steps[h].s, traj.steps[h].a, (*gs)[h]);
  }
  return index;
}

}  // namespace

DatasetIndex build_index(const Dataset& dataset, double resolution, int num_states,
                         int num_actions) {
  return build_index_impl(dataset, nullptr, resolution, num_states, num_actions);
}

DatasetIndex build_index_with_labels(const Dataset& dataset,
                                     const std::vector<std::vector<double>>& labels,
                                     double resolution, int num_states,
                                     int num_actions) {
  return build_index_impl(dataset, &labels, resolution, num_states, num_actions);
}

Diagnostics diagnostics(const DatasetIndex& index, std::int64_t num_trajectories,
                        const StageTable& fstar,
                        const std::vector<double>* occupancy_opt,
                        const std::vector<double>* occupancy_beta) {
  if (num_trajectories <= 0)
    fail(ErrorKind::InvalidConfig, "diagnostics need a nonempty dataset");
  Diagnostics out;
  out.d_min = 1.0;
  bool any_visit = false;
  for (int h = 0; h < index.horizon; ++h)
    for (int s = 0; s < index.num_states; ++s) {
      const CellIndex& cell = index.cell(h, s);
      if (cell.visits == 0) continue;
      any_visit = true;
      out.d_min = std::min(out.d_min,
                           static_cast<double>(cell.visits) / num_trajectories);
    }
  if (!any_visit) fail(ErrorKind::InvalidConfig, "index holds no visits");

  if (fstar.horizon == index.horizon && fstar.num_states <= index.num_states) {
    double c = 1.0;
    bool c_defined = false;
    for (int h = 0; h < fstar.horizon; ++h)
      for (int s = 0; s < fstar.num_states; ++s) {
        if (!fstar.has(h, s)) continue;
        const CellIndex& cell = index.cell(h, s);
        if (cell.visits == 0) {
          out.missing.emplace_back(h, s);
          continue;
        }
        const GBucket* bucket = cell.find(rtg_key(fstar.at(h, s), index.resolution));
        const double mass =
            bucket ? static_cast<double>(bucket->count) / cell.visits : 0.0;
        c = std::min(c, mass);
        c_defined = true;
      }
    if (c_defined) out.c_tilde = c;
  } else if (fstar.horizon != 0) {
    fail(ErrorKind::ShapeMismatch, "reference table does not match the index");
  }

  if (occupancy_opt && occupancy_beta) {
    if (occupancy_opt->size() != occupancy_beta->size())
      fail(ErrorKind::ShapeMismatch, "occupancy tables differ in size");
    double worst = 0.0;
    for (std::size_t i = 0; i < occupancy_opt->size(); ++i) {
      if ((*occupancy_opt)[i] <= 0.0) continue;
      if ((*occupancy_beta)[i] <= 0.0)
        fail(ErrorKind::UnreachableState,
             "optimal occupancy outside the behavior's reach");
      worst = std::max(worst, (*occupancy_opt)[i] / (*occupancy_beta)[i]);
    }
    out.c_star = worst;
  }
  return out;
}

}  // namespace r2csl
