#include "r2csl/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "r2csl/rng.hpp"

namespace r2csl {

namespace {

std::size_t hs_index(const Mdp& mdp, int h, int s) {
  return static_cast<std::size_t>(h) * mdp.num_states + s;
}

void check_match(const Mdp& mdp, const TabularPolicy& policy, const char* what) {
  if (policy.horizon != mdp.horizon || policy.num_states != mdp.num_states ||
      policy.num_actions != mdp.num_actions)
    fail(ErrorKind::ShapeMismatch, std::string(what) + " does not match the MDP");
}

void require_deterministic(const Mdp& mdp, const char* what) {
  if (!mdp.deterministic)
    fail(ErrorKind::MissingOracle,
         std::string(what) + " is only exact for deterministic dynamics");
}

// (s,h) cells with positive visit probability under beta from the initial
// distribution.
std::vector<std::uint8_t> reachable_cells(const Mdp& mdp, const BehaviorPolicy& beta) {
  std::vector<std::uint8_t> reach(
      static_cast<std::size_t>(mdp.horizon) * mdp.num_states, 0);
  std::vector<std::uint8_t> cur(mdp.num_states, 0);
  for (int s = 0; s < mdp.num_states; ++s)
    if (mdp.initial_dist[s] > 0.0) cur[s] = 1;
  for (int h = 0; h < mdp.horizon; ++h) {
    std::vector<std::uint8_t> next(mdp.num_states, 0);
    for (int s = 0; s < mdp.num_states; ++s) {
      if (!cur[s]) continue;
      reach[hs_index(mdp, h, s)] = 1;
      for (int a = 0; a < mdp.num_actions; ++a) {
        if (beta.at(h, s, a) <= 0.0) continue;
        if (mdp.deterministic) {
          next[mdp.next_state(h, s, a)] = 1;
        } else {
          const double* row = mdp.transition_row(h, s, a);
          for (int t = 0; t < mdp.num_states; ++t)
            if (row[t] > 0.0) next[t] = 1;
        }
      }
    }
    cur = std::move(next);
  }
  return reach;
}

}  // namespace

ValueTables value_iteration(const Mdp& mdp) {
  ValueTables t;
  t.horizon = mdp.horizon;
  t.num_states = mdp.num_states;
  t.num_actions = mdp.num_actions;
  t.v.assign(static_cast<std::size_t>(mdp.horizon + 1) * mdp.num_states, 0.0);
  t.q.assign(static_cast<std::size_t>(mdp.horizon) * mdp.num_states * mdp.num_actions,
             0.0);
  for (int h = mdp.horizon - 1; h >= 0; --h)
    for (int s = 0; s < mdp.num_states; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < mdp.num_actions; ++a) {
        double future;
        if (mdp.deterministic) {
          future = t.value(h + 1, mdp.next_state(h, s, a));
        } else {
          future = 0.0;
          const double* row = mdp.transition_row(h, s, a);
          for (int u = 0; u < mdp.num_states; ++u)
            future += row[u] * t.value(h + 1, u);
        }
        const double q = mdp.reward_at(h, s, a) + future;
        t.q[(static_cast<std::size_t>(h) * mdp.num_states + s) * mdp.num_actions + a] = q;
        best = std::max(best, q);
      }
      t.v[static_cast<std::size_t>(h) * mdp.num_states + s] = best;
    }
  return t;
}

ValueTables beta_constrained_dp(const Mdp& mdp, const BehaviorPolicy& beta) {
  check_match(mdp, beta, "behavior policy");
  ValueTables t;
  t.horizon = mdp.horizon;
  t.num_states = mdp.num_states;
  t.num_actions = mdp.num_actions;
  t.v.assign(static_cast<std::size_t>(mdp.horizon + 1) * mdp.num_states, 0.0);
  t.q.assign(static_cast<std::size_t>(mdp.horizon) * mdp.num_states * mdp.num_actions,
             0.0);
  for (int h = mdp.horizon - 1; h >= 0; --h)
    for (int s = 0; s < mdp.num_states; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      bool any = false;
      for (int a = 0; a < mdp.num_actions; ++a) {
        double future;
        if (mdp.deterministic) {
          future = t.value(h + 1, mdp.next_state(h, s, a));
        } else {
          future = 0.0;
          const double* row = mdp.transition_row(h, s, a);
          for (int u = 0; u < mdp.num_states; ++u)
            future += row[u] * t.value(h + 1, u);
        }
        const double q = mdp.reward_at(h, s, a) + future;
        t.q[(static_cast<std::size_t>(h) * mdp.num_states + s) * mdp.num_actions + a] = q;
        if (beta.at(h, s, a) > 0.0) {
          best = std::max(best, q);
          any = true;
        }
      }
      if (!any)
        fail(ErrorKind::EmptySupport, "behavior supports no action at a cell");
      t.v[static_cast<std::size_t>(h) * mdp.num_states + s] = best;
    }
  return t;
}

double expected_initial_value(const ValueTables& tables, const Mdp& mdp) {
  double j = 0.0;
  for (int s = 0; s < mdp.num_states; ++s)
    if (mdp.initial_dist[s] > 0.0) j += mdp.initial_dist[s] * tables.value(0, s);
  return j;
}

EvalResult exact_policy_eval(const Mdp& mdp, const StagePolicy& policy) {
  check_match(mdp, policy, "stage policy");
  EvalResult out;
  out.v.assign(static_cast<std::size_t>(mdp.horizon + 1) * mdp.num_states, 0.0);
  out.occupancy.assign(static_cast<std::size_t>(mdp.horizon) * mdp.num_states, 0.0);
  for (int h = mdp.horizon - 1; h >= 0; --h)
    for (int s = 0; s < mdp.num_states; ++s) {
      double v = 0.0;
      for (int a = 0; a < mdp.num_actions; ++a) {
        const double pa = policy.at(h, s, a);
        if (pa <= 0.0) continue;
        double future;
        if (mdp.deterministic) {
          future = out.v[static_cast<std::size_t>(h + 1) * mdp.num_states +
                         mdp.next_state(h, s, a)];
        } else {
          future = 0.0;
          const double* row = mdp.transition_row(h, s, a);
          for (int u = 0; u < mdp.num_states; ++u)
            future += row[u] * out.v[static_cast<std::size_t>(h + 1) * mdp.num_states + u];
        }
        v += pa * (mdp.reward_at(h, s, a) + future);
      }
      out.v[static_cast<std::size_t>(h) * mdp.num_states + s] = v;
    }
  // forward occupancies
  std::vector<double> cur = mdp.initial_dist;
  for (int h = 0; h < mdp.horizon; ++h) {
    std::copy(cur.begin(), cur.end(),
              out.occupancy.begin() + static_cast<std::size_t>(h) * mdp.num_states);
    std::vector<double> next(mdp.num_states, 0.0);
    for (int s = 0; s < mdp.num_states; ++s) {
      if (cur[s] <= 0.0) continue;
      for (int a = 0; a < mdp.num_actions; ++a) {
        const double w = cur[s] * policy.at(h, s, a);
        if (w <= 0.0) continue;
        if (mdp.deterministic) {
          next[mdp.next_state(h, s, a)] += w;
        } else {
          const double* row = mdp.transition_row(h, s, a);
          for (int u = 0; u < mdp.num_states; ++u) next[u] += w * row[u];
        }
      }
    }
    cur = std::move(next);
  }
  double j = 0.0;
  for (int s = 0; s < mdp.num_states; ++s)
    if (mdp.initial_dist[s] > 0.0)
      j += mdp.initial_dist[s] * out.v[s];
  out.value = j;
  return out;
}

double monte_carlo_eval(const Mdp& mdp, const StagePolicy& policy,
                        std::int64_t episodes, std::uint64_t seed, Execution exec,
                        int forced_start) {
  check_match(mdp, policy, "stage policy");
  if (episodes <= 0) fail(ErrorKind::InvalidConfig, "episode count must be positive");
  std::vector<double> returns(static_cast<std::size_t>(episodes), 0.0);
  parallel_for(episodes, exec, [&](std::int64_t i) {
    SplitMix64 rng(derive_stream(seed, static_cast<std::uint64_t>(i)));
    int s = forced_start >= 0 ? forced_start : rng.categorical(mdp.initial_dist);
    double g = 0.0;
    for (int h = 0; h < mdp.horizon; ++h) {
      const int a = rng.categorical(policy.row(h, s), mdp.num_actions);
      g += mdp.reward_at(h, s, a);
      s = mdp.deterministic
              ? mdp.next_state(h, s, a)
              : rng.categorical(mdp.transition_row(h, s, a), mdp.num_states);
    }
    returns[static_cast<std::size_t>(i)] = g;
  });
  double total = 0.0;
  for (double g : returns) total += g;
  return total / static_cast<double>(episodes);
}

ReturnDistributions return_distributions(const Mdp& mdp, const BehaviorPolicy& beta,
                                         double resolution, std::int64_t size_bound) {
  require_deterministic(mdp, "the return distribution table");
  check_match(mdp, beta, "behavior policy");
  ReturnDistributions out;
  out.horizon = mdp.horizon;
  out.num_states = mdp.num_states;
  out.resolution = resolution;
  out.cells.resize(static_cast<std::size_t>(mdp.horizon) * mdp.num_states);
  std::int64_t atoms = 0;
  for (int h = mdp.horizon - 1; h >= 0; --h)
    for (int s = 0; s < mdp.num_states; ++s) {
      auto& cell = out.cells[hs_index(mdp, h, s)];
      for (int a = 0; a < mdp.num_actions; ++a) {
        const double pa = beta.at(h, s, a);
        if (pa <= 0.0) continue;
        const double r = mdp.reward_at(h, s, a);
        if (h == mdp.horizon - 1) {
          ReturnAtom& atom = cell[rtg_key(r, resolution)];
          if (atom.p == 0.0) atom.g = r;
          atom.p += pa;
        } else {
          const auto& child = out.cell(h + 1, mdp.next_state(h, s, a));
          for (const auto& [ck, catom] : child) {
            const double g = r + catom.g;
            ReturnAtom& atom = cell[rtg_key(g, resolution)];
            if (atom.p == 0.0) atom.g = g;
            atom.p += pa * catom.p;
          }
        }
      }
      atoms += static_cast<std::int64_t>(cell.size());
      if (atoms > size_bound)
        fail(ErrorKind::SizeBound, "return distribution support exceeds the bound");
    }
  return out;
}

StageTable exact_fstar_population(const Mdp& mdp, const BehaviorPolicy& beta,
                                  double resolution) {
  ReturnDistributions dists = return_distributions(mdp, beta, resolution);
  const std::vector<std::uint8_t> reach = reachable_cells(mdp, beta);
  StageTable f = StageTable::empty(mdp.horizon, mdp.num_states);
  for (int h = 0; h < mdp.horizon; ++h)
    for (int s = 0; s < mdp.num_states; ++s) {
      if (!reach[hs_index(mdp, h, s)]) continue;
      const auto& cell = dists.cell(h, s);
      if (cell.empty()) continue;
      f.set(h, s, cell.rbegin()->second.g);
    }
  return f;
}

StageTable exact_fstar_trajectories(const std::vector<Trajectory>& trajectories,
                                    int horizon, int num_states, double resolution) {
  (void)resolution;
  int max_s = num_states - 1;
  for (const Trajectory& traj : trajectories)
    for (const Step& st : traj.steps) max_s = std::max(max_s, st.s);
  StageTable f = StageTable::empty(horizon, max_s + 1);
  for (const Trajectory& traj : trajectories) {
    if (static_cast<int>(traj.steps.size()) != horizon ||
        traj.rtg.size() != traj.steps.size())
      fail(ErrorKind::WrongLength, "trajectory does not match the horizon");
    for (int h = 0; h < horizon; ++h) {
      const int s = traj.steps[h].s;
      if (!f.has(h, s) || traj.rtg[h] > f.at(h, s)) f.set(h, s, traj.rtg[h]);
    }
  }
  return f;
}

namespace {

// Per-action weight of the return atom at `key` in cell (s,h):
// beta(a) times the child mass that shifts onto that key.
std::vector<double> conditional_weights(const Mdp& mdp, const BehaviorPolicy& beta,
                                        const ReturnDistributions& dists, int h,
                                        int s, std::int64_t key) {
  std::vector<double> w(mdp.num_actions, 0.0);
  for (int a = 0; a < mdp.num_actions; ++a) {
    const double pa = beta.at(h, s, a);
    if (pa <= 0.0) continue;
    const double r = mdp.reward_at(h, s, a);
    if (h == mdp.horizon - 1) {
      if (rtg_key(r, dists.resolution) == key) w[a] += pa;
    } else {
      const auto& child = dists.cell(h + 1, mdp.next_state(h, s, a));
      for (const auto& [ck, catom] : child)
        if (rtg_key(r + catom.g, dists.resolution) == key) w[a] += pa * catom.p;
    }
  }
  return w;
}

}  // namespace

std::vector<double> exact_conditional(const Mdp& mdp, const BehaviorPolicy& beta,
                                      int h, int s, double g, double resolution,
                                      std::int64_t size_bound) {
  if (h < 0 || h >= mdp.horizon || s < 0 || s >= mdp.num_states)
    fail(ErrorKind::ShapeMismatch, "cell index out of range");
  ReturnDistributions dists = return_distributions(mdp, beta, resolution, size_bound);
  std::vector<double> w =
      conditional_weights(mdp, beta, dists, h, s, rtg_key(g, resolution));
  double total = 0.0;
  for (double x : w) total += x;
  if (total <= 0.0)
    fail(ErrorKind::EmptyCondition, "no supported continuation attains that return");
  for (double& x : w) x /= total;
  return w;
}

StagePolicy stitched_reference_policy(const Mdp& mdp, const BehaviorPolicy& beta,
                                      double resolution) {
  ReturnDistributions dists = return_distributions(mdp, beta, resolution);
  const std::vector<std::uint8_t> reach = reachable_cells(mdp, beta);
  StagePolicy policy = uniform_policy(mdp.horizon, mdp.num_states, mdp.num_actions);
  for (int h = 0; h < mdp.horizon; ++h)
    for (int s = 0; s < mdp.num_states; ++s) {
      if (!reach[hs_index(mdp, h, s)]) continue;
      const auto& cell = dists.cell(h, s);
      if (cell.empty()) continue;
      std::vector<double> w =
          conditional_weights(mdp, beta, dists, h, s, cell.rbegin()->first);
      double total = 0.0;
      for (double x : w) total += x;
      double* row = policy.row(h, s);
      for (int a = 0; a < mdp.num_actions; ++a) row[a] = w[a] / total;
    }
  return policy;
}

double exact_coverage_constant(const Mdp& mdp, const BehaviorPolicy& beta,
                               double resolution) {
  ReturnDistributions dists = return_distributions(mdp, beta, resolution);
  const std::vector<std::uint8_t> reach = reachable_cells(mdp, beta);
  double c = 1.0;
  bool any = false;
  for (int h = 0; h < mdp.horizon; ++h)
    for (int s = 0; s < mdp.num_states; ++s) {
      if (!reach[hs_index(mdp, h, s)]) continue;
      const auto& cell = dists.cell(h, s);
      if (cell.empty()) continue;
      c = std::min(c, cell.rbegin()->second.p);
      any = true;
    }
  if (!any) fail(ErrorKind::UnreachableState, "no reachable cells");
  return c;
}

double exact_controller_eval(const Mdp& mdp, const BaselineController& controller,
                             double resolution, std::int64_t support_bound) {
  struct Node {
    double g = 0.0;
    double p = 0.0;
  };
  std::map<std::pair<int, std::int64_t>, Node> cur;
  for (int s = 0; s < mdp.num_states; ++s) {
    if (mdp.initial_dist[s] <= 0.0) continue;
    const double g = controller.initial_target(s);
    Node& node = cur[{s, rtg_key(g, resolution)}];
    node.g = g;
    node.p += mdp.initial_dist[s];
  }
  double value = 0.0;
  for (int h = 0; h < mdp.horizon; ++h) {
    std::map<std::pair<int, std::int64_t>, Node> next;
    for (const auto& [sk, node] : cur) {
      const int s = sk.first;
      ConditionLookup lookup = conditioned_distribution(
          controller.policy, h, s, node.g, controller.num_actions_out);
      for (int a = 0; a < mdp.num_actions && a < static_cast<int>(lookup.dist.size());
           ++a) {
        const double pa = lookup.dist[a];
        if (pa <= 0.0) continue;
        const double r = mdp.reward_at(h, s, a);
        const double w = node.p * pa;
        value += w * r;
        const double g_next = node.g - r;
        auto push = [&](int t, double mass) {
          Node& dest = next[{t, rtg_key(g_next, resolution)}];
          dest.g = g_next;
          dest.p += mass;
        };
        if (mdp.deterministic) {
          push(mdp.next_state(h, s, a), w);
        } else {
          const double* row = mdp.transition_row(h, s, a);
          for (int t = 0; t < mdp.num_states; ++t)
            if (row[t] > 0.0) push(t, w * row[t]);
        }
      }
    }
    cur = std::move(next);
    if (static_cast<std::int64_t>(cur.size()) > support_bound)
      fail(ErrorKind::SizeBound, "controller support exceeds the bound");
  }
  return value;
}

bool verify_tie_free(const Mdp& mdp, const BehaviorPolicy& beta, double resolution,
                     std::int64_t size_bound) {
  require_deterministic(mdp, "tie-freeness verification");
  ReturnDistributions dists;
  try {
    dists = return_distributions(mdp, beta, resolution, size_bound);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::SizeBound)
      fail(ErrorKind::TieFreeUnverifiable, "instance too large to enumerate");
    throw;
  }
  const std::vector<std::uint8_t> reach = reachable_cells(mdp, beta);
  for (int h = 0; h < mdp.horizon; ++h)
    for (int s = 0; s < mdp.num_states; ++s) {
      if (!reach[hs_index(mdp, h, s)]) continue;
      std::map<std::int64_t, int> owner;  // return key -> action, -1 on clash
      for (int a = 0; a < mdp.num_actions; ++a) {
        if (beta.at(h, s, a) <= 0.0) continue;
        const double r = mdp.reward_at(h, s, a);
        auto claim = [&](std::int64_t key) {
          auto [it, inserted] = owner.try_emplace(key, a);
          if (!inserted && it->second != a) it->second = -1;
        };
        if (h == mdp.horizon - 1) {
          claim(rtg_key(r, resolution));
        } else {
          const auto& child = dists.cell(h + 1, mdp.next_state(h, s, a));
          for (const auto& [ck, catom] : child)
            claim(rtg_key(r + catom.g, resolution));
        }
      }
      for (const auto& [key, a] : owner)
        if (a < 0) return false;
    }
  return true;
}

namespace {

struct ConsistentSearch {
  const Mdp& mdp;
  double resolution;
  std::int64_t size_bound;

  // per cell: atom key -> (g, supported actions, forced child per action,
  // normalized conditional distribution)
  struct AtomInfo {
    double g = 0.0;
    std::vector<int> actions;
    std::vector<std::pair<int, std::int64_t>> children;  // parallel to actions
    std::vector<double> dist;                            // sized num_actions
  };
  std::vector<std::map<std::int64_t, AtomInfo>> info;
  std::vector<int> initial_states;

  std::vector<std::int64_t> assigned_key;
  std::vector<std::uint8_t> assigned;
  std::vector<double> assigned_g;
  std::vector<ConsistentF> out;

  explicit ConsistentSearch(const Mdp& m, double res, std::int64_t bound)
      : mdp(m), resolution(res), size_bound(bound) {
    const std::size_t cells =
        static_cast<std::size_t>(mdp.horizon) * mdp.num_states;
    info.resize(cells);
    assigned_key.assign(cells, 0);
    assigned.assign(cells, 0);
    assigned_g.assign(cells, 0.0);
  }

  std::size_t cell_of(int h, int s) const {
    return static_cast<std::size_t>(h) * mdp.num_states + s;
  }

  // Try f(s,h) = atom; propagate the consistency identity along every action
  // the induced conditional supports. Records touched cells in `touched` so
  // the caller can backtrack. Returns false on a forced conflict.
  bool assign(int h, int s, std::int64_t key, std::vector<std::size_t>& touched) {
    const std::size_t c = cell_of(h, s);
    if (assigned[c]) return assigned_key[c] == key;
    const auto& cell_info = info[c];
    auto it = cell_info.find(key);
    if (it == cell_info.end()) return false;
    assigned[c] = 1;
    assigned_key[c] = key;
    assigned_g[c] = it->second.g;
    touched.push_back(c);
    if (h + 1 < mdp.horizon) {
      const AtomInfo& atom = it->second;
      for (std::size_t i = 0; i < atom.actions.size(); ++i)
        if (!assign(h + 1, atom.children[i].first, atom.children[i].second, touched))
          return false;
    }
    return true;
  }

  void emit() {
    if (static_cast<std::int64_t>(out.size()) >= size_bound)
      fail(ErrorKind::SizeBound, "too many consistent conditioning functions");
    ConsistentF cf;
    cf.f = StageTable::empty(mdp.horizon, mdp.num_states);
    StagePolicy policy = uniform_policy(mdp.horizon, mdp.num_states, mdp.num_actions);
    for (int h = 0; h < mdp.horizon; ++h)
      for (int s = 0; s < mdp.num_states; ++s) {
        const std::size_t c = cell_of(h, s);
        if (!assigned[c]) continue;
        cf.f.set(h, s, assigned_g[c]);
        const AtomInfo& atom = info[c].at(assigned_key[c]);
        std::copy(atom.dist.begin(), atom.dist.end(), policy.row(h, s));
      }
    cf.value = exact_policy_eval(mdp, policy).value;
    out.push_back(std::move(cf));
  }

  void search(std::size_t i) {
    if (i == initial_states.size()) {
      emit();
      return;
    }
    const int s = initial_states[i];
    for (const auto& [key, atom] : info[cell_of(0, s)]) {
      std::vector<std::size_t> touched;
      if (assign(0, s, key, touched)) search(i + 1);
      for (std::size_t c : touched) assigned[c] = 0;
    }
  }
};

}  // namespace

std::vector<ConsistentF> enumerate_consistent_f(const Mdp& mdp,
                                                const BehaviorPolicy& beta,
                                                double resolution,
                                                std::int64_t size_bound) {
  require_deterministic(mdp, "consistent conditioning enumeration");
  ReturnDistributions dists = return_distributions(mdp, beta, resolution, size_bound);
  ConsistentSearch search(mdp, resolution, size_bound);
  for (int h = 0; h < mdp.horizon; ++h)
    for (int s = 0; s < mdp.num_states; ++s) {
      auto& cell_info = search.info[search.cell_of(h, s)];
      for (const auto& [key, atom] : dists.cell(h, s)) {
        ConsistentSearch::AtomInfo ai;
        ai.g = atom.g;
        std::vector<double> w = conditional_weights(mdp, beta, dists, h, s, key);
        double total = 0.0;
        for (double x : w) total += x;
        ai.dist.assign(mdp.num_actions, 0.0);
        for (int a = 0; a < mdp.num_actions; ++a) {
          if (w[a] <= 0.0) continue;
          ai.dist[a] = w[a] / total;
          ai.actions.push_back(a);
          const double child_g = atom.g - mdp.reward_at(h, s, a);
          ai.children.emplace_back(mdp.next_state(h, s, a),
                                   rtg_key(child_g, resolution));
        }
        cell_info.emplace(key, std::move(ai));
      }
    }
  for (int s = 0; s < mdp.num_states; ++s)
    if (mdp.initial_dist[s] > 0.0) search.initial_states.push_back(s);
  search.search(0);
  return std::move(search.out);
}

std::vector<ConsistentF> enumerate_consistent_f(
    const Mdp& mdp, const std::vector<Trajectory>& trajectories, double resolution,
    std::int64_t size_bound) {
  require_deterministic(mdp, "consistent conditioning enumeration");
  ConsistentSearch search(mdp, resolution, size_bound);
  // achievable atoms, their action counts, and forced children come straight
  // from the listed trajectories
  struct Tally {
    double g = 0.0;
    std::vector<std::uint64_t> counts;
  };
  std::vector<std::map<std::int64_t, Tally>> tallies(search.info.size());
  for (const Trajectory& traj : trajectories) {
    if (static_cast<int>(traj.steps.size()) != mdp.horizon)
      fail(ErrorKind::WrongLength, "trajectory does not match the horizon");
    for (int h = 0; h < mdp.horizon; ++h) {
      const Step& st = traj.steps[h];
      Tally& t = tallies[search.cell_of(h, st.s)][rtg_key(traj.rtg[h], resolution)];
      if (t.counts.empty()) {
        t.g = traj.rtg[h];
        t.counts.assign(mdp.num_actions, 0);
      }
      ++t.counts[st.a];
    }
  }
  for (std::size_t c = 0; c < tallies.size(); ++c) {
    const int h = static_cast<int>(c) / mdp.num_states;
    const int s = static_cast<int>(c) % mdp.num_states;
    for (const auto& [key, tally] : tallies[c]) {
      ConsistentSearch::AtomInfo ai;
      ai.g = tally.g;
      std::uint64_t total = 0;
      for (std::uint64_t n : tally.counts) total += n;
      ai.dist.assign(mdp.num_actions, 0.0);
      for (int a = 0; a < mdp.num_actions; ++a) {
        if (tally.counts[a] == 0) continue;
        ai.dist[a] = static_cast<double>(tally.counts[a]) / total;
        ai.actions.push_back(a);
        ai.children.emplace_back(mdp.next_state(h, s, a),
                                 rtg_key(tally.g - mdp.reward_at(h, s, a), resolution));
      }
      search.info[c].emplace(key, std::move(ai));
    }
  }
  std::vector<std::uint8_t> seen(mdp.num_states, 0);
  for (const Trajectory& traj : trajectories) {
    const int s = traj.steps.front().s;
    if (!seen[s]) {
      seen[s] = 1;
      search.initial_states.push_back(s);
    }
  }
  std::sort(search.initial_states.begin(), search.initial_states.end());
  search.search(0);
  return std::move(search.out);
}

}  // namespace r2csl
