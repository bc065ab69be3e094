#include "r2csl/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace r2csl {

ReturnConditionedPolicy fit_mle_policy(const DatasetIndex& index) {
  ReturnConditionedPolicy policy;
  policy.horizon = index.horizon;
  policy.num_states = index.num_states;
  policy.num_actions = index.num_actions;
  policy.resolution = index.resolution;
  policy.cells.resize(index.cells.size());
  for (std::size_t c = 0; c < index.cells.size(); ++c) {
    const CellIndex& cell = index.cells[c];
    auto& entries = policy.cells[c].entries;
    entries.reserve(cell.buckets.size());
    for (const GBucket& bucket : cell.buckets) {
      ReturnConditionedPolicy::Entry entry;
      entry.key = bucket.key;
      entry.g = bucket.g;
      entry.count = bucket.count;
      entry.dist.resize(index.num_actions);
      for (int a = 0; a < index.num_actions; ++a)
        entry.dist[a] = static_cast<double>(bucket.action_counts[a]) / bucket.count;
      entries.push_back(std::move(entry));
    }
  }
  return policy;
}

double conditional_nll(const ReturnConditionedPolicy& policy,
                       const DatasetIndex& index) {
  if (policy.horizon != index.horizon || policy.num_states != index.num_states ||
      policy.num_actions != index.num_actions)
    fail(ErrorKind::ShapeMismatch, "policy does not match the index");
  double total = 0.0;
  std::uint64_t steps = 0;
  for (std::size_t c = 0; c < index.cells.size(); ++c) {
    const CellIndex& cell = index.cells[c];
    const auto& entries = policy.cells[c].entries;
    for (const GBucket& bucket : cell.buckets) {
      auto it = std::lower_bound(
          entries.begin(), entries.end(), bucket.key,
          [](const ReturnConditionedPolicy::Entry& e, std::int64_t k) {
            return e.key < k;
          });
      if (it == entries.end() || it->key != bucket.key)
        fail(ErrorKind::DomainGap, "policy lacks an observed conditioning key");
      for (int a = 0; a < index.num_actions; ++a) {
        const std::uint64_t n = bucket.action_counts[a];
        if (n == 0) continue;
        const double p = it->dist[a];
        if (p <= 0.0) return std::numeric_limits<double>::infinity();
        total -= n * std::log(p);
        steps += n;
      }
    }
  }
  return steps ? total / steps : 0.0;
}

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    fail(ErrorKind::InvalidAlpha, "alpha must lie strictly inside (0, 1)");
}

ConditioningTable make_table(const DatasetIndex& index, const char* estimator,
                             double alpha) {
  ConditioningTable t;
  t.values = StageTable::empty(index.horizon, index.num_states);
  t.estimator = estimator;
  t.alpha = alpha;
  t.resolution = index.resolution;
  return t;
}

// Root of the asymmetric-squared-loss stationarity condition on the observed
// multiset: alpha * sum_{g>=m} c(g - m) - (1-alpha) * sum_{g<m} c(m - g).
// Strictly decreasing in m, so bisection on [min, max] is exact to tol.
double cell_expectile(const CellIndex& cell, double alpha, double tol) {
  double lo = cell.buckets.front().g;
  double hi = cell.buckets.back().g;
  if (lo == hi) return lo;
  auto slack = [&](double m) {
    double up = 0.0, down = 0.0;
    for (const GBucket& b : cell.buckets) {
      if (b.g >= m)
        up += static_cast<double>(b.count) * (b.g - m);
      else
        down += static_cast<double>(b.count) * (m - b.g);
    }
    return alpha * up - (1.0 - alpha) * down;
  };
  for (int iter = 0; iter < 200 && hi - lo > tol; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (slack(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

ConditioningTable empirical_max_table(const DatasetIndex& index) {
  ConditioningTable t = make_table(index, "empirical-max", 0.0);
  for (int h = 0; h < index.horizon; ++h)
    for (int s = 0; s < index.num_states; ++s) {
      const CellIndex& cell = index.cell(h, s);
      if (cell.buckets.empty()) continue;
      t.values.set(h, s, cell.buckets.back().g);
    }
  return t;
}

ConditioningTable expectile_table(const DatasetIndex& index, double alpha, double tol) {
  check_alpha(alpha);
  if (tol <= 0.0) fail(ErrorKind::InvalidConfig, "tolerance must be positive");
  ConditioningTable t = make_table(index, "expectile", alpha);
  for (int h = 0; h < index.horizon; ++h)
    for (int s = 0; s < index.num_states; ++s) {
      const CellIndex& cell = index.cell(h, s);
      if (cell.buckets.empty()) continue;
      t.values.set(h, s, cell_expectile(cell, alpha, tol));
    }
  return t;
}

ConditioningTable quantile_table(const DatasetIndex& index, double alpha) {
  check_alpha(alpha);
  ConditioningTable t = make_table(index, "quantile", alpha);
  for (int h = 0; h < index.horizon; ++h)
    for (int s = 0; s < index.num_states; ++s) {
      const CellIndex& cell = index.cell(h, s);
      if (cell.buckets.empty()) continue;
      // Smallest observed value whose empirical CDF reaches alpha. The
      // comparison carries a relative epsilon so exact rational hits (say
      // CDF 7/10 against alpha 0.7) resolve toward the smaller value.
      const double need = alpha * static_cast<double>(cell.visits);
      const double eps = 1e-9 * std::max(1.0, need);
      std::uint64_t cum = 0;
      double picked = cell.buckets.back().g;
      for (const GBucket& b : cell.buckets) {
        cum += b.count;
        if (static_cast<double>(cum) >= need - eps) {
          picked = b.g;
          break;
        }
      }
      t.values.set(h, s, picked);
    }
  return t;
}

ConditionLookup conditioned_distribution(const ReturnConditionedPolicy& policy,
                                         int h, int s, double g,
                                         int num_actions_out) {
  const int width = std::max(num_actions_out, policy.num_actions);
  ConditionLookup out;
  if (h < 0 || h >= policy.horizon || s < 0 || s >= policy.num_states ||
      policy.cell(h, s).entries.empty()) {
    out.dist.assign(width, 1.0 / width);
    out.fallback = FallbackKind::UnvisitedCell;
    return out;
  }
  const auto& entries = policy.cell(h, s).entries;
  const std::int64_t key = rtg_key(g, policy.resolution);
  auto it = std::lower_bound(
      entries.begin(), entries.end(), key,
      [](const ReturnConditionedPolicy::Entry& e, std::int64_t k) { return e.key < k; });
  if (it != entries.end() && it->key == key) {
    out.fallback = FallbackKind::None;
  } else if (it == entries.begin()) {
    // below every observed key: snap up to the minimum
    out.fallback = FallbackKind::SnappedKey;
  } else {
    --it;  // snap down to the largest observed key at or below the target
    out.fallback = FallbackKind::SnappedKey;
  }
  out.dist.assign(width, 0.0);
  std::copy(it->dist.begin(), it->dist.end(), out.dist.begin());
  return out;
}

AssembledPolicy make_r2csl_policy(const ReturnConditionedPolicy& policy,
                                  const ConditioningTable& conditioning,
                                  int num_actions_out, int num_states_out) {
  const StageTable& f = conditioning.values;
  if (f.horizon != policy.horizon || f.num_states > policy.num_states)
    fail(ErrorKind::ShapeMismatch, "conditioning table does not match the policy");
  for (int h = 0; h < f.horizon; ++h)
    for (int s = 0; s < f.num_states; ++s)
      if (f.has(h, s) && !policy.visited(h, s))
        fail(ErrorKind::EmptyDomainPoint,
             "conditioning table is defined at an unvisited cell");

  const int width = std::max(num_actions_out, policy.num_actions);
  const int states = std::max(num_states_out, policy.num_states);
  AssembledPolicy out;
  out.policy = uniform_policy(policy.horizon, states, width);
  for (int h = 0; h < policy.horizon; ++h)
    for (int s = 0; s < f.num_states; ++s) {
      if (!f.has(h, s)) continue;
      ConditionLookup lookup =
          conditioned_distribution(policy, h, s, f.at(h, s), width);
      std::copy(lookup.dist.begin(), lookup.dist.end(), out.policy.row(h, s));
      if (lookup.fallback != FallbackKind::None) {
        ++out.fallback_count;
        if (lookup.fallback == FallbackKind::SnappedKey)
          ++out.snapped;
        else
          ++out.unvisited;
      }
    }
  return out;
}

double BaselineController::initial_target(int s) const {
  if (mode == InitMode::Fraction) return fraction_g;
  if (s < 0 || s >= initial_max.num_states || !initial_max.has(0, s))
    fail(ErrorKind::EmptyDomainPoint,
         "no initial returns observed at state " + std::to_string(s));
  return initial_max.at(0, s);
}

BaselineController make_rcsl_baseline(const ReturnConditionedPolicy& policy,
                                      const DatasetIndex& index,
                                      BaselineController::InitMode mode, double phi,
                                      int num_actions_out) {
  if (index.horizon != policy.horizon || index.num_states != policy.num_states)
    fail(ErrorKind::ShapeMismatch, "index does not match the policy");
  BaselineController ctrl;
  ctrl.policy = policy;
  ctrl.mode = mode;
  ctrl.phi = phi;
  ctrl.num_actions_out = std::max(num_actions_out, policy.num_actions);
  ctrl.initial_max = StageTable::empty(1, index.num_states);
  bool any = false;
  double lo = 0.0, hi = 0.0;
  for (int s = 0; s < index.num_states; ++s) {
    const CellIndex& cell = index.cell(0, s);
    if (cell.buckets.empty()) continue;
    ctrl.initial_max.set(0, s, cell.buckets.back().g);
    const double cell_lo = cell.buckets.front().g;
    const double cell_hi = cell.buckets.back().g;
    if (!any) {
      lo = cell_lo;
      hi = cell_hi;
      any = true;
    } else {
      lo = std::min(lo, cell_lo);
      hi = std::max(hi, cell_hi);
    }
  }
  if (!any) fail(ErrorKind::EmptyDomainPoint, "dataset has no initial stage visits");
  if (mode == BaselineController::InitMode::Fraction) {
    if (phi < 0.0 || phi > 1.0)
      fail(ErrorKind::InvalidConfig, "fraction must lie in [0, 1]");
    ctrl.fraction_g = (hi - lo) * phi + lo;
  }
  return ctrl;
}

}  // namespace r2csl
