#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "r2csl/mdp.hpp"
#include "r2csl/parallel.hpp"

namespace r2csl {

/// Trajectory collection with provenance. All trajectories share one horizon.
struct Dataset {
  int horizon = 0;
  std::vector<Trajectory> trajectories;
  std::string env_name;
  std::string behavior_id;
  std::uint64_t seed = 0;
};

/// Samples n episodes of mdp under beta. Episode i draws from substream
/// derive_stream(seed, i), so the result is independent of execution mode and
/// thread count.
Dataset rollout(const Mdp& mdp, const BehaviorPolicy& beta, std::int64_t n,
                std::uint64_t seed, Execution exec = Execution::Parallel);

// JSONL: optional {"meta": ...} header line, then one trajectory per line as
// {"steps": [{"s": int, "a": int, "r": double}, ...]}. Return-to-go values are
// recomputed on load, never trusted from the file.
void save_dataset(const Dataset& dataset, const std::string& path);
Dataset load_dataset(const std::string& path);

/// One bucket of the return-conditioned tally at a (s,h) cell.
struct GBucket {
  std::int64_t key = 0;   // rtg_key(g, resolution)
  double g = 0.0;         // representative observed value for this key
  std::uint64_t count = 0;
  std::vector<std::uint64_t> action_counts;  // sized num_actions
};

struct CellIndex {
  std::vector<GBucket> buckets;  // sorted by key
  std::uint64_t visits = 0;

  const GBucket* find(std::int64_t key) const;
};

/// Visit counts grouped by (s, h) and quantized return-to-go.
/// Invariants (checked in tests): per-cell bucket counts sum to visits,
/// per-bucket action counts sum to the bucket count, total visits at stage h
/// equal the trajectory count.
struct DatasetIndex {
  int horizon = 0;
  int num_states = 0;
  int num_actions = 0;
  double resolution = kDefaultResolution;
  std::vector<CellIndex> cells;  // cell(h*S + s)

  const CellIndex& cell(int h, int s) const {
    return cells[static_cast<std::size_t>(h) * num_states + s];
  }
  CellIndex& cell(int h, int s) {
    return cells[static_cast<std::size_t>(h) * num_states + s];
  }
};

/// Builds the index from the dataset's own rtg annotations. Dimensions are
/// inferred from the data unless explicit bounds are given.
DatasetIndex build_index(const Dataset& dataset,
                         double resolution = kDefaultResolution,
                         int num_states = 0, int num_actions = 0);

/// Same tally but with per-step labels replacing the rtg annotation;
/// labels[i][h] pairs with trajectory i step h.
DatasetIndex build_index_with_labels(const Dataset& dataset,
                                     const std::vector<std::vector<double>>& labels,
                                     double resolution = kDefaultResolution,
                                     int num_states = 0, int num_actions = 0);

/// Coverage diagnostics. c_tilde needs a reference table of per-(s,h) optimal
/// in-distribution returns (exact where available, trajectory-set otherwise);
/// cells of the reference domain with no dataset visits are reported missing,
/// not counted as zero.
struct Diagnostics {
  double d_min = 0.0;  // min over visited (s,h) of visits / N
  std::optional<double> c_tilde;
  std::vector<std::pair<int, int>> missing;  // (h, s) in reference domain, unvisited
  std::optional<double> c_star;              // max occupancy ratio, oracle-fed
};

Diagnostics diagnostics(const DatasetIndex& index, std::int64_t num_trajectories,
                        const StageTable& fstar,
                        const std::vector<double>* occupancy_opt = nullptr,
                        const std::vector<double>* occupancy_beta = nullptr);

}  // namespace r2csl
