#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "r2csl/env_zoo.hpp"
#include "r2csl/parallel.hpp"

namespace r2csl {

/// Grid runner over (cell x seed). Two kinds:
///  - "generic": one environment (file or generated per config), behavior
///    rollouts of each N, every (alpha x estimator x passes) combination,
///    exact evaluation against the stitched reference where the oracle
///    applies;
///  - "pointmaze": (type1_fraction x alpha x estimator) grid, scripted
///    datasets, Monte Carlo success rate from the bottom start.
struct SweepConfig {
  std::string kind = "generic";
  std::string name = "sweep";
  double resolution = kDefaultResolution;
  std::vector<std::uint64_t> seeds;

  // generic
  std::string env_file;                 // either a spec file path ...
  std::optional<RandomMdpConfig> env_config;  // ... or a generator config
  std::string beta = "uniform";         // "uniform" or a policy file path
  std::vector<std::int64_t> n_values;
  std::vector<double> alphas;
  std::vector<std::string> estimators;  // empirical-max | expectile | quantile
  std::vector<int> passes;
  std::string eval_mode = "exact";      // "exact" | "mc"
  std::int64_t eval_episodes = 1000;

  // pointmaze
  PointMazeConfig maze;
  std::vector<double> fractions;
  std::int64_t maze_n = 4000;
  std::int64_t maze_episodes = 400;

  std::string raw_json;  // canonical config text, hashed into provenance
};

SweepConfig sweep_config_from_json(const std::string& text);

struct SweepRow {
  std::string env;
  std::int64_t n = 0;
  std::optional<double> alpha;
  std::string estimator;
  int passes = 0;
  std::uint64_t seed = 0;
  std::optional<double> j_learned;
  std::optional<double> j_reference;
  std::optional<double> suboptimality;
  std::uint64_t fallback_count = 0;
  std::optional<double> c_tilde_emp;
  std::string error;  // per-cell failures are recorded, not fatal
  double wall_ms = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::uint64_t config_hash = 0;
  int computed = 0;  // rows actually run (rest restored from an earlier file)
  bool any_error = false;
};

/// Runs all missing (cell x seed) rows, merging with any rows already present
/// in out_csv (restartable; recomputing nothing that is already there). The
/// results CSV is byte-deterministic for a given config; per-row wall time
/// goes to the optional timings CSV sidecar instead.
SweepResult run_sweep(const SweepConfig& config, const std::string& out_csv,
                      const std::string& timings_csv = "",
                      Execution exec = Execution::Parallel);

/// Mean exact suboptimality per dataset size over per-seed generated
/// environments, quantile estimator with the per-seed coverage-derived alpha.
struct TrendPoint {
  std::int64_t n = 0;
  double mean_suboptimality = 0.0;
};
struct TrendResult {
  std::vector<TrendPoint> points;
  bool endpoints_nonincreasing = false;
};
TrendResult suboptimality_trend(const RandomMdpConfig& base,
                                const std::vector<std::int64_t>& n_values,
                                int seeds, std::uint64_t seed,
                                double resolution = kDefaultResolution,
                                Execution exec = Execution::Parallel);

/// Minimal deterministic line chart; a pure function of the rows.
struct SvgSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};
std::string svg_line_chart(const std::string& title, const std::string& x_label,
                           const std::string& y_label,
                           const std::vector<SvgSeries>& series);

std::string csv_escape(const std::string& field);
std::string format_double(double v);  // shortest round-trip, deterministic

}  // namespace r2csl
