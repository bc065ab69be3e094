#include "r2csl/cli.hpp"

#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "r2csl/data.hpp"
#include "r2csl/env_zoo.hpp"
#include "r2csl/estimators.hpp"
#include "r2csl/mdp.hpp"
#include "r2csl/oracle.hpp"
#include "r2csl/relabel.hpp"
#include "r2csl/rng.hpp"
#include "r2csl/sweep.hpp"

namespace r2csl::cli {

namespace {

using ojson = nlohmann::ordered_json;
using json = nlohmann::json;

// Stages are 1-based in every file format and 0-based in memory.

void emit(const ojson& doc, const std::string& out_path) {
  const std::string text = doc.dump(2) + "\n";
  if (out_path.empty())
    std::cout << text;
  else
    write_text_file(out_path, text);
}

ojson stage_table_to_ojson(const StageTable& table) {
  ojson entries = ojson::array();
  for (int h = 0; h < table.horizon; ++h)
    for (int s = 0; s < table.num_states; ++s)
      if (table.has(h, s)) {
        ojson e;
        e["h"] = h + 1;
        e["s"] = s;
        e["g"] = table.at(h, s);
        entries.push_back(std::move(e));
      }
  return entries;
}

StageTable stage_table_from_json(const json& entries, int horizon, int num_states) {
  StageTable table = StageTable::empty(horizon, num_states);
  for (const auto& e : entries) {
    const int h = e.at("h").get<int>() - 1;
    const int s = e.at("s").get<int>();
    if (h < 0 || h >= horizon || s < 0 || s >= num_states)
      fail(ErrorKind::SchemaError, "table entry out of range");
    table.set(h, s, e.at("g").get<double>());
  }
  return table;
}

ojson policy_to_ojson(const ReturnConditionedPolicy& policy) {
  ojson cells = ojson::array();
  for (int h = 0; h < policy.horizon; ++h)
    for (int s = 0; s < policy.num_states; ++s) {
      const auto& cell = policy.cell(h, s);
      if (cell.entries.empty()) continue;
      ojson c;
      c["h"] = h + 1;
      c["s"] = s;
      ojson entries = ojson::array();
      for (const auto& entry : cell.entries) {
        ojson e;
        e["g"] = entry.g;
        e["count"] = entry.count;
        e["dist"] = entry.dist;
        entries.push_back(std::move(e));
      }
      c["entries"] = std::move(entries);
      cells.push_back(std::move(c));
    }
  return cells;
}

ReturnConditionedPolicy policy_from_json(const json& cells, int horizon,
                                         int num_states, int num_actions,
                                         double resolution) {
  ReturnConditionedPolicy policy;
  policy.horizon = horizon;
  policy.num_states = num_states;
  policy.num_actions = num_actions;
  policy.resolution = resolution;
  policy.cells.resize(static_cast<std::size_t>(horizon) * num_states);
  for (const auto& c : cells) {
    const int h = c.at("h").get<int>() - 1;
    const int s = c.at("s").get<int>();
    if (h < 0 || h >= horizon || s < 0 || s >= num_states)
      fail(ErrorKind::SchemaError, "policy cell out of range");
    auto& cell = policy.cells[static_cast<std::size_t>(h) * num_states + s];
    for (const auto& e : c.at("entries")) {
      ReturnConditionedPolicy::Entry entry;
      entry.g = e.at("g").get<double>();
      entry.key = rtg_key(entry.g, resolution);
      entry.count = e.at("count").get<std::uint64_t>();
      entry.dist = e.at("dist").get<std::vector<double>>();
      if (static_cast<int>(entry.dist.size()) != num_actions)
        fail(ErrorKind::SchemaError, "policy row width does not match num_actions");
      cell.entries.push_back(std::move(entry));
    }
    std::sort(cell.entries.begin(), cell.entries.end(),
              [](const auto& a, const auto& b) { return a.key < b.key; });
  }
  return policy;
}

struct Model {
  std::string controller;  // table-conditioned | target-tracking-max | -fraction
  std::string estimator;
  double alpha = 0.0;
  int passes = 0;
  double resolution = kDefaultResolution;
  ReturnConditionedPolicy policy;
  ConditioningTable conditioning;
  double phi = 0.0;
  double fraction_g = 0.0;
  StageTable initial_max;
};

std::string model_to_json(const Model& model) {
  ojson doc;
  doc["format"] = "r2csl-model";
  doc["version"] = kLibraryVersion;
  doc["controller"] = model.controller;
  doc["estimator"] = model.estimator;
  doc["alpha"] = model.alpha;
  doc["passes"] = model.passes;
  doc["resolution"] = model.resolution;
  doc["horizon"] = model.policy.horizon;
  doc["num_states"] = model.policy.num_states;
  doc["num_actions"] = model.policy.num_actions;
  doc["policy"] = policy_to_ojson(model.policy);
  if (model.controller == "table-conditioned") {
    doc["conditioning"] = stage_table_to_ojson(model.conditioning.values);
  } else {
    doc["phi"] = model.phi;
    doc["fraction_g"] = model.fraction_g;
    doc["initial_max"] = stage_table_to_ojson(model.initial_max);
  }
  return doc.dump(2) + "\n";
}

Model model_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::SchemaError, std::string("model is not valid JSON: ") + e.what());
  }
  Model model;
  try {
    if (doc.at("format").get<std::string>() != "r2csl-model")
      fail(ErrorKind::SchemaError, "not a model file");
    model.controller = doc.at("controller").get<std::string>();
    model.estimator = doc.value("estimator", std::string());
    model.alpha = doc.value("alpha", 0.0);
    model.passes = doc.value("passes", 0);
    model.resolution = doc.value("resolution", kDefaultResolution);
    const int horizon = doc.at("horizon").get<int>();
    const int num_states = doc.at("num_states").get<int>();
    const int num_actions = doc.at("num_actions").get<int>();
    model.policy = policy_from_json(doc.at("policy"), horizon, num_states,
                                    num_actions, model.resolution);
    if (model.controller == "table-conditioned") {
      model.conditioning.values =
          stage_table_from_json(doc.at("conditioning"), horizon, num_states);
      model.conditioning.estimator = model.estimator;
      model.conditioning.alpha = model.alpha;
      model.conditioning.resolution = model.resolution;
    } else if (model.controller == "target-tracking-max" ||
               model.controller == "target-tracking-fraction") {
      model.phi = doc.value("phi", 0.0);
      model.fraction_g = doc.value("fraction_g", 0.0);
      model.initial_max = stage_table_from_json(doc.at("initial_max"), 1, num_states);
    } else {
      fail(ErrorKind::SchemaError, "unknown controller " + model.controller);
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::SchemaError, std::string("bad model field: ") + e.what());
  }
  return model;
}

BehaviorPolicy resolve_beta(const std::string& spec, const Mdp& mdp) {
  if (spec == "uniform")
    return uniform_policy(mdp.horizon, mdp.num_states, mdp.num_actions);
  TabularPolicy beta = load_policy(spec);
  if (beta.horizon != mdp.horizon || beta.num_states != mdp.num_states ||
      beta.num_actions != mdp.num_actions)
    fail(ErrorKind::ShapeMismatch, "behavior policy does not match the environment");
  return beta;
}

// ---- gen-env ----

struct GenEnvOpts {
  std::string kind;
  std::string out;
  std::string beta_out;
  RandomMdpConfig random;
  bool no_tie_free = false;
  PointMazeConfig maze;
  int horizon_override = 0;
  bool seed_given = false;
};

int run_gen_env(const GenEnvOpts& opt) {
  if (opt.kind == "toy") {
    save_mdp(toy_stitch_mdp(), opt.out);
    if (!opt.beta_out.empty())
      save_policy(toy_uniform_beta(), "uniform", opt.beta_out);
    return 0;
  }
  if (opt.kind == "pointmaze") {
    PointMazeConfig maze = opt.maze;
    if (opt.horizon_override > 0) maze.horizon = opt.horizon_override;
    save_mdp(pointmaze_mdp(maze), opt.out);
    if (!opt.beta_out.empty())
      fail(ErrorKind::InvalidConfig,
           "the maze recipe is scripted; there is no policy file to write");
    return 0;
  }
  if (opt.kind != "random-det" && opt.kind != "random-stoch")
    fail(ErrorKind::InvalidConfig, "unknown --kind '" + opt.kind + "'");
  if (!opt.seed_given)
    fail(ErrorKind::InvalidConfig, "--seed is required for generated environments");
  RandomMdpConfig cfg = opt.random;
  if (opt.horizon_override > 0) cfg.horizon = opt.horizon_override;
  cfg.stochastic = opt.kind == "random-stoch";
  cfg.tie_free = !cfg.stochastic && !opt.no_tie_free;
  GeneratedEnv env =
      cfg.stochastic ? random_stochastic_mdp(cfg) : random_deterministic_mdp(cfg);
  save_mdp(env.mdp, opt.out);
  if (!opt.beta_out.empty()) save_policy(env.beta, "behavior", opt.beta_out);
  return 0;
}

// ---- gen-data ----

struct GenDataOpts {
  std::string env;
  std::string beta = "uniform";
  std::int64_t n = 0;
  std::uint64_t seed = 0;
  std::string out;
  bool pointmaze = false;
  PointMazeConfig maze;
  Execution exec = Execution::Parallel;
};

int run_gen_data(const GenDataOpts& opt) {
  if (opt.pointmaze) {
    save_dataset(pointmaze_dataset(opt.maze, opt.n, opt.seed, opt.exec), opt.out);
    return 0;
  }
  if (opt.env.empty())
    fail(ErrorKind::InvalidConfig, "--env is required unless --pointmaze is given");
  const Mdp mdp = load_mdp(opt.env);
  const BehaviorPolicy beta = resolve_beta(opt.beta, mdp);
  Dataset dataset = rollout(mdp, beta, opt.n, opt.seed, opt.exec);
  dataset.behavior_id = opt.beta == "uniform"
                            ? opt.beta
                            : std::filesystem::path(opt.beta).filename().string();
  save_dataset(dataset, opt.out);
  return 0;
}

// ---- train ----

struct TrainOpts {
  std::string data;
  std::string out;
  std::string controller = "table-conditioned";
  std::string estimator = "empirical-max";
  double alpha = 0.9;
  int passes = 0;
  double resolution = kDefaultResolution;
  int num_states = 0;
  int num_actions = 0;
  double phi = 1.0;
  Execution exec = Execution::Parallel;
};

ConditioningTable estimator_table(const DatasetIndex& index,
                                  const std::string& estimator, double alpha) {
  if (estimator == "empirical-max") return empirical_max_table(index);
  if (estimator == "expectile") return expectile_table(index, alpha);
  if (estimator == "quantile") return quantile_table(index, alpha);
  fail(ErrorKind::InvalidConfig, "unknown estimator " + estimator);
}

int run_train(const TrainOpts& opt) {
  const Dataset dataset = load_dataset(opt.data);
  Model model;
  model.controller = opt.controller;
  model.resolution = opt.resolution;
  if (opt.controller == "table-conditioned") {
    MultiStepResult ms =
        multi_step_pipeline(dataset, opt.passes, opt.resolution, opt.num_states,
                            opt.num_actions, opt.exec);
    model.estimator = opt.estimator;
    model.alpha = opt.estimator == "empirical-max" ? 0.0 : opt.alpha;
    model.passes = opt.passes;
    model.policy = std::move(ms.policy);
    model.conditioning =
        estimator_table(ms.relabeled_index, opt.estimator, opt.alpha);
  } else if (opt.controller == "target-tracking-max" ||
             opt.controller == "target-tracking-fraction") {
    if (opt.passes != 0)
      fail(ErrorKind::InvalidConfig, "target tracking trains on raw returns only");
    const DatasetIndex index =
        build_index(dataset, opt.resolution, opt.num_states, opt.num_actions);
    model.policy = fit_mle_policy(index);
    const auto mode = opt.controller == "target-tracking-max"
                          ? BaselineController::InitMode::DatasetMaxInitial
                          : BaselineController::InitMode::Fraction;
    BaselineController ctrl =
        make_rcsl_baseline(model.policy, index, mode, opt.phi);
    model.phi = ctrl.phi;
    model.fraction_g = ctrl.fraction_g;
    model.initial_max = std::move(ctrl.initial_max);
  } else {
    fail(ErrorKind::InvalidConfig, "unknown controller " + opt.controller);
  }
  write_text_file(opt.out, model_to_json(model));
  return 0;
}

// ---- eval ----

struct EvalOpts {
  std::string env;
  std::string model;
  std::string beta;  // empty: no reference column
  std::string mode = "exact";
  std::int64_t episodes = 10000;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out;
  Execution exec = Execution::Parallel;
};

int run_eval(const EvalOpts& opt) {
  const Mdp mdp = load_mdp(opt.env);
  const Model model = model_from_json(read_text_file(opt.model));
  if (opt.mode != "exact" && opt.mode != "mc")
    fail(ErrorKind::InvalidConfig, "mode must be exact or mc");
  if (opt.mode == "mc" && !opt.seed_given)
    fail(ErrorKind::InvalidConfig, "--seed is required for Monte Carlo evaluation");
  ojson doc;
  doc["env"] = mdp.name;
  doc["controller"] = model.controller;
  double j_learned = 0.0;
  if (model.controller == "table-conditioned") {
    AssembledPolicy assembled = make_r2csl_policy(
        model.policy, model.conditioning, mdp.num_actions, mdp.num_states);
    j_learned =
        opt.mode == "exact"
            ? exact_policy_eval(mdp, assembled.policy).value
            : monte_carlo_eval(mdp, assembled.policy, opt.episodes, opt.seed,
                               opt.exec);
    doc["j_learned"] = j_learned;
    ojson fb;
    fb["count"] = assembled.fallback_count;
    fb["snapped"] = assembled.snapped;
    fb["unvisited"] = assembled.unvisited;
    doc["fallbacks"] = std::move(fb);
  } else {
    if (opt.mode != "exact")
      fail(ErrorKind::InvalidConfig, "target tracking is evaluated exactly");
    BaselineController ctrl;
    ctrl.policy = model.policy;
    ctrl.mode = model.controller == "target-tracking-max"
                    ? BaselineController::InitMode::DatasetMaxInitial
                    : BaselineController::InitMode::Fraction;
    ctrl.phi = model.phi;
    ctrl.fraction_g = model.fraction_g;
    ctrl.initial_max = model.initial_max;
    ctrl.num_actions_out = std::max(mdp.num_actions, model.policy.num_actions);
    j_learned = exact_controller_eval(mdp, ctrl, model.resolution);
    doc["j_learned"] = j_learned;
  }
  if (!opt.beta.empty()) {
    const BehaviorPolicy beta = resolve_beta(opt.beta, mdp);
    const double reference =
        expected_initial_value(beta_constrained_dp(mdp, beta), mdp);
    doc["j_reference"] = reference;
    doc["suboptimality"] = reference - j_learned;
  }
  emit(doc, opt.out);
  return 0;
}

// ---- oracle ----

struct OracleOpts {
  std::string env;
  std::string beta = "uniform";
  std::string what;
  double resolution = kDefaultResolution;
  int h = 1;
  int s = 0;
  double g = 0.0;
  std::string out;
};

ojson values_to_ojson(const ValueTables& tables, const Mdp& mdp) {
  ojson doc;
  doc["j"] = expected_initial_value(tables, mdp);
  ojson v = ojson::array();
  for (int h = 0; h <= tables.horizon; ++h) {
    ojson row = ojson::array();
    for (int s = 0; s < tables.num_states; ++s)
      row.push_back(h == tables.horizon ? 0.0 : tables.value(h, s));
    v.push_back(std::move(row));
  }
  doc["v"] = std::move(v);
  return doc;
}

int run_oracle(const OracleOpts& opt) {
  const Mdp mdp = load_mdp(opt.env);
  const BehaviorPolicy beta = resolve_beta(opt.beta, mdp);
  ojson doc;
  if (opt.what == "values") {
    doc = values_to_ojson(value_iteration(mdp), mdp);
  } else if (opt.what == "constrained-values") {
    doc = values_to_ojson(beta_constrained_dp(mdp, beta), mdp);
  } else if (opt.what == "fstar") {
    doc["entries"] =
        stage_table_to_ojson(exact_fstar_population(mdp, beta, opt.resolution));
  } else if (opt.what == "coverage") {
    doc["c_tilde"] = exact_coverage_constant(mdp, beta, opt.resolution);
  } else if (opt.what == "tie-free") {
    doc["tie_free"] = verify_tie_free(mdp, beta, opt.resolution);
  } else if (opt.what == "consistent-f") {
    std::vector<ConsistentF> all =
        enumerate_consistent_f(mdp, beta, opt.resolution);
    doc["count"] = all.size();
    ojson solutions = ojson::array();
    for (const ConsistentF& cf : all) {
      ojson s;
      s["value"] = cf.value;
      s["f"] = stage_table_to_ojson(cf.f);
      solutions.push_back(std::move(s));
    }
    doc["solutions"] = std::move(solutions);
  } else if (opt.what == "conditional") {
    doc["dist"] =
        exact_conditional(mdp, beta, opt.h - 1, opt.s, opt.g, opt.resolution);
  } else {
    fail(ErrorKind::InvalidConfig, "unknown oracle query " + opt.what);
  }
  emit(doc, opt.out);
  return 0;
}

// ---- sweep ----

struct SweepOpts {
  std::string config;
  std::string out;
  std::string timings;
  Execution exec = Execution::Parallel;
};

int run_sweep_cmd(const SweepOpts& opt) {
  const SweepConfig config = sweep_config_from_json(read_text_file(opt.config));
  const SweepResult result = run_sweep(config, opt.out, opt.timings, opt.exec);
  std::cout << "rows " << result.rows.size() << ", computed " << result.computed
            << (result.any_error ? ", some cells failed\n" : "\n");
  return result.any_error ? 3 : 0;
}

// ---- trend ----

struct TrendOpts {
  RandomMdpConfig base;
  int seeds = 20;
  std::uint64_t seed = 0;
  std::vector<std::int64_t> n_values;
  std::string out_csv;
  std::string svg;
  std::string out;
  Execution exec = Execution::Parallel;
};

int run_trend(const TrendOpts& opt) {
  TrendOpts o = opt;
  if (o.n_values.empty()) o.n_values = {50, 200, 800};
  const TrendResult result = suboptimality_trend(o.base, o.n_values, o.seeds,
                                                 o.seed, kDefaultResolution, o.exec);
  if (!o.out_csv.empty()) {
    std::string csv = "n,mean_suboptimality\n";
    for (const TrendPoint& p : result.points)
      csv += std::to_string(p.n) + ',' + format_double(p.mean_suboptimality) + '\n';
    write_text_file(o.out_csv, csv);
  }
  if (!o.svg.empty()) {
    SvgSeries series;
    series.label = "mean suboptimality";
    for (const TrendPoint& p : result.points) {
      series.x.push_back(static_cast<double>(p.n));
      series.y.push_back(p.mean_suboptimality);
    }
    write_text_file(o.svg, svg_line_chart("suboptimality vs dataset size",
                                          "episodes", "mean suboptimality",
                                          {series}));
  }
  ojson doc;
  ojson points = ojson::array();
  for (const TrendPoint& p : result.points) {
    ojson e;
    e["n"] = p.n;
    e["mean_suboptimality"] = p.mean_suboptimality;
    points.push_back(std::move(e));
  }
  doc["points"] = std::move(points);
  doc["endpoints_nonincreasing"] = result.endpoints_nonincreasing;
  emit(doc, o.out);
  return 0;
}

// ---- repro-toy ----

int run_repro_toy(const std::string& out) {
  const Mdp mdp = toy_stitch_mdp();
  const Dataset data = toy_demonstrations();
  const DatasetIndex index = build_index(data, kDefaultResolution, 1, 3);
  const ReturnConditionedPolicy policy = fit_mle_policy(index);

  BaselineController baseline = make_rcsl_baseline(
      policy, index, BaselineController::InitMode::DatasetMaxInitial, 0.0, 3);
  const double j_baseline = exact_controller_eval(mdp, baseline);

  ojson doc;
  doc["env"] = mdp.name;
  doc["dataset_max_g"] = stage_table_to_ojson(empirical_max_table(index).values);
  ojson values;
  values["target-tracking-max"] = j_baseline;
  for (int k = 0; k <= 2; ++k) {
    MultiStepResult ms = multi_step_pipeline(data, k, kDefaultResolution, 1, 3);
    values["relabel-" + std::to_string(k)] =
        exact_policy_eval(mdp, ms.assembled.policy).value;
  }
  values["optimal"] = expected_initial_value(value_iteration(mdp), mdp);
  doc["values"] = std::move(values);
  emit(doc, out);
  return 0;
}

// ---- repro-pointmaze ----

struct ReproMazeOpts {
  std::string out_dir = "pointmaze-repro";
  std::uint64_t seed = 0;
  int seeds = 3;
  std::int64_t n = 4000;
  std::int64_t episodes = 400;
  Execution exec = Execution::Parallel;
};

int run_repro_pointmaze(const ReproMazeOpts& opt) {
  SweepConfig config;
  config.kind = "pointmaze";
  config.name = "pointmaze-repro";
  config.estimators = {"expectile", "quantile"};
  config.alphas = {0.85, 0.95};
  config.fractions = {0.1};
  config.maze_n = opt.n;
  config.maze_episodes = opt.episodes;
  for (int i = 0; i < opt.seeds; ++i)
    config.seeds.push_back(derive_stream(opt.seed, static_cast<std::uint64_t>(i)));
  ojson raw;
  raw["kind"] = config.kind;
  raw["name"] = config.name;
  raw["estimators"] = config.estimators;
  raw["alphas"] = config.alphas;
  raw["fractions"] = config.fractions;
  raw["maze_n"] = config.maze_n;
  raw["maze_episodes"] = config.maze_episodes;
  raw["seeds"] = config.seeds;
  config.raw_json = raw.dump();

  std::filesystem::create_directories(opt.out_dir);
  const std::string results = opt.out_dir + "/results.csv";
  const std::string timings = opt.out_dir + "/timings.csv";
  const SweepResult result = run_sweep(config, results, timings, opt.exec);

  // mean success per (estimator, alpha), one series per estimator
  std::vector<SvgSeries> series;
  for (const std::string& est : config.estimators) {
    SvgSeries s;
    s.label = est;
    for (double alpha : config.alphas) {
      double total = 0.0;
      int count = 0;
      for (const SweepRow& row : result.rows)
        if (row.estimator == est && row.alpha && *row.alpha == alpha &&
            row.j_learned) {
          total += *row.j_learned;
          ++count;
        }
      if (count) {
        s.x.push_back(alpha);
        s.y.push_back(total / count);
      }
    }
    series.push_back(std::move(s));
  }
  write_text_file(opt.out_dir + "/success.svg",
                  svg_line_chart("goal rate from the unrewarded start", "alpha",
                                 "success rate", series));
  std::cout << "wrote " << results << "\n";
  return result.any_error ? 3 : 0;
}

}  // namespace

int dispatch(int argc, const char* const* argv) {
  CLI::App app{"finite-horizon tabular offline RL: return-conditioned training, "
               "relabeling, and exact oracles"};
  app.fallthrough(true);
  app.require_subcommand(1);
  bool serial = false;
  app.add_flag("--serial", serial, "run all data-parallel kernels serially");
  app.require_subcommand(1);

  GenEnvOpts gen_env;
  auto* c_gen_env = app.add_subcommand("gen-env", "write an environment spec file");
  c_gen_env->add_option("--kind", gen_env.kind, "toy | pointmaze | random-det | random-stoch")
      ->required();
  c_gen_env->add_option("--out", gen_env.out, "environment JSON path")->required();
  c_gen_env->add_option("--beta-out", gen_env.beta_out, "behavior policy JSON path");
  c_gen_env->add_option("--states", gen_env.random.num_states, "state count");
  c_gen_env->add_option("--actions", gen_env.random.num_actions, "action count");
  c_gen_env->add_option("--horizon", gen_env.horizon_override, "episode length");
  c_gen_env->add_option("--behavior-support", gen_env.random.behavior_support,
                        "actions supported per cell");
  c_gen_env->add_option("--rho-support", gen_env.random.rho_support,
                        "initial states with positive mass");
  c_gen_env->add_flag("--no-tie-free", gen_env.no_tie_free,
                      "skip the tie-free reward reroll");
  auto* gen_env_seed = c_gen_env->add_option("--seed", gen_env.random.seed,
                                             "generator seed");
  c_gen_env->add_option("--width", gen_env.maze.width, "maze width");
  c_gen_env->add_option("--height", gen_env.maze.height, "maze height");
  c_gen_env->add_option("--goal-x", gen_env.maze.goal_x, "goal column");
  c_gen_env->add_option("--goal-y", gen_env.maze.goal_y, "goal row");

  GenDataOpts gen_data;
  auto* c_gen_data = app.add_subcommand("gen-data", "write a trajectory JSONL file");
  c_gen_data->add_option("--env", gen_data.env, "environment JSON path");
  c_gen_data->add_option("--beta", gen_data.beta, "'uniform' or a policy JSON path");
  c_gen_data->add_option("--n", gen_data.n, "episode count")->required();
  c_gen_data->add_option("--seed", gen_data.seed, "rollout seed")->required();
  c_gen_data->add_option("--out", gen_data.out, "output JSONL path")->required();
  c_gen_data->add_flag("--pointmaze", gen_data.pointmaze,
                       "use the scripted maze recipe instead of --env/--beta");
  c_gen_data->add_option("--fraction", gen_data.maze.type1_fraction,
                         "probability an episode is goal-seeking");
  c_gen_data->add_option("--noise", gen_data.maze.action_noise,
                         "per-step uniform action noise");
  c_gen_data->add_option("--maze-horizon", gen_data.maze.horizon, "maze episode length");

  TrainOpts train;
  auto* c_train = app.add_subcommand("train", "fit a model from a JSONL dataset");
  c_train->add_option("--data", train.data, "dataset JSONL path")->required();
  c_train->add_option("--out", train.out, "model JSON path")->required();
  c_train->add_option("--controller", train.controller,
                      "table-conditioned | target-tracking-max | target-tracking-fraction");
  c_train->add_option("--estimator", train.estimator,
                      "empirical-max | expectile | quantile");
  c_train->add_option("--alpha", train.alpha, "estimator level in (0,1)");
  c_train->add_option("--passes", train.passes, "relabeling passes");
  c_train->add_option("--resolution", train.resolution, "return quantization grid");
  c_train->add_option("--states", train.num_states, "state count override");
  c_train->add_option("--actions", train.num_actions, "action count override");
  c_train->add_option("--phi", train.phi, "fraction knob for target-tracking-fraction");

  EvalOpts eval;
  auto* c_eval = app.add_subcommand("eval", "evaluate a model on an environment");
  c_eval->add_option("--env", eval.env, "environment JSON path")->required();
  c_eval->add_option("--model", eval.model, "model JSON path")->required();
  c_eval->add_option("--beta", eval.beta,
                     "reference behavior ('uniform' or a path); adds j_reference");
  c_eval->add_option("--mode", eval.mode, "exact | mc");
  c_eval->add_option("--episodes", eval.episodes, "Monte Carlo episode count");
  auto* eval_seed = c_eval->add_option("--seed", eval.seed, "Monte Carlo seed");
  c_eval->add_option("--out", eval.out, "output JSON path (default stdout)");

  OracleOpts oracle;
  auto* c_oracle = app.add_subcommand("oracle", "exact quantities for an environment");
  c_oracle->add_option("--env", oracle.env, "environment JSON path")->required();
  c_oracle->add_option("--beta", oracle.beta, "'uniform' or a policy JSON path");
  c_oracle
      ->add_option("--what", oracle.what,
                   "values | constrained-values | fstar | coverage | tie-free | "
                   "consistent-f | conditional")
      ->required();
  c_oracle->add_option("--resolution", oracle.resolution, "return quantization grid");
  c_oracle->add_option("--stage", oracle.h, "stage (1-based, for conditional)");
  c_oracle->add_option("--state", oracle.s, "state (for conditional)");
  c_oracle->add_option("--g", oracle.g, "return value (for conditional)");
  c_oracle->add_option("--out", oracle.out, "output JSON path (default stdout)");

  SweepOpts sweep;
  auto* c_sweep = app.add_subcommand("sweep", "run a grid from a JSON config");
  c_sweep->add_option("--config", sweep.config, "sweep config JSON path")->required();
  c_sweep->add_option("--out", sweep.out, "results CSV path")->required();
  c_sweep->add_option("--timings", sweep.timings, "wall-time CSV sidecar path");

  TrendOpts trend;
  auto* c_trend = app.add_subcommand(
      "trend", "mean exact suboptimality across dataset sizes");
  c_trend->add_option("--seeds", trend.seeds, "environment draws to average");
  c_trend->add_option("--seed", trend.seed, "root seed")->required();
  c_trend->add_option("--n", trend.n_values, "dataset sizes (repeatable)");
  c_trend->add_option("--states", trend.base.num_states, "state count");
  c_trend->add_option("--actions", trend.base.num_actions, "action count");
  c_trend->add_option("--horizon", trend.base.horizon, "episode length");
  c_trend->add_option("--behavior-support", trend.base.behavior_support,
                      "actions supported per cell");
  c_trend->add_option("--rho-support", trend.base.rho_support,
                      "initial states with positive mass");
  c_trend->add_option("--csv", trend.out_csv, "points CSV path");
  c_trend->add_option("--svg", trend.svg, "chart SVG path");
  c_trend->add_option("--out", trend.out, "output JSON path (default stdout)");

  std::string repro_toy_out;
  auto* c_repro_toy = app.add_subcommand(
      "repro-toy", "single-state stitching walkthrough with exact values");
  c_repro_toy->add_option("--out", repro_toy_out, "output JSON path (default stdout)");

  ReproMazeOpts repro_maze;
  auto* c_repro_maze = app.add_subcommand(
      "repro-pointmaze", "maze grid: estimator vs alpha success chart");
  c_repro_maze->add_option("--out-dir", repro_maze.out_dir, "output directory");
  c_repro_maze->add_option("--seed", repro_maze.seed, "root seed")->required();
  c_repro_maze->add_option("--seeds", repro_maze.seeds, "dataset draws per cell");
  c_repro_maze->add_option("--n", repro_maze.n, "episodes per dataset");
  c_repro_maze->add_option("--episodes", repro_maze.episodes,
                           "Monte Carlo evaluation episodes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  const Execution exec = serial ? Execution::Serial : Execution::Parallel;
  gen_data.exec = exec;
  train.exec = exec;
  eval.exec = exec;
  sweep.exec = exec;
  trend.exec = exec;
  repro_maze.exec = exec;
  gen_env.seed_given = gen_env_seed->count() > 0;
  eval.seed_given = eval_seed->count() > 0;

  try {
    if (c_gen_env->parsed()) return run_gen_env(gen_env);
    if (c_gen_data->parsed()) return run_gen_data(gen_data);
    if (c_train->parsed()) return run_train(train);
    if (c_eval->parsed()) return run_eval(eval);
    if (c_oracle->parsed()) return run_oracle(oracle);
    if (c_sweep->parsed()) return run_sweep_cmd(sweep);
    if (c_trend->parsed()) return run_trend(trend);
    if (c_repro_toy->parsed()) return run_repro_toy(repro_toy_out);
    if (c_repro_maze->parsed()) return run_repro_pointmaze(repro_maze);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace r2csl::cli
