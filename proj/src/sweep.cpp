#include "r2csl/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <sstream>

#include "json.hpp"
#include "r2csl/estimators.hpp"
#include "r2csl/oracle.hpp"
#include "r2csl/relabel.hpp"
#include "r2csl/rng.hpp"

namespace r2csl {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == std::nearbyint(v) && std::abs(v) < 1e15) {
    char ibuf[32];
    std::snprintf(ibuf, sizeof ibuf, "%lld", static_cast<long long>(v));
    return ibuf;
  }
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

namespace {

using json = nlohmann::json;

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

RandomMdpConfig random_config_from_json(const json& e) {
  RandomMdpConfig c;
  c.num_states = e.value("num_states", c.num_states);
  c.num_actions = e.value("num_actions", c.num_actions);
  c.horizon = e.value("horizon", c.horizon);
  c.stochastic = e.value("stochastic", c.stochastic);
  c.tie_free = e.value("tie_free", !c.stochastic && c.tie_free);
  c.behavior_support = e.value("behavior_support", c.behavior_support);
  c.rho_support = e.value("rho_support", c.rho_support);
  c.seed = e.value("seed", c.seed);
  if (c.stochastic && !e.contains("tie_free")) c.tie_free = false;
  return c;
}

PointMazeConfig maze_config_from_json(const json& m) {
  PointMazeConfig c;
  c.width = m.value("width", c.width);
  c.height = m.value("height", c.height);
  c.left_start_x = m.value("left_start_x", c.left_start_x);
  c.left_start_y = m.value("left_start_y", c.left_start_y);
  c.bottom_start_x = m.value("bottom_start_x", c.bottom_start_x);
  c.bottom_start_y = m.value("bottom_start_y", c.bottom_start_y);
  c.goal_x = m.value("goal_x", c.goal_x);
  c.goal_y = m.value("goal_y", c.goal_y);
  c.horizon = m.value("horizon", c.horizon);
  c.type1_fraction = m.value("type1_fraction", c.type1_fraction);
  c.action_noise = m.value("action_noise", c.action_noise);
  return c;
}

bool known_estimator(const std::string& name) {
  return name == "empirical-max" || name == "expectile" || name == "quantile";
}

}  // namespace

SweepConfig sweep_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::SchemaError, std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) fail(ErrorKind::SchemaError, "config must be a JSON object");
  SweepConfig c;
  try {
    c.kind = j.value("kind", c.kind);
    c.name = j.value("name", c.name);
    c.resolution = j.value("resolution", c.resolution);
    for (const auto& v : j.value("seeds", json::array()))
      c.seeds.push_back(v.get<std::uint64_t>());
    c.env_file = j.value("env_file", c.env_file);
    if (j.contains("env")) c.env_config = random_config_from_json(j.at("env"));
    c.beta = j.value("beta", c.beta);
    for (const auto& v : j.value("n_values", json::array()))
      c.n_values.push_back(v.get<std::int64_t>());
    for (const auto& v : j.value("alphas", json::array()))
      c.alphas.push_back(v.get<double>());
    for (const auto& v : j.value("estimators", json::array()))
      c.estimators.push_back(v.get<std::string>());
    for (const auto& v : j.value("passes", json::array()))
      c.passes.push_back(v.get<int>());
    c.eval_mode = j.value("eval_mode", c.eval_mode);
    c.eval_episodes = j.value("eval_episodes", c.eval_episodes);
    if (j.contains("maze")) c.maze = maze_config_from_json(j.at("maze"));
    for (const auto& v : j.value("fractions", json::array()))
      c.fractions.push_back(v.get<double>());
    c.maze_n = j.value("maze_n", c.maze_n);
    c.maze_episodes = j.value("maze_episodes", c.maze_episodes);
  } catch (const json::exception& e) {
    fail(ErrorKind::SchemaError, std::string("bad config field: ") + e.what());
  }
  if (c.kind != "generic" && c.kind != "pointmaze")
    fail(ErrorKind::InvalidConfig, "kind must be generic or pointmaze");
  if (c.seeds.empty()) c.seeds = {1};
  if (c.n_values.empty()) c.n_values = {1000};
  if (c.estimators.empty()) c.estimators = {"empirical-max"};
  if (c.alphas.empty()) c.alphas = {0.9};
  if (c.passes.empty()) c.passes = {0};
  if (c.fractions.empty()) c.fractions = {c.maze.type1_fraction};
  for (const std::string& e : c.estimators)
    if (!known_estimator(e))
      fail(ErrorKind::InvalidConfig, "unknown estimator " + e);
  if (c.eval_mode != "exact" && c.eval_mode != "mc")
    fail(ErrorKind::InvalidConfig, "eval_mode must be exact or mc");
  c.raw_json = j.dump();
  return c;
}

namespace {

constexpr std::uint64_t kEvalStream = 0x65766131ull;  // MC evaluation substream

ConditioningTable conditioning_for(const DatasetIndex& index,
                                   const std::string& estimator, double alpha) {
  if (estimator == "empirical-max") return empirical_max_table(index);
  if (estimator == "expectile") return expectile_table(index, alpha);
  return quantile_table(index, alpha);
}

struct PlannedCell {
  // identity columns, already formatted
  std::string env;
  std::int64_t n = 0;
  std::optional<double> alpha;
  std::string estimator;
  int passes = 0;
  std::uint64_t seed = 0;

  // generic payload
  const Mdp* mdp = nullptr;            // preloaded file env, if any
  std::optional<RandomMdpConfig> gen;  // generator config with the row seed
  // pointmaze payload
  std::optional<PointMazeConfig> maze;

  std::string key() const {
    std::string k = env;
    k += ',';
    k += std::to_string(n);
    k += ',';
    if (alpha) k += format_double(*alpha);
    k += ',';
    k += estimator;
    k += ',';
    k += std::to_string(passes);
    k += ',';
    k += std::to_string(seed);
    return k;
  }
};

void run_generic_cell(const SweepConfig& config, const PlannedCell& cell,
                      const TabularPolicy* file_beta, Execution exec, SweepRow& row) {
  Mdp generated;
  const Mdp* mdp = cell.mdp;
  BehaviorPolicy beta;
  if (cell.gen) {
    GeneratedEnv env = cell.gen->stochastic ? random_stochastic_mdp(*cell.gen)
                                            : random_deterministic_mdp(*cell.gen);
    generated = std::move(env.mdp);
    mdp = &generated;
    beta = std::move(env.beta);
  } else if (file_beta) {
    beta = *file_beta;
  } else {
    beta = uniform_policy(mdp->horizon, mdp->num_states, mdp->num_actions);
  }
  Dataset dataset = rollout(*mdp, beta, cell.n, cell.seed, exec);
  MultiStepResult ms =
      multi_step_pipeline(dataset, cell.passes, config.resolution,
                          mdp->num_states, mdp->num_actions, exec);
  ConditioningTable table = conditioning_for(ms.relabeled_index, cell.estimator,
                                             cell.alpha.value_or(0.0));
  AssembledPolicy assembled =
      make_r2csl_policy(ms.policy, table, mdp->num_actions, mdp->num_states);
  row.fallback_count = assembled.fallback_count;
  if (config.eval_mode == "exact")
    row.j_learned = exact_policy_eval(*mdp, assembled.policy).value;
  else
    row.j_learned = monte_carlo_eval(*mdp, assembled.policy, config.eval_episodes,
                                     derive_stream(cell.seed, kEvalStream), exec);
  row.j_reference = expected_initial_value(beta_constrained_dp(*mdp, beta), *mdp);
  row.suboptimality = *row.j_reference - *row.j_learned;
  if (mdp->deterministic) {
    StageTable fstar = exact_fstar_population(*mdp, beta, config.resolution);
    DatasetIndex raw = build_index(dataset, config.resolution, mdp->num_states,
                                   mdp->num_actions);
    Diagnostics diag =
        diagnostics(raw, static_cast<std::int64_t>(dataset.trajectories.size()), fstar);
    row.c_tilde_emp = diag.c_tilde;
  }
}

void run_pointmaze_cell(const SweepConfig& config, const PlannedCell& cell,
                        Execution exec, SweepRow& row) {
  const PointMazeConfig& maze = *cell.maze;
  Mdp mdp = pointmaze_mdp(maze);
  Dataset dataset = pointmaze_dataset(maze, cell.n, cell.seed, exec);
  DatasetIndex index =
      build_index(dataset, config.resolution, mdp.num_states, mdp.num_actions);
  ReturnConditionedPolicy policy = fit_mle_policy(index);
  ConditioningTable table =
      conditioning_for(index, cell.estimator, cell.alpha.value_or(0.0));
  AssembledPolicy assembled =
      make_r2csl_policy(policy, table, mdp.num_actions, mdp.num_states);
  row.fallback_count = assembled.fallback_count;
  const int bottom = pointmaze_cell(maze, maze.bottom_start_x, maze.bottom_start_y);
  row.j_learned =
      monte_carlo_eval(mdp, assembled.policy, config.maze_episodes,
                       derive_stream(cell.seed, kEvalStream), exec, bottom);
  row.j_reference = value_iteration(mdp).value(0, bottom);
  row.suboptimality = *row.j_reference - *row.j_learned;
}

std::string row_to_line(const SweepRow& row, const std::string& hash_hex) {
  std::string line = csv_escape(row.env);
  line += ',';
  line += std::to_string(row.n);
  line += ',';
  if (row.alpha) line += format_double(*row.alpha);
  line += ',';
  line += row.estimator;
  line += ',';
  line += std::to_string(row.passes);
  line += ',';
  line += std::to_string(row.seed);
  line += ',';
  if (row.j_learned) line += format_double(*row.j_learned);
  line += ',';
  if (row.j_reference) line += format_double(*row.j_reference);
  line += ',';
  if (row.suboptimality) line += format_double(*row.suboptimality);
  line += ',';
  line += std::to_string(row.fallback_count);
  line += ',';
  if (row.c_tilde_emp) line += format_double(*row.c_tilde_emp);
  line += ',';
  line += csv_escape(row.error);
  line += ',';
  line += hash_hex;
  line += ',';
  line += kLibraryVersion;
  return line;
}

constexpr const char* kResultsHeader =
    "env,n,alpha,estimator,passes,seed,j_learned,j_reference,suboptimality,"
    "fallback_count,c_tilde_emp,error,config_hash,lib_version";

}  // namespace

SweepResult run_sweep(const SweepConfig& config, const std::string& out_csv,
                      const std::string& timings_csv, Execution exec) {
  SweepResult result;
  result.config_hash = fnv1a64(config.raw_json);
  char hash_buf[17];
  std::snprintf(hash_buf, sizeof hash_buf, "%016llx",
                static_cast<unsigned long long>(result.config_hash));
  const std::string hash_hex = hash_buf;

  // plan the full grid
  Mdp file_env;
  TabularPolicy file_beta;
  bool have_file_env = false;
  bool have_file_beta = false;
  if (config.kind == "generic") {
    if (!config.env_file.empty() && config.env_config)
      fail(ErrorKind::InvalidConfig, "give env_file or env, not both");
    if (config.env_file.empty() && !config.env_config)
      fail(ErrorKind::InvalidConfig, "generic sweep needs env_file or env");
    if (!config.env_file.empty()) {
      file_env = load_mdp(config.env_file);
      have_file_env = true;
    }
    if (config.beta != "uniform") {
      file_beta = load_policy(config.beta);
      have_file_beta = true;
    }
  }
  std::vector<PlannedCell> plan;
  if (config.kind == "generic") {
    for (std::int64_t n : config.n_values)
      for (const std::string& est : config.estimators) {
        std::vector<std::optional<double>> alphas;
        if (est == "empirical-max")
          alphas.push_back(std::nullopt);
        else
          for (double a : config.alphas) alphas.push_back(a);
        for (const auto& alpha : alphas)
          for (int passes : config.passes)
            for (std::uint64_t seed : config.seeds) {
              PlannedCell cell;
              cell.n = n;
              cell.alpha = alpha;
              cell.estimator = est;
              cell.passes = passes;
              cell.seed = seed;
              if (have_file_env) {
                cell.mdp = &file_env;
                cell.env = file_env.name;
              } else {
                RandomMdpConfig gen = *config.env_config;
                gen.seed = seed;
                cell.gen = gen;
                cell.env = (gen.stochastic ? std::string("random-stoch-")
                                           : std::string("random-det-")) +
                           std::to_string(seed);
              }
              plan.push_back(std::move(cell));
            }
      }
  } else {
    for (double fraction : config.fractions)
      for (const std::string& est : config.estimators) {
        std::vector<std::optional<double>> alphas;
        if (est == "empirical-max")
          alphas.push_back(std::nullopt);
        else
          for (double a : config.alphas) alphas.push_back(a);
        for (const auto& alpha : alphas)
          for (std::uint64_t seed : config.seeds) {
            PlannedCell cell;
            PointMazeConfig maze = config.maze;
            maze.type1_fraction = fraction;
            cell.maze = maze;
            cell.env = "pointmaze-f" + format_double(fraction);
            cell.n = config.maze_n;
            cell.alpha = alpha;
            cell.estimator = est;
            cell.passes = 0;
            cell.seed = seed;
            plan.push_back(std::move(cell));
          }
      }
  }

  // restore rows from a previous run of the same config
  std::map<std::string, std::string> existing;
  if (!out_csv.empty() && std::filesystem::exists(out_csv)) {
    std::istringstream in(read_text_file(out_csv));
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
      if (first) {
        first = false;
        continue;
      }
      if (line.empty()) continue;
      const std::vector<std::string> fields = split_csv_line(line);
      if (fields.size() != 14 || fields[12] != hash_hex) continue;
      existing[fields[0] + ',' + fields[1] + ',' + fields[2] + ',' + fields[3] +
               ',' + fields[4] + ',' + fields[5]] = line;
    }
  }

  std::string body;
  std::string timings_body;
  for (const PlannedCell& cell : plan) {
    SweepRow row;
    row.env = cell.env;
    row.n = cell.n;
    row.alpha = cell.alpha;
    row.estimator = cell.estimator;
    row.passes = cell.passes;
    row.seed = cell.seed;
    const std::string key = cell.key();
    auto it = existing.find(key);
    if (it != existing.end()) {
      body += it->second;
      body += '\n';
      const std::vector<std::string> fields = split_csv_line(it->second);
      if (!fields[6].empty()) row.j_learned = std::strtod(fields[6].c_str(), nullptr);
      if (!fields[7].empty()) row.j_reference = std::strtod(fields[7].c_str(), nullptr);
      if (!fields[8].empty())
        row.suboptimality = std::strtod(fields[8].c_str(), nullptr);
      row.fallback_count = std::strtoull(fields[9].c_str(), nullptr, 10);
      if (!fields[10].empty())
        row.c_tilde_emp = std::strtod(fields[10].c_str(), nullptr);
      row.error = fields[11];
    } else {
      const double t0 = wall_seconds();
      try {
        if (config.kind == "generic")
          run_generic_cell(config, cell, have_file_beta ? &file_beta : nullptr,
                           exec, row);
        else
          run_pointmaze_cell(config, cell, exec, row);
      } catch (const Error& e) {
        row.error = error_kind_name(e.kind());
      } catch (const std::exception&) {
        row.error = "internal";
      }
      row.wall_ms = (wall_seconds() - t0) * 1e3;
      ++result.computed;
      body += row_to_line(row, hash_hex);
      body += '\n';
      timings_body += key + ',' + format_double(row.wall_ms) + '\n';
    }
    if (!row.error.empty()) result.any_error = true;
    result.rows.push_back(std::move(row));
  }
  if (!out_csv.empty())
    write_text_file(out_csv, std::string(kResultsHeader) + '\n' + body);
  if (!timings_csv.empty())
    write_text_file(timings_csv,
                    "env,n,alpha,estimator,passes,seed,wall_ms\n" + timings_body);
  return result;
}

TrendResult suboptimality_trend(const RandomMdpConfig& base,
                                const std::vector<std::int64_t>& n_values,
                                int seeds, std::uint64_t seed, double resolution,
                                Execution exec) {
  if (n_values.empty() || seeds < 1)
    fail(ErrorKind::InvalidConfig, "trend needs n values and at least one seed");
  TrendResult out;
  std::vector<double> totals(n_values.size(), 0.0);
  for (int i = 0; i < seeds; ++i) {
    RandomMdpConfig cfg = base;
    cfg.seed = derive_stream(seed, static_cast<std::uint64_t>(i));
    GeneratedEnv env = cfg.stochastic ? random_stochastic_mdp(cfg)
                                      : random_deterministic_mdp(cfg);
    const double reference =
        expected_initial_value(beta_constrained_dp(env.mdp, env.beta), env.mdp);
    const double coverage = exact_coverage_constant(env.mdp, env.beta, resolution);
    const double alpha = 1.0 - coverage / 4.0;
    for (std::size_t k = 0; k < n_values.size(); ++k) {
      Dataset dataset = rollout(env.mdp, env.beta, n_values[k],
                                derive_stream(cfg.seed, static_cast<std::uint64_t>(
                                                            n_values[k])),
                                exec);
      DatasetIndex index = build_index(dataset, resolution, env.mdp.num_states,
                                       env.mdp.num_actions);
      ReturnConditionedPolicy policy = fit_mle_policy(index);
      ConditioningTable table = quantile_table(index, alpha);
      AssembledPolicy assembled = make_r2csl_policy(
          policy, table, env.mdp.num_actions, env.mdp.num_states);
      totals[k] += reference - exact_policy_eval(env.mdp, assembled.policy).value;
    }
  }
  for (std::size_t k = 0; k < n_values.size(); ++k)
    out.points.push_back({n_values[k], totals[k] / seeds});
  out.endpoints_nonincreasing =
      out.points.front().mean_suboptimality >=
      out.points.back().mean_suboptimality - 1e-12;
  return out;
}

namespace {

constexpr const char* kSeriesColors[6] = {"#1f77b4", "#d62728", "#2ca02c",
                                          "#9467bd", "#ff7f0e", "#8c564b"};

}  // namespace

std::string svg_line_chart(const std::string& title, const std::string& x_label,
                           const std::string& y_label,
                           const std::vector<SvgSeries>& series) {
  const double width = 640.0, height = 400.0;
  const double left = 70.0, right = 610.0, top = 50.0, bottom = 350.0;
  double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
  bool any = false;
  for (const SvgSeries& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!any) {
        xmin = xmax = s.x[i];
        ymin = ymax = s.y[i];
        any = true;
      }
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  if (xmax <= xmin) xmax = xmin + 1.0;
  if (ymax <= ymin) ymax = ymin + 1.0;
  auto px = [&](double x) {
    return left + (x - xmin) / (xmax - xmin) * (right - left);
  };
  auto py = [&](double y) {
    return bottom - (y - ymin) / (ymax - ymin) * (bottom - top);
  };
  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         format_double(width) + "\" height=\"" + format_double(height) +
         "\" viewBox=\"0 0 " + format_double(width) + " " +
         format_double(height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-family=\"monospace\" "
         "font-size=\"16\">" + title + "</text>\n";
  svg += "<line x1=\"" + format_double(left) + "\" y1=\"" + format_double(bottom) +
         "\" x2=\"" + format_double(right) + "\" y2=\"" + format_double(bottom) +
         "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + format_double(left) + "\" y1=\"" + format_double(top) +
         "\" x2=\"" + format_double(left) + "\" y2=\"" + format_double(bottom) +
         "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double fx = xmin + (xmax - xmin) * t / 4.0;
    const double fy = ymin + (ymax - ymin) * t / 4.0;
    svg += "<text x=\"" + format_double(px(fx)) + "\" y=\"368\" "
           "text-anchor=\"middle\" font-family=\"monospace\" font-size=\"11\">" +
           format_double(fx) + "</text>\n";
    svg += "<text x=\"" + format_double(left - 6.0) + "\" y=\"" +
           format_double(py(fy) + 4.0) +
           "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"11\">" +
           format_double(fy) + "</text>\n";
  }
  svg += "<text x=\"320\" y=\"392\" text-anchor=\"middle\" "
         "font-family=\"monospace\" font-size=\"13\">" + x_label + "</text>\n";
  svg += "<text x=\"16\" y=\"200\" text-anchor=\"middle\" "
         "font-family=\"monospace\" font-size=\"13\" "
         "transform=\"rotate(-90 16 200)\">" + y_label + "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* color = kSeriesColors[k % 6];
    std::string points;
    for (std::size_t i = 0; i < series[k].x.size(); ++i) {
      if (i) points += ' ';
      points += format_double(px(series[k].x[i])) + "," +
                format_double(py(series[k].y[i]));
    }
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"2\" points=\"" + points + "\"/>\n";
    svg += "<text x=\"" + format_double(right - 160.0) + "\" y=\"" +
           format_double(top + 16.0 * static_cast<double>(k)) +
           "\" font-family=\"monospace\" font-size=\"12\" fill=\"" + color +
           "\">" + series[k].label + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace r2csl
