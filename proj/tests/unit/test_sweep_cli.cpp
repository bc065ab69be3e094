#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "json.hpp"
#include "r2csl/cli.hpp"
#include "r2csl/sweep.hpp"

using namespace r2csl;
using testutil::TempDir;
using testutil::thrown_kind;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  CHECK(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::vector<std::string> fields_of(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("r2csl");
  for (const std::string& a : args) argv.push_back(a.c_str());
  return cli::dispatch(static_cast<int>(argv.size()), argv.data());
}

const char* kTinyConfig = R"({
  "kind": "generic",
  "name": "tiny",
  "seeds": [1, 2],
  "env": {"num_states": 3, "num_actions": 3, "horizon": 3, "seed": 9},
  "n_values": [50],
  "estimators": ["empirical-max"],
  "passes": [0, 1]
})";

}  // namespace

TEST_CASE("shortest round-trip double formatting") {
  CHECK(format_double(0.0) == "0");
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(105.0) == "105");
  CHECK(format_double(1e-06) == "1e-06");
  CHECK(format_double(-2.5) == "-2.5");
  for (double v : {1.0 / 3.0, 2.0 / 3.0, 0.30000000000000004, 1e300, -1.7e-12,
                   236.0 / 3.0, 6.103515625e-05}) {
    CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
  }
}

TEST_CASE("csv escaping quotes only what needs it") {
  CHECK(csv_escape("plain") == "plain");
  CHECK(csv_escape("") == "");
  CHECK(csv_escape("a,b") == "\"a,b\"");
  CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_escape("two\nlines") == "\"two\nlines\"");
}

TEST_CASE("svg charts are pure functions of their input") {
  SvgSeries series;
  series.label = "demo";
  series.x = {1.0, 2.0, 4.0};
  series.y = {0.5, 0.25, 0.125};
  const std::string a = svg_line_chart("title", "x", "y", {series});
  const std::string b = svg_line_chart("title", "x", "y", {series});
  CHECK(a == b);
  CHECK(a.find("<svg") != std::string::npos);
  CHECK(a.find("<polyline") != std::string::npos);
  CHECK(a.find("demo") != std::string::npos);
}

TEST_CASE("sweep configs parse with defaults") {
  const SweepConfig c = sweep_config_from_json("{}");
  CHECK(c.kind == "generic");
  CHECK(c.seeds == std::vector<std::uint64_t>{1});
  CHECK(c.n_values == std::vector<std::int64_t>{1000});
  CHECK(c.estimators == std::vector<std::string>{"empirical-max"});
  CHECK(c.passes == std::vector<int>{0});
  CHECK(c.eval_mode == "exact");

  CHECK(thrown_kind([] { sweep_config_from_json("{nope"); }) ==
        ErrorKind::SchemaError);
  CHECK(thrown_kind([] { sweep_config_from_json("[1,2]"); }) ==
        ErrorKind::SchemaError);
  CHECK(thrown_kind([] { sweep_config_from_json(R"({"kind":"bogus"})"); }) ==
        ErrorKind::InvalidConfig);
  CHECK(thrown_kind([] {
          sweep_config_from_json(R"({"estimators":["ridge"]})");
        }) == ErrorKind::InvalidConfig);
}

TEST_CASE("a small sweep is restartable and byte-deterministic") {
  TempDir dir("sweep");
  const std::string csv = dir.file("results.csv");
  const SweepConfig config = sweep_config_from_json(kTinyConfig);

  const SweepResult first = run_sweep(config, csv);
  CHECK(first.rows.size() == 4);
  CHECK(first.computed == 4);
  CHECK_FALSE(first.any_error);
  for (const SweepRow& row : first.rows) {
    CHECK(row.error.empty());
    REQUIRE(row.j_learned.has_value());
    REQUIRE(row.j_reference.has_value());
    REQUIRE(row.suboptimality.has_value());
    CHECK(*row.suboptimality >= -1e-12);
    CHECK(*row.j_learned <= *row.j_reference + 1e-12);
  }
  const std::string bytes = slurp(csv);
  const std::vector<std::string> lines = lines_of(bytes);
  REQUIRE(lines.size() == 5);
  CHECK(lines[0] ==
        "env,n,alpha,estimator,passes,seed,j_learned,j_reference,"
        "suboptimality,fallback_count,c_tilde_emp,error,config_hash,lib_version");

  const SweepResult again = run_sweep(config, csv);
  CHECK(again.computed == 0);
  CHECK(again.rows.size() == 4);
  CHECK(slurp(csv) == bytes);
  for (std::size_t i = 0; i < again.rows.size(); ++i) {
    REQUIRE(again.rows[i].j_learned.has_value());
    CHECK(*again.rows[i].j_learned == *first.rows[i].j_learned);
  }

  // a different config hash invalidates the cache
  SweepConfig renamed = config;
  renamed.raw_json += " ";
  const SweepResult fresh = run_sweep(renamed, csv);
  CHECK(fresh.computed == 4);
}

TEST_CASE("per-cell failures land in the error column") {
  TempDir dir("sweep-err");
  const std::string csv = dir.file("results.csv");
  SweepConfig config = sweep_config_from_json(
      R"({"kind":"generic","env":{"seed":4},"n_values":[0]})");
  const SweepResult result = run_sweep(config, csv);
  CHECK(result.any_error);
  REQUIRE(result.rows.size() == 1);
  CHECK(result.rows[0].error == "InvalidConfig");
  CHECK_FALSE(result.rows[0].j_learned.has_value());
  const std::vector<std::string> lines = lines_of(slurp(csv));
  REQUIRE(lines.size() == 2);
  const std::vector<std::string> fields = fields_of(lines[1]);
  REQUIRE(fields.size() == 14);
  CHECK(fields[6].empty());
  CHECK(fields[11] == "InvalidConfig");
}

TEST_CASE("sweep timings go to the sidecar, not the results") {
  TempDir dir("sweep-times");
  const std::string csv = dir.file("results.csv");
  const std::string times = dir.file("timings.csv");
  const SweepConfig config = sweep_config_from_json(
      R"({"kind":"generic","env":{"seed":4},"n_values":[40]})");
  run_sweep(config, csv, times);
  const std::string body = slurp(times);
  CHECK(body.rfind("env,n,alpha,estimator,passes,seed,wall_ms\n", 0) == 0);
  CHECK(lines_of(body).size() == 2);
  CHECK(slurp(csv).find("wall") == std::string::npos);
}

TEST_CASE("the command line round-trips a full workflow") {
  TempDir dir("cli");
  const std::string env = dir.file("env.json");
  const std::string beta = dir.file("beta.json");
  const std::string data = dir.file("data.jsonl");
  const std::string model = dir.file("model.json");
  const std::string eval1 = dir.file("eval1.json");
  const std::string eval2 = dir.file("eval2.json");

  CHECK(run_cli({"gen-env", "--kind", "random-det", "--states", "3", "--actions",
                 "3", "--horizon", "3", "--seed", "42", "--out", env,
                 "--beta-out", beta}) == 0);
  CHECK(run_cli({"gen-data", "--env", env, "--beta", beta, "--n", "300",
                 "--seed", "7", "--out", data}) == 0);
  CHECK(run_cli({"train", "--data", data, "--out", model, "--estimator",
                 "quantile", "--alpha", "0.9", "--passes", "1", "--states", "3",
                 "--actions", "3"}) == 0);
  CHECK(run_cli({"eval", "--env", env, "--model", model, "--beta", beta,
                 "--out", eval1}) == 0);
  CHECK(run_cli({"eval", "--env", env, "--model", model, "--beta", beta,
                 "--out", eval2}) == 0);

  const std::string eval_bytes = slurp(eval1);
  CHECK(eval_bytes == slurp(eval2));
  const nlohmann::json report = nlohmann::json::parse(eval_bytes);
  CHECK(report.contains("j_learned"));
  CHECK(report.contains("j_reference"));
  CHECK(report["suboptimality"].get<double>() >= -1e-12);

  const nlohmann::json saved = nlohmann::json::parse(slurp(model));
  CHECK(saved["format"] == "r2csl-model");
  CHECK(saved["controller"] == "table-conditioned");
}

TEST_CASE("the toy reproduction prints the frozen ladder") {
  TempDir dir("repro");
  const std::string out = dir.file("toy.json");
  CHECK(run_cli({"repro-toy", "--out", out}) == 0);
  const nlohmann::json doc = nlohmann::json::parse(slurp(out));
  CHECK(doc["values"]["target-tracking-max"].get<double>() == 81.0);
  CHECK(doc["values"]["relabel-0"].get<double>() == 100.0);
  CHECK(doc["values"]["relabel-1"].get<double>() == 105.0);
  CHECK(doc["values"]["relabel-2"].get<double>() == 105.0);
  CHECK(doc["values"]["optimal"].get<double>() == 105.0);
}

TEST_CASE("oracle queries answer over the toy instance") {
  TempDir dir("oracle");
  const std::string env = dir.file("env.json");
  const std::string out = dir.file("out.json");
  CHECK(run_cli({"gen-env", "--kind", "toy", "--out", env}) == 0);

  CHECK(run_cli({"oracle", "--env", env, "--what", "values", "--out", out}) == 0);
  CHECK(nlohmann::json::parse(slurp(out))["j"].get<double>() == 105.0);

  CHECK(run_cli({"oracle", "--env", env, "--what", "coverage", "--out", out}) == 0);
  CHECK(nlohmann::json::parse(slurp(out))["c_tilde"].get<double>() ==
        doctest::Approx(1.0 / 27.0));

  CHECK(run_cli({"oracle", "--env", env, "--what", "conditional", "--stage",
                 "2", "--state", "0", "--g", "30", "--out", out}) == 0);
  const nlohmann::json dist = nlohmann::json::parse(slurp(out))["dist"];
  CHECK(dist[0].get<double>() == 0.0);
  CHECK(dist[1].get<double>() == doctest::Approx(0.5));
  CHECK(dist[2].get<double>() == doctest::Approx(0.5));

  CHECK(run_cli({"oracle", "--env", env, "--what", "tie-free", "--out", out}) == 0);
  CHECK(nlohmann::json::parse(slurp(out))["tie_free"].get<bool>() == false);
}

TEST_CASE("cli failures are reported, not thrown") {
  TempDir dir("cli-err");
  CHECK(run_cli({}) != 0);
  CHECK(run_cli({"eval", "--env", dir.file("missing.json"), "--model",
                 dir.file("also-missing.json")}) == 2);
  const std::string cfg = dir.file("bad.json");
  spit(cfg, R"({"kind":"generic","env":{"seed":4},"n_values":[0]})");
  CHECK(run_cli({"sweep", "--config", cfg, "--out", dir.file("r.csv")}) == 3);
  CHECK(run_cli({"gen-env", "--kind", "toy-stitch", "--seed", "1", "--out",
                 dir.file("e.json")}) == 2);
}

TEST_CASE("the sweep subcommand is deterministic end to end") {
  TempDir dir("cli-sweep");
  const std::string cfg = dir.file("config.json");
  spit(cfg, kTinyConfig);
  const std::string csv_a = dir.file("a.csv");
  const std::string csv_b = dir.file("b.csv");
  CHECK(run_cli({"sweep", "--config", cfg, "--out", csv_a}) == 0);
  CHECK(run_cli({"--serial", "sweep", "--config", cfg, "--out", csv_b}) == 0);
  CHECK(slurp(csv_a) == slurp(csv_b));
}
