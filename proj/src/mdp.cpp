#include "r2csl/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace r2csl {

namespace {

constexpr double kRowSumTol = 1e-9;

void check_row_sum(const double* row, int n, const std::string& what) {
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    if (row[i] < 0.0) fail(ErrorKind::NonStochasticRow, what + " has a negative entry");
    sum += row[i];
  }
  if (std::abs(sum - 1.0) > kRowSumTol)
    fail(ErrorKind::NonStochasticRow, what + " sums to " + std::to_string(sum));
}

}  // namespace

const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonStochasticRow: return "NonStochasticRow";
    case ErrorKind::RewardOutOfRange: return "RewardOutOfRange";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::WrongLength: return "WrongLength";
    case ErrorKind::TieFreeUnverifiable: return "TieFreeUnverifiable";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::InvalidAlpha: return "InvalidAlpha";
    case ErrorKind::EmptyDomainPoint: return "EmptyDomainPoint";
    case ErrorKind::DomainGap: return "DomainGap";
    case ErrorKind::PassMismatch: return "PassMismatch";
    case ErrorKind::EmptySupport: return "EmptySupport";
    case ErrorKind::UnreachableState: return "UnreachableState";
    case ErrorKind::SizeBound: return "SizeBound";
    case ErrorKind::EmptyCondition: return "EmptyCondition";
    case ErrorKind::MissingOracle: return "MissingOracle";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::SchemaError: return "SchemaError";
  }
  return "Unknown";
}

double Mdp::max_reward() const {
  double m = 0.0;
  for (double r : reward) m = std::max(m, r);
  return m;
}

void validate_mdp(const Mdp& mdp) {
  if (mdp.horizon < 1 || mdp.num_states < 1 || mdp.num_actions < 1)
    fail(ErrorKind::ShapeMismatch, "horizon, states and actions must be positive");
  const std::size_t hsa = static_cast<std::size_t>(mdp.horizon) * mdp.num_states *
                          mdp.num_actions;
  if (mdp.reward.size() != hsa)
    fail(ErrorKind::ShapeMismatch, "reward table has wrong size");
  for (double r : mdp.reward)
    if (r < 0.0 || !std::isfinite(r))
      fail(ErrorKind::RewardOutOfRange, "rewards must be finite and nonnegative");
  if (mdp.initial_dist.size() != static_cast<std::size_t>(mdp.num_states))
    fail(ErrorKind::ShapeMismatch, "initial distribution has wrong size");
  check_row_sum(mdp.initial_dist.data(), mdp.num_states, "initial distribution");
  if (mdp.deterministic) {
    if (mdp.succ.size() != hsa)
      fail(ErrorKind::ShapeMismatch, "successor table has wrong size");
    for (int s : mdp.succ)
      if (s < 0 || s >= mdp.num_states)
        fail(ErrorKind::ShapeMismatch, "successor index out of range");
  } else {
    if (mdp.prob.size() != hsa * mdp.num_states)
      fail(ErrorKind::ShapeMismatch, "transition table has wrong size");
    for (int h = 0; h < mdp.horizon; ++h)
      for (int s = 0; s < mdp.num_states; ++s)
        for (int a = 0; a < mdp.num_actions; ++a)
          check_row_sum(mdp.transition_row(h, s, a), mdp.num_states,
                        "transition row");
  }
}

std::vector<int> TabularPolicy::support(int h, int s) const {
  std::vector<int> out;
  const double* r = row(h, s);
  for (int a = 0; a < num_actions; ++a)
    if (r[a] > 0.0) out.push_back(a);
  return out;
}

TabularPolicy uniform_policy(int horizon, int num_states, int num_actions) {
  TabularPolicy p;
  p.horizon = horizon;
  p.num_states = num_states;
  p.num_actions = num_actions;
  p.probs.assign(static_cast<std::size_t>(horizon) * num_states * num_actions,
                 1.0 / num_actions);
  return p;
}

void validate_policy(const TabularPolicy& policy) {
  if (policy.horizon < 1 || policy.num_states < 1 || policy.num_actions < 1)
    fail(ErrorKind::ShapeMismatch, "policy dimensions must be positive");
  if (policy.probs.size() != static_cast<std::size_t>(policy.horizon) *
                                 policy.num_states * policy.num_actions)
    fail(ErrorKind::ShapeMismatch, "policy table has wrong size");
  for (int h = 0; h < policy.horizon; ++h)
    for (int s = 0; s < policy.num_states; ++s)
      check_row_sum(policy.row(h, s), policy.num_actions, "policy row");
}

void annotate_rtg(Trajectory& trajectory) {
  const std::size_t n = trajectory.steps.size();
  trajectory.rtg.assign(n, 0.0);
  double g = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    g = trajectory.steps[i].r + g;
    trajectory.rtg[i] = g;
  }
}

namespace {

using ojson = nlohmann::ordered_json;

ojson reward_to_json(const Mdp& mdp) {
  ojson hs = ojson::array();
  for (int h = 0; h < mdp.horizon; ++h) {
    ojson ss = ojson::array();
    for (int s = 0; s < mdp.num_states; ++s) {
      ojson as = ojson::array();
      for (int a = 0; a < mdp.num_actions; ++a) as.push_back(mdp.reward_at(h, s, a));
      ss.push_back(std::move(as));
    }
    hs.push_back(std::move(ss));
  }
  return hs;
}

}  // namespace

std::string mdp_to_json(const Mdp& mdp) {
  ojson j;
  j["name"] = mdp.name;
  j["horizon"] = mdp.horizon;
  j["num_states"] = mdp.num_states;
  j["num_actions"] = mdp.num_actions;
  if (mdp.deterministic) {
    ojson hs = ojson::array();
    for (int h = 0; h < mdp.horizon; ++h) {
      ojson ss = ojson::array();
      for (int s = 0; s < mdp.num_states; ++s) {
        ojson as = ojson::array();
        for (int a = 0; a < mdp.num_actions; ++a) as.push_back(mdp.next_state(h, s, a));
        ss.push_back(std::move(as));
      }
      hs.push_back(std::move(ss));
    }
    j["transition"] = ojson{{"deterministic", std::move(hs)}};
  } else {
    ojson hs = ojson::array();
    for (int h = 0; h < mdp.horizon; ++h) {
      ojson ss = ojson::array();
      for (int s = 0; s < mdp.num_states; ++s) {
        ojson as = ojson::array();
        for (int a = 0; a < mdp.num_actions; ++a) {
          const double* row = mdp.transition_row(h, s, a);
          ojson ps = ojson::array();
          for (int t = 0; t < mdp.num_states; ++t) ps.push_back(row[t]);
          as.push_back(std::move(ps));
        }
        ss.push_back(std::move(as));
      }
      hs.push_back(std::move(ss));
    }
    j["transition"] = std::move(hs);
  }
  j["reward"] = reward_to_json(mdp);
  j["initial_dist"] = mdp.initial_dist;
  return j.dump(2) + "\n";
}

Mdp mdp_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    fail(ErrorKind::SchemaError, std::string("bad JSON: ") + e.what());
  }
  Mdp mdp;
  try {
    mdp.name = j.value("name", "");
    mdp.horizon = j.at("horizon").get<int>();
    mdp.num_states = j.at("num_states").get<int>();
    mdp.num_actions = j.at("num_actions").get<int>();
    const auto& tr = j.at("transition");
    const auto& rw = j.at("reward");
    if (mdp.horizon < 1 || mdp.num_states < 1 || mdp.num_actions < 1)
      fail(ErrorKind::SchemaError, "dimensions must be positive");
    if (tr.is_object() && tr.contains("deterministic")) {
      mdp.deterministic = true;
      for (const auto& ss : tr.at("deterministic"))
        for (const auto& as : ss)
          for (const auto& v : as) mdp.succ.push_back(v.get<int>());
    } else {
      mdp.deterministic = false;
      for (const auto& ss : tr)
        for (const auto& as : ss)
          for (const auto& ps : as)
            for (const auto& v : ps) mdp.prob.push_back(v.get<double>());
    }
    for (const auto& ss : rw)
      for (const auto& as : ss)
        for (const auto& v : as) mdp.reward.push_back(v.get<double>());
    mdp.initial_dist = j.at("initial_dist").get<std::vector<double>>();
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(ErrorKind::SchemaError, std::string("bad MDP spec: ") + e.what());
  }
  validate_mdp(mdp);
  return mdp;
}

std::string policy_to_json(const TabularPolicy& policy, const std::string& name) {
  ojson j;
  j["name"] = name;
  j["horizon"] = policy.horizon;
  j["num_states"] = policy.num_states;
  j["num_actions"] = policy.num_actions;
  ojson hs = ojson::array();
  for (int h = 0; h < policy.horizon; ++h) {
    ojson ss = ojson::array();
    for (int s = 0; s < policy.num_states; ++s) {
      const double* row = policy.row(h, s);
      ojson as = ojson::array();
      for (int a = 0; a < policy.num_actions; ++a) as.push_back(row[a]);
      ss.push_back(std::move(as));
    }
    hs.push_back(std::move(ss));
  }
  j["probs"] = std::move(hs);
  return j.dump(2) + "\n";
}

TabularPolicy policy_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    fail(ErrorKind::SchemaError, std::string("bad JSON: ") + e.what());
  }
  TabularPolicy p;
  try {
    p.horizon = j.at("horizon").get<int>();
    p.num_states = j.at("num_states").get<int>();
    p.num_actions = j.at("num_actions").get<int>();
    for (const auto& ss : j.at("probs"))
      for (const auto& as : ss)
        for (const auto& v : as) p.probs.push_back(v.get<double>());
  } catch (const std::exception& e) {
    fail(ErrorKind::SchemaError, std::string("bad policy spec: ") + e.what());
  }
  validate_policy(p);
  return p;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::IoError, "cannot open " + path + " for writing");
  out << text;
  if (!out) fail(ErrorKind::IoError, "short write to " + path);
}

void save_mdp(const Mdp& mdp, const std::string& path) {
  write_text_file(path, mdp_to_json(mdp));
}

Mdp load_mdp(const std::string& path) { return mdp_from_json(read_text_file(path)); }

void save_policy(const TabularPolicy& policy, const std::string& name,
                 const std::string& path) {
  write_text_file(path, policy_to_json(policy, name));
}

TabularPolicy load_policy(const std::string& path) {
  return policy_from_json(read_text_file(path));
}

}  // namespace r2csl
