#include "pcrpo/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace pcrpo {

namespace {

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open file: " + path);
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError("cannot parse JSON in " + path + ": " + e.what());
  }
  return j;
}

void save_json_file(const Json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write file: " + path);
  out << j.dump(2) << '\n';
}

double number_or_inf(const Json& v, const std::string& key) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "inf" || s == "+inf") return kInf;
    if (s == "-inf") return -kInf;
  }
  throw ConfigError("key '" + key + "' must be a number or \"inf\"/\"-inf\"");
}

Json inf_aware(double x) {
  if (std::isinf(x)) return x > 0 ? Json("inf") : Json("-inf");
  return Json(x);
}

Cell cell_from_json(const Json& v, const std::string& key) {
  if (!v.is_array() || v.size() != 2) {
    throw ConfigError("key '" + key + "' must be a [x, y] pair");
  }
  return {v[0].get<int>(), v[1].get<int>()};
}

const std::set<std::string>& known_config_keys() {
  static const std::set<std::string> keys = {
      "format", "algorithm", "total_iters", "eta", "kl_threshold", "k_td",
      "td_lr0", "eval_mode", "normalize_gradients", "beta_r", "beta_c",
      "beta_r_plus", "beta_c_plus", "gradient_source", "safety_warmup_iters",
      "init_logit_scale", "max_kl_halvings", "h_plus", "h_minus", "decay_plus",
      "decay_minus", "decay_law", "slack_variant", "env", "grid_width",
      "grid_height", "grid_hazards", "grid_goal", "grid_start", "grid_slip",
      "gamma", "cost_limit", "pm_positions", "pm_velocities",
      "pm_action_levels", "pm_alpha_r", "pm_alpha_c", "env_file", "seeds",
      "out_dir"};
  return keys;
}

std::vector<std::vector<double>> matrix_to_rows(const Matrix& m) {
  std::vector<std::vector<double>> rows(m.rows());
  for (int r = 0; r < m.rows(); ++r) {
    rows[r].assign(m.cols(), 0.0);
    for (int c = 0; c < m.cols(); ++c) rows[r][c] = m(r, c);
  }
  return rows;
}

Matrix rows_to_matrix(const Json& j, int rows, int cols, const std::string& what) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows) {
    throw ConfigError(what + " must be an array of " + std::to_string(rows) + " rows");
  }
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    if (!j[r].is_array() || static_cast<int>(j[r].size()) != cols) {
      throw ConfigError(what + " row " + std::to_string(r) + " must have " +
                        std::to_string(cols) + " entries");
    }
    for (int c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

}  // namespace

Json cmdp_to_json(const CmdpSpec& spec) {
  Json j;
  j["format"] = "pcrpo-cmdp-v1";
  j["n_states"] = spec.n_states;
  j["n_actions"] = spec.n_actions;
  j["gamma"] = spec.gamma;
  // transition serialized [s][a][s'] to match the document schema
  Json trans = Json::array();
  for (int s = 0; s < spec.n_states; ++s) {
    Json per_action = Json::array();
    for (int a = 0; a < spec.n_actions; ++a) {
      Json row = Json::array();
      for (int s2 = 0; s2 < spec.n_states; ++s2) {
        row.push_back(spec.transition[a](s, s2));
      }
      per_action.push_back(std::move(row));
    }
    trans.push_back(std::move(per_action));
  }
  j["transition"] = std::move(trans);
  j["reward"] = matrix_to_rows(spec.reward);
  Json costs = Json::array();
  for (const Matrix& c : spec.costs) costs.push_back(matrix_to_rows(c));
  j["costs"] = std::move(costs);
  j["limits"] = std::vector<double>(spec.limits.data(),
                                    spec.limits.data() + spec.limits.size());
  j["rho"] = std::vector<double>(spec.rho.data(), spec.rho.data() + spec.rho.size());
  return j;
}

CmdpSpec cmdp_from_json(const Json& j) {
  if (j.value("format", "") != "pcrpo-cmdp-v1") {
    throw ConfigError("expected a pcrpo-cmdp-v1 document");
  }
  CmdpSpec spec;
  spec.n_states = j.at("n_states").get<int>();
  spec.n_actions = j.at("n_actions").get<int>();
  spec.gamma = j.at("gamma").get<double>();
  const Json& trans = j.at("transition");
  if (static_cast<int>(trans.size()) != spec.n_states) {
    throw ConfigError("transition must have one entry per state");
  }
  spec.transition.assign(spec.n_actions, Matrix::Zero(spec.n_states, spec.n_states));
  for (int s = 0; s < spec.n_states; ++s) {
    if (static_cast<int>(trans[s].size()) != spec.n_actions) {
      throw ConfigError("transition[s] must have one row per action");
    }
    for (int a = 0; a < spec.n_actions; ++a) {
      if (static_cast<int>(trans[s][a].size()) != spec.n_states) {
        throw ConfigError("transition[s][a] must have one entry per next state");
      }
      for (int s2 = 0; s2 < spec.n_states; ++s2) {
        spec.transition[a](s, s2) = trans[s][a][s2].get<double>();
      }
    }
  }
  spec.reward = rows_to_matrix(j.at("reward"), spec.n_states, spec.n_actions, "reward");
  for (const Json& c : j.at("costs")) {
    spec.costs.push_back(rows_to_matrix(c, spec.n_states, spec.n_actions, "cost"));
  }
  const auto limits = j.at("limits").get<std::vector<double>>();
  spec.limits = Eigen::Map<const Vector>(limits.data(), limits.size());
  const auto rho = j.at("rho").get<std::vector<double>>();
  if (static_cast<int>(rho.size()) != spec.n_states) {
    throw ConfigError("rho must have one entry per state");
  }
  spec.rho = Eigen::Map<const Vector>(rho.data(), rho.size());
  require_valid(spec);
  return spec;
}

void save_cmdp(const CmdpSpec& spec, const std::string& path) {
  save_json_file(cmdp_to_json(spec), path);
}

CmdpSpec load_cmdp(const std::string& path) {
  return cmdp_from_json(load_json_file(path));
}

Json policy_to_json(const SoftmaxPolicy& policy) {
  Json j;
  j["format"] = "pcrpo-policy-v1";
  j["n_states"] = policy.n_states();
  j["n_actions"] = policy.n_actions();
  j["logits"] = matrix_to_rows(policy.logits());
  return j;
}

SoftmaxPolicy policy_from_json(const Json& j) {
  if (j.value("format", "") != "pcrpo-policy-v1") {
    throw ConfigError("expected a pcrpo-policy-v1 document");
  }
  const int s = j.at("n_states").get<int>();
  const int a = j.at("n_actions").get<int>();
  return SoftmaxPolicy(rows_to_matrix(j.at("logits"), s, a, "logits"));
}

void save_policy(const SoftmaxPolicy& policy, const std::string& path) {
  save_json_file(policy_to_json(policy), path);
}

SoftmaxPolicy load_policy(const std::string& path) {
  return policy_from_json(load_json_file(path));
}

CmdpSpec EnvConfig::build() const {
  switch (kind) {
    case Kind::Gridworld:
      return build_gridworld(grid_width, grid_height, hazards, goal, slip,
                             gamma, cost_limit, start);
    case Kind::Pointmass:
      return build_pointmass_velocity(pm_positions, pm_velocities,
                                      pm_action_levels, pm_alpha_r, pm_alpha_c,
                                      gamma, cost_limit);
    case Kind::File:
      return load_cmdp(env_file);
  }
  throw ConfigError("unknown environment kind");
}

void apply_slack_variant(RunConfig& config, const std::string& variant) {
  const double b = std::abs(config.env.cost_limit);
  if (variant == "2SR") {
    config.slack = SlackConfig::case_one();
  } else if (variant == "3SR-G") {
    config.slack = SlackConfig::case_three(0.5 * b, 0.0, true, false);
  } else if (variant == "4S-F") {
    config.slack = SlackConfig::case_three(0.5 * b, -0.5 * b, false, false);
  } else if (variant == "4S-G") {
    config.slack = SlackConfig::case_three(0.5 * b, -0.5 * b, true, true);
  } else {
    throw ConfigError("unknown slack variant: " + variant +
                      " (expected 2SR, 3SR-G, 4S-F, or 4S-G)");
  }
  config.slack_variant = variant;
}

RunConfig run_config_from_json(Json j) {
  if (!j.is_object()) throw ConfigError("run config must be a JSON object");
  for (const auto& item : j.items()) {
    if (!known_config_keys().count(item.key())) {
      throw ConfigError("unknown config key: " + item.key());
    }
  }

  RunConfig c;
  TrainerConfig& t = c.trainer;
  if (j.contains("algorithm")) {
    const std::string a = j["algorithm"].get<std::string>();
    if (a == "pcrpo") t.algorithm = Algorithm::Pcrpo;
    else if (a == "crpo") t.algorithm = Algorithm::Crpo;
    else if (a == "scrpo") t.algorithm = Algorithm::Scrpo;
    else throw ConfigError("unknown algorithm: " + a);
  }
  t.total_iters = j.value("total_iters", t.total_iters);
  t.eta = j.value("eta", t.eta);
  t.kl_threshold = j.value("kl_threshold", t.kl_threshold);
  t.k_td = j.value("k_td", t.k_td);
  t.td_lr0 = j.value("td_lr0", t.td_lr0);
  if (j.contains("eval_mode")) {
    const std::string m = j["eval_mode"].get<std::string>();
    if (m == "exact") t.eval_mode = EvalMode::Exact;
    else if (m == "td") t.eval_mode = EvalMode::Td;
    else throw ConfigError("unknown eval_mode: " + m);
  }
  t.normalize_gradients = j.value("normalize_gradients", t.normalize_gradients);
  t.weights.beta_r = j.value("beta_r", t.weights.beta_r);
  t.weights.beta_c = j.value("beta_c", t.weights.beta_c);
  t.weights.beta_r_plus = j.value("beta_r_plus", t.weights.beta_r_plus);
  t.weights.beta_c_plus = j.value("beta_c_plus", t.weights.beta_c_plus);
  if (j.contains("gradient_source")) {
    const std::string g = j["gradient_source"].get<std::string>();
    if (g == "npg_q") t.gradient_source = GradientSource::NpgQ;
    else if (g == "vanilla") t.gradient_source = GradientSource::Vanilla;
    else throw ConfigError("unknown gradient_source: " + g);
  }
  t.safety_warmup_iters = j.value("safety_warmup_iters", t.safety_warmup_iters);
  t.init_logit_scale = j.value("init_logit_scale", t.init_logit_scale);
  t.max_kl_halvings = j.value("max_kl_halvings", t.max_kl_halvings);

  EnvConfig& e = c.env;
  if (j.contains("env")) {
    const std::string env = j["env"].get<std::string>();
    if (env == "gridworld") e.kind = EnvConfig::Kind::Gridworld;
    else if (env == "pointmass") e.kind = EnvConfig::Kind::Pointmass;
    else if (env == "file") e.kind = EnvConfig::Kind::File;
    else throw ConfigError("unknown env: " + env);
  }
  e.grid_width = j.value("grid_width", e.grid_width);
  e.grid_height = j.value("grid_height", e.grid_height);
  if (j.contains("grid_hazards")) {
    e.hazards.clear();
    for (const Json& h : j["grid_hazards"]) {
      e.hazards.push_back(cell_from_json(h, "grid_hazards"));
    }
  }
  if (j.contains("grid_goal")) e.goal = cell_from_json(j["grid_goal"], "grid_goal");
  if (j.contains("grid_start")) e.start = cell_from_json(j["grid_start"], "grid_start");
  e.slip = j.value("grid_slip", e.slip);
  e.gamma = j.value("gamma", e.gamma);
  e.cost_limit = j.value("cost_limit", e.cost_limit);
  e.pm_positions = j.value("pm_positions", e.pm_positions);
  e.pm_velocities = j.value("pm_velocities", e.pm_velocities);
  e.pm_action_levels = j.value("pm_action_levels", e.pm_action_levels);
  e.pm_alpha_r = j.value("pm_alpha_r", e.pm_alpha_r);
  e.pm_alpha_c = j.value("pm_alpha_c", e.pm_alpha_c);
  e.env_file = j.value("env_file", e.env_file);
  if (e.kind == EnvConfig::Kind::File && e.env_file.empty()) {
    throw ConfigError("env=file requires env_file");
  }

  // slack: default is the case-three band at |b|/8 with decay on both sides
  if (j.contains("slack_variant")) {
    apply_slack_variant(c, j["slack_variant"].get<std::string>());
  } else {
    const double b8 = std::abs(e.cost_limit) / 8.0;
    SlackConfig s;
    s.h_plus = j.contains("h_plus") ? number_or_inf(j["h_plus"], "h_plus") : b8;
    s.h_minus = j.contains("h_minus") ? number_or_inf(j["h_minus"], "h_minus") : -b8;
    s.decay_plus = j.value("decay_plus", true);
    s.decay_minus = j.value("decay_minus", true);
    s.h_plus_init = s.h_plus;
    s.h_minus_init = s.h_minus;
    s.validate();
    c.slack = s;
  }
  if (j.contains("decay_law")) {
    const std::string law = j["decay_law"].get<std::string>();
    if (law == "geometric") c.slack.decay_law = SlackDecayLaw::Geometric;
    else if (law == "linear") c.slack.decay_law = SlackDecayLaw::Linear;
    else throw ConfigError("unknown decay_law: " + law);
  }

  if (j.contains("seeds")) {
    c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    if (c.seeds.empty()) throw ConfigError("seeds must not be empty");
    std::set<std::uint64_t> uniq(c.seeds.begin(), c.seeds.end());
    if (uniq.size() != c.seeds.size()) throw ConfigError("seeds must be distinct");
  }
  c.out_dir = j.value("out_dir", c.out_dir);
  c.trainer.validate();
  return c;
}

RunConfig load_run_config(const std::string& path,
                          const std::vector<std::string>& overrides) {
  Json j = load_json_file(path);
  for (const std::string& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("override must look like key=value: " + kv);
    }
    const std::string key = kv.substr(0, eq);
    const std::string raw = kv.substr(eq + 1);
    const Json parsed = Json::parse(raw, nullptr, false);
    j[key] = parsed.is_discarded() ? Json(raw) : parsed;
  }
  return run_config_from_json(std::move(j));
}

Json RunConfig::echo() const {
  Json j;
  j["algorithm"] = to_string(trainer.algorithm);
  j["total_iters"] = trainer.total_iters;
  j["eta"] = trainer.eta;
  j["kl_threshold"] = trainer.kl_threshold;
  j["k_td"] = trainer.k_td;
  j["td_lr0"] = trainer.td_lr0;
  j["eval_mode"] = to_string(trainer.eval_mode);
  j["normalize_gradients"] = trainer.normalize_gradients;
  j["beta_r"] = trainer.weights.beta_r;
  j["beta_c"] = trainer.weights.beta_c;
  j["beta_r_plus"] = trainer.weights.beta_r_plus;
  j["beta_c_plus"] = trainer.weights.beta_c_plus;
  j["gradient_source"] =
      trainer.gradient_source == GradientSource::NpgQ ? "npg_q" : "vanilla";
  j["safety_warmup_iters"] = trainer.safety_warmup_iters;
  j["init_logit_scale"] = trainer.init_logit_scale;
  j["max_kl_halvings"] = trainer.max_kl_halvings;
  j["h_plus"] = inf_aware(slack.h_plus);
  j["h_minus"] = inf_aware(slack.h_minus);
  j["decay_plus"] = slack.decay_plus;
  j["decay_minus"] = slack.decay_minus;
  j["decay_law"] =
      slack.decay_law == SlackDecayLaw::Geometric ? "geometric" : "linear";
  if (!slack_variant.empty()) j["slack_variant"] = slack_variant;
  switch (env.kind) {
    case EnvConfig::Kind::Gridworld: {
      j["env"] = "gridworld";
      j["grid_width"] = env.grid_width;
      j["grid_height"] = env.grid_height;
      Json hz = Json::array();
      for (const Cell& h : env.hazards) hz.push_back({h.x, h.y});
      j["grid_hazards"] = std::move(hz);
      j["grid_goal"] = {env.goal.x, env.goal.y};
      j["grid_start"] = {env.start.x, env.start.y};
      j["grid_slip"] = env.slip;
      break;
    }
    case EnvConfig::Kind::Pointmass:
      j["env"] = "pointmass";
      j["pm_positions"] = env.pm_positions;
      j["pm_velocities"] = env.pm_velocities;
      j["pm_action_levels"] = env.pm_action_levels;
      j["pm_alpha_r"] = env.pm_alpha_r;
      j["pm_alpha_c"] = env.pm_alpha_c;
      break;
    case EnvConfig::Kind::File:
      j["env"] = "file";
      j["env_file"] = env.env_file;
      break;
  }
  j["gamma"] = env.gamma;
  j["cost_limit"] = env.cost_limit;
  j["seeds"] = seeds;
  j["out_dir"] = out_dir;
  return j;
}

SweepSpec load_sweep_spec(const std::string& path) {
  const Json j = load_json_file(path);
  SweepSpec sweep;
  if (j.contains("base") && j["base"].is_string()) {
    sweep.base = load_json_file(j["base"].get<std::string>());
  } else if (j.contains("base") && j["base"].is_object()) {
    sweep.base = j["base"];
  } else {
    throw ConfigError("sweep spec needs a 'base' config path or object");
  }
  sweep.axis = j.value("axis", "");
  if (!known_config_keys().count(sweep.axis)) {
    throw ConfigError("sweep axis does not name a config field: " + sweep.axis);
  }
  if (!j.contains("values") || !j["values"].is_array() || j["values"].empty()) {
    throw ConfigError("sweep spec needs a nonempty 'values' array");
  }
  for (const Json& v : j["values"]) sweep.values.push_back(v);
  sweep.jobs = j.value("jobs", 1);
  sweep.out_dir = j.value("out_dir", "");
  // validate every point up front so failures surface before any run starts
  for (const Json& v : sweep.values) {
    Json point = sweep.base;
    point[sweep.axis] = v;
    if (!sweep.out_dir.empty()) point["out_dir"] = sweep.out_dir;
    run_config_from_json(point);
  }
  return sweep;
}

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_train_csv(std::ostream& out, const std::vector<TrainRecord>& records,
                     int n_channels) {
  out << "iter,v_r";
  for (int i = 0; i < n_channels; ++i) out << ",v_c_" << i;
  out << ",mode,theta_deg,kl,h_plus,h_minus,step_scale,constraint\n";
  for (const TrainRecord& r : records) {
    out << r.iter << ',' << format_double(r.v_r);
    for (int i = 0; i < n_channels; ++i) out << ',' << format_double(r.v_c[i]);
    out << ',' << r.mode.name() << ',' << format_double(r.theta_deg) << ','
        << format_double(r.kl_realized) << ',' << format_double(r.h_plus_t)
        << ',' << format_double(r.h_minus_t) << ','
        << format_double(r.step_scale) << ',' << r.mode.constraint << '\n';
  }
}

std::vector<TrainRecord> read_train_csv(std::istream& in, int* n_channels_out) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty train CSV");
  int n_channels = 0;
  {
    std::stringstream head(line);
    std::string col;
    while (std::getline(head, col, ',')) {
      if (col.rfind("v_c_", 0) == 0) ++n_channels;
    }
  }
  if (n_channels_out) *n_channels_out = n_channels;

  std::vector<TrainRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(row, field, ',')) fields.push_back(field);
    const std::size_t expected = 9 + n_channels;
    if (fields.size() != expected) {
      throw ConfigError("train CSV row has " + std::to_string(fields.size()) +
                        " fields, expected " + std::to_string(expected));
    }
    TrainRecord r;
    std::size_t k = 0;
    r.iter = std::stoi(fields[k++]);
    r.v_r = std::strtod(fields[k++].c_str(), nullptr);
    r.v_c.resize(n_channels);
    for (int i = 0; i < n_channels; ++i) {
      r.v_c[i] = std::strtod(fields[k++].c_str(), nullptr);
    }
    const std::string mode = fields[k++];
    if (mode == "reward_only") r.mode.kind = UpdateMode::Kind::RewardOnly;
    else if (mode == "safety_only") r.mode.kind = UpdateMode::Kind::SafetyOnly;
    else if (mode == "projection") r.mode.kind = UpdateMode::Kind::Projection;
    else throw ConfigError("unknown mode in train CSV: " + mode);
    r.theta_deg = std::strtod(fields[k++].c_str(), nullptr);
    r.kl_realized = std::strtod(fields[k++].c_str(), nullptr);
    r.h_plus_t = std::strtod(fields[k++].c_str(), nullptr);
    r.h_minus_t = std::strtod(fields[k++].c_str(), nullptr);
    r.step_scale = std::strtod(fields[k++].c_str(), nullptr);
    r.mode.constraint = std::stoi(fields[k++]);
    records.push_back(std::move(r));
  }
  return records;
}

void write_aggregate_csv(std::ostream& out,
                         const std::vector<std::vector<TrainRecord>>& runs,
                         int n_channels) {
  if (runs.empty()) throw ConfigError("no runs to aggregate");
  const std::size_t iters = runs.front().size();
  for (const auto& run : runs) {
    if (run.size() != iters) {
      throw ConfigError("runs have different lengths; cannot aggregate");
    }
  }
  out << "iter,v_r_mean,v_r_std";
  for (int i = 0; i < n_channels; ++i) {
    out << ",v_c_" << i << "_mean,v_c_" << i << "_std";
  }
  out << '\n';
  const double n = static_cast<double>(runs.size());
  auto mean_std = [&](auto&& get) {
    double mean = 0.0;
    for (const auto& run : runs) mean += get(run);
    mean /= n;
    double var = 0.0;
    for (const auto& run : runs) {
      const double d = get(run) - mean;
      var += d * d;
    }
    return std::pair<double, double>(mean, std::sqrt(var / n));
  };
  for (std::size_t t = 0; t < iters; ++t) {
    const auto [vr_mean, vr_std] =
        mean_std([&](const auto& run) { return run[t].v_r; });
    out << runs.front()[t].iter << ',' << format_double(vr_mean) << ','
        << format_double(vr_std);
    for (int i = 0; i < n_channels; ++i) {
      const auto [vc_mean, vc_std] =
          mean_std([&](const auto& run) { return run[t].v_c[i]; });
      out << ',' << format_double(vc_mean) << ',' << format_double(vc_std);
    }
    out << '\n';
  }
}

std::vector<std::string> validate_train_log(
    const std::vector<TrainRecord>& records, const Vector& limits,
    Algorithm algorithm, int safety_warmup_iters) {
  std::vector<std::string> problems;
  for (const TrainRecord& r : records) {
    UpdateMode expected;
    if (r.iter < safety_warmup_iters) {
      expected = {UpdateMode::Kind::RewardOnly, -1};
    } else if (algorithm == Algorithm::Crpo) {
      expected.kind = UpdateMode::Kind::RewardOnly;
      double worst = 0.0;
      for (std::size_t i = 0; i < r.v_c.size(); ++i) {
        const double viol = (r.v_c[i] - limits(i)) /
                            std::max(1.0, std::abs(limits(i)));
        if (r.v_c[i] > limits(i) && viol > worst) {
          expected = {UpdateMode::Kind::SafetyOnly, static_cast<int>(i)};
          worst = viol;
        }
      }
    } else {
      SlackConfig at_t;
      at_t.h_plus = r.h_plus_t;
      at_t.h_minus = r.h_minus_t;
      at_t.h_plus_init = r.h_plus_t;
      at_t.h_minus_init = r.h_minus_t;
      expected = select_mode(r.v_c, limits, at_t);
    }
    if (!(expected == r.mode)) {
      problems.push_back("iter " + std::to_string(r.iter) + ": logged mode " +
                         r.mode.name() + " but values imply " + expected.name());
    }
  }
  return problems;
}

}  // namespace pcrpo
