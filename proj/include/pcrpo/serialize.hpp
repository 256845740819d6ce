#pragma once

#include <json.hpp>
#include <iosfwd>
#include <string>
#include <vector>

#include "pcrpo/cmdp.hpp"
#include "pcrpo/trainer.hpp"

namespace pcrpo {

using Json = nlohmann::json;

// ---- CMDP documents (format "pcrpo-cmdp-v1") -------------------------------
// transition is [s][a][s'], reward [s][a], costs [i][s][a]; see
// docs/formats.md for the full schema.
Json cmdp_to_json(const CmdpSpec& spec);
CmdpSpec cmdp_from_json(const Json& j);
void save_cmdp(const CmdpSpec& spec, const std::string& path);
CmdpSpec load_cmdp(const std::string& path);

// ---- policy checkpoints (format "pcrpo-policy-v1") --------------------------
Json policy_to_json(const SoftmaxPolicy& policy);
SoftmaxPolicy policy_from_json(const Json& j);
void save_policy(const SoftmaxPolicy& policy, const std::string& path);
SoftmaxPolicy load_policy(const std::string& path);

// ---- run configuration ------------------------------------------------------
struct EnvConfig {
  enum class Kind { Gridworld, Pointmass, File };
  Kind kind = Kind::Gridworld;
  // gridworld
  int grid_width = 3;
  int grid_height = 2;
  std::vector<Cell> hazards = {{1, 0}};
  Cell goal = {2, 0};
  Cell start = {0, 0};
  double slip = 0.0;
  // pointmass
  int pm_positions = 6;
  int pm_velocities = 5;
  int pm_action_levels = 3;
  double pm_alpha_r = 1.0;
  double pm_alpha_c = 1.0;
  // shared
  double gamma = 0.9;
  double cost_limit = 0.45;
  std::string env_file;

  CmdpSpec build() const;
};

struct RunConfig {
  TrainerConfig trainer;
  SlackConfig slack;
  EnvConfig env;
  std::vector<std::uint64_t> seeds = {101, 202, 303, 404, 505};
  std::string out_dir = "runs/out";
  std::string slack_variant;  // set when the slack came from a named variant

  Json echo() const;  // effective configuration, for the run summary
};

// Parses a flat-key config object; unknown keys are ConfigError. "inf" and
// "-inf" strings are accepted for the slack bounds. A "slack_variant" of
// 2SR / 3SR-G / 4S-F / 4S-G derives the bounds from the cost limit.
RunConfig run_config_from_json(Json j);

// Loads the file, applies key=value overrides (values parsed as JSON when
// possible, else kept as strings), then parses.
RunConfig load_run_config(const std::string& path,
                          const std::vector<std::string>& overrides);

void apply_slack_variant(RunConfig& config, const std::string& variant);

struct SweepSpec {
  Json base;                 // base run-config object
  std::string axis;          // config key being varied
  std::vector<Json> values;  // one run per value
  int jobs = 1;
  std::string out_dir;
};

SweepSpec load_sweep_spec(const std::string& path);

// ---- train logs -------------------------------------------------------------
// CSV columns: iter,v_r,v_c_0..n,mode,theta_deg,kl,h_plus,h_minus,step_scale,
// constraint. Doubles are printed with %.17g so identical runs produce
// byte-identical files.
std::string format_double(double x);
void write_train_csv(std::ostream& out, const std::vector<TrainRecord>& records,
                     int n_channels);
std::vector<TrainRecord> read_train_csv(std::istream& in, int* n_channels_out);

// Per-iteration mean/std across seeds: iter,v_r_mean,v_r_std,v_c_i_mean,...
void write_aggregate_csv(std::ostream& out,
                         const std::vector<std::vector<TrainRecord>>& runs,
                         int n_channels);

// Re-derives the expected update mode of each logged row from the logged
// values, limits, and slack bounds, and compares against the logged mode.
// Returns human-readable messages for every inconsistent row.
std::vector<std::string> validate_train_log(
    const std::vector<TrainRecord>& records, const Vector& limits,
    Algorithm algorithm, int safety_warmup_iters);

}  // namespace pcrpo
