#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "pcrpo/cmdp.hpp"
#include "pcrpo/evaluation.hpp"
#include "pcrpo/gradmanip.hpp"
#include "pcrpo/policy.hpp"

namespace pcrpo {

enum class Algorithm { Pcrpo, Crpo, Scrpo };
enum class EvalMode { Exact, Td };
// Which per-channel gradients enter the projection combination: the tabular
// natural-gradient tables Q/(1-gamma), or the vanilla policy gradients.
enum class GradientSource { NpgQ, Vanilla };
enum class SlackDecayLaw { Geometric, Linear };

const char* to_string(Algorithm a);
const char* to_string(EvalMode m);

constexpr double kInf = std::numeric_limits<double>::infinity();

// Slack band around each cost limit. The three canonical regimes:
//   One:   h_plus = +inf, h_minus = 0   (reward first, project on violation)
//   Two:   h_plus = 0, h_minus = -inf   (project until violation, then safety)
//   Three: finite h_plus > 0 >= h_minus (full band; h_minus = 0 admitted so
//          the one-sided decaying variant is expressible)
struct SlackConfig {
  double h_plus = kInf;
  double h_minus = 0.0;
  bool decay_plus = false;
  bool decay_minus = false;
  SlackDecayLaw decay_law = SlackDecayLaw::Geometric;
  // initial bounds, captured before any decay; used by the linear law
  double h_plus_init = kInf;
  double h_minus_init = 0.0;

  enum class Case { One, Two, Three };
  Case slack_case() const;
  void validate() const;

  static SlackConfig case_one();
  static SlackConfig case_two();
  static SlackConfig case_three(double h_plus, double h_minus, bool decay_plus,
                                bool decay_minus);
};

struct TrainerConfig {
  int total_iters = 400;
  double eta = 1.0;
  double kl_threshold = 0.01;
  long k_td = 200000;
  double td_lr0 = kDefaultTdLr0;
  EvalMode eval_mode = EvalMode::Exact;
  std::uint64_t seed = 1;
  Algorithm algorithm = Algorithm::Pcrpo;
  bool normalize_gradients = true;
  GradientWeights weights;
  GradientSource gradient_source = GradientSource::NpgQ;
  int safety_warmup_iters = 0;
  int max_kl_halvings = 20;
  double init_logit_scale = 0.1;

  void validate() const;
};

struct UpdateMode {
  enum class Kind { RewardOnly, SafetyOnly, Projection };
  Kind kind = Kind::RewardOnly;
  int constraint = -1;  // violated / binding channel for SafetyOnly, Projection

  bool operator==(const UpdateMode& o) const { return kind == o.kind; }
  std::string name() const;
};

// One iteration of the log. theta_deg is NaN outside Projection mode;
// step_scale is the accepted fraction of eta after KL backtracking
// (0 on a stall).
struct TrainRecord {
  int iter = 0;
  double v_r = 0.0;
  std::vector<double> v_c;
  UpdateMode mode;
  double theta_deg = std::numeric_limits<double>::quiet_NaN();
  double kl_realized = 0.0;
  double h_plus_t = kInf;
  double h_minus_t = 0.0;
  double step_scale = 1.0;
};

// The slack-case decision table. Case One: any violation => Projection, else
// RewardOnly. Case Two: any violation => SafetyOnly, else Projection. Case
// Three: any channel above b + h_plus => SafetyOnly; else any channel inside
// the closed band [b + h_minus, b + h_plus] => Projection; else RewardOnly.
// Channel selection is by maximum violation normalized by max(1, |b|).
UpdateMode select_mode(const std::vector<double>& cost_values,
                       const Vector& limits, const SlackConfig& slack);

// One decay application: geometric multiplies each enabled bound by
// (1 - 1/total_iters); linear walks it toward zero by h_init/total_iters.
// Cases One and Two are returned unchanged.
SlackConfig decay_slack(const SlackConfig& slack, int total_iters);

struct StepResult {
  SoftmaxPolicy policy;
  TrainRecord record;
};

// A single iteration: evaluate per-channel Q, pick the mode, take the NPG or
// projected step, enforce the KL trust region by step halving. The slack
// argument is updated in place (case-three decay precedes mode selection).
StepResult pcrpo_step(const CmdpSpec& spec, const TrainerConfig& config,
                      const SoftmaxPolicy& policy, SlackConfig& slack, int iter);
StepResult crpo_step(const CmdpSpec& spec, const TrainerConfig& config,
                     const SoftmaxPolicy& policy, SlackConfig& slack, int iter);
StepResult scrpo_step(const CmdpSpec& spec, const TrainerConfig& config,
                      const SoftmaxPolicy& policy, SlackConfig& slack, int iter);

struct TrainResult {
  std::vector<TrainRecord> records;
  SoftmaxPolicy final_policy;
};

// Runs config.total_iters iterations of the configured algorithm.
// Deterministic per seed.
TrainResult train(const TrainerConfig& config, const CmdpSpec& spec,
                  SlackConfig slack);

// Number of consecutive record pairs whose update modes differ.
int mode_flip_count(const std::vector<TrainRecord>& records);

}  // namespace pcrpo
