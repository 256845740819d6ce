#include "pcrpo/trainer.hpp"

#include <cmath>

namespace pcrpo {

namespace {

constexpr std::uint64_t kInitStream = 0x01;
constexpr std::uint64_t kEvalStream = 0x02;

std::vector<QEstimate> evaluate_channels(const CmdpSpec& spec,
                                         const TrainerConfig& config,
                                         const SoftmaxPolicy& policy,
                                         int iter) {
  std::vector<QEstimate> qhats;
  qhats.reserve(spec.n_channels() + 1);
  for (int c = -1; c < spec.n_channels(); ++c) {
    const Channel ch = c < 0 ? Channel::reward() : Channel::cost(c);
    if (config.eval_mode == EvalMode::Exact) {
      qhats.push_back({exact_q(spec, policy, ch), 0, 0.0, 0.0});
    } else {
      const std::uint64_t seed =
          derive_seed(config.seed, {kEvalStream, static_cast<std::uint64_t>(iter),
                                    static_cast<std::uint64_t>(c + 1)});
      qhats.push_back(td_q_estimate(spec, policy, ch, config.k_td,
                                    config.td_lr0, seed));
    }
  }
  return qhats;
}

// Candidate update for a fixed effective step size.
SoftmaxPolicy propose(const CmdpSpec& spec, const TrainerConfig& config,
                      const SoftmaxPolicy& policy,
                      const std::vector<QEstimate>& qhats,
                      const UpdateMode& mode, double eta_eff,
                      double* theta_out) {
  switch (mode.kind) {
    case UpdateMode::Kind::RewardOnly:
      return npg_update(policy, qhats[0].q, spec.gamma, eta_eff, +1);
    case UpdateMode::Kind::SafetyOnly:
      return npg_update(policy, qhats[mode.constraint + 1].q, spec.gamma,
                        eta_eff, -1);
    case UpdateMode::Kind::Projection: {
      const int ci = mode.constraint < 0 ? 0 : mode.constraint;
      GradientPair pair;
      pair.weights = config.weights;
      if (config.gradient_source == GradientSource::NpgQ) {
        // natural-gradient tables; cost side sign-flipped so ascent along it
        // reduces the cost value
        const double scale = 1.0 / (1.0 - spec.gamma);
        pair.g_r = flatten(qhats[0].q.table) * scale;
        pair.g_c = flatten(qhats[ci + 1].q.table) * (-scale);
      } else {
        pair.g_r = value_gradient(spec, policy, qhats[0].q);
        pair.g_c = -value_gradient(spec, policy, qhats[ci + 1].q);
      }
      const bool surgery = config.algorithm == Algorithm::Scrpo;
      const ManipulationResult m =
          surgery ? surgery_manipulate(pair, config.normalize_gradients)
                  : manipulate(pair, config.normalize_gradients);
      if (theta_out) *theta_out = m.theta_deg;
      return direction_update(policy, m.direction, eta_eff);
    }
  }
  return policy;
}

StepResult run_step(const CmdpSpec& spec, const TrainerConfig& config,
                    const SoftmaxPolicy& policy, SlackConfig& slack, int iter) {
  const std::vector<QEstimate> qhats =
      evaluate_channels(spec, config, policy, iter);
  const std::vector<double> values = estimate_values(spec, policy, qhats);
  const std::vector<double> cost_values(values.begin() + 1, values.end());

  const bool warmup = iter < config.safety_warmup_iters;
  UpdateMode mode;
  if (config.algorithm == Algorithm::Crpo) {
    // hard switching: reward ascent unless some constraint is violated
    mode.kind = UpdateMode::Kind::RewardOnly;
    double worst = 0.0;
    for (int i = 0; i < spec.n_channels(); ++i) {
      const double viol = (cost_values[i] - spec.limits(i)) /
                          std::max(1.0, std::abs(spec.limits(i)));
      if (cost_values[i] > spec.limits(i) && viol > worst) {
        mode = {UpdateMode::Kind::SafetyOnly, i};
        worst = viol;
      }
    }
  } else if (!warmup) {
    if (slack.slack_case() == SlackConfig::Case::Three) {
      slack = decay_slack(slack, config.total_iters);
    }
    mode = select_mode(cost_values, spec.limits, slack);
  }
  if (warmup) mode = {UpdateMode::Kind::RewardOnly, -1};

  // KL trust region by step halving against the old policy, states weighted
  // by its normalized discounted occupancy.
  Vector occ = discounted_occupancy(spec, policy);
  occ /= occ.sum();

  double theta = std::numeric_limits<double>::quiet_NaN();
  double eta_eff = config.eta;
  SoftmaxPolicy next = policy;
  double kl = 0.0;
  bool accepted = false;
  for (int halving = 0; halving <= config.max_kl_halvings; ++halving) {
    double theta_try = std::numeric_limits<double>::quiet_NaN();
    SoftmaxPolicy candidate =
        propose(spec, config, policy, qhats, mode, eta_eff, &theta_try);
    theta = theta_try;  // geometry is step-size independent; keep it on stalls
    kl = kl_divergence(policy, candidate, occ);
    if (kl <= config.kl_threshold) {
      next = std::move(candidate);
      accepted = true;
      break;
    }
    eta_eff *= 0.5;
  }
  if (!accepted) {
    // stall: keep the policy, record a zero step
    next = policy;
    eta_eff = 0.0;
    kl = 0.0;
  }

  TrainRecord rec;
  rec.iter = iter;
  rec.v_r = values[0];
  rec.v_c = cost_values;
  rec.mode = mode;
  rec.theta_deg = theta;
  rec.kl_realized = kl;
  rec.h_plus_t = slack.h_plus;
  rec.h_minus_t = slack.h_minus;
  rec.step_scale = config.eta > 0.0 ? eta_eff / config.eta : 0.0;
  return {std::move(next), std::move(rec)};
}

}  // namespace

const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Pcrpo: return "pcrpo";
    case Algorithm::Crpo: return "crpo";
    case Algorithm::Scrpo: return "scrpo";
  }
  return "?";
}

const char* to_string(EvalMode m) {
  return m == EvalMode::Exact ? "exact" : "td";
}

SlackConfig::Case SlackConfig::slack_case() const {
  if (std::isinf(h_plus) && h_plus > 0.0 && h_minus == 0.0) return Case::One;
  if (h_plus == 0.0 && std::isinf(h_minus) && h_minus < 0.0) return Case::Two;
  return Case::Three;
}

void SlackConfig::validate() const {
  if (std::isnan(h_plus) || std::isnan(h_minus)) {
    throw ConfigError("slack bounds must not be NaN");
  }
  if (h_plus < 0.0 || h_minus > 0.0) {
    throw ConfigError("need h_plus >= 0 and h_minus <= 0");
  }
  if (slack_case() == Case::Three &&
      (std::isinf(h_plus) || std::isinf(h_minus))) {
    throw ConfigError("case-three slack bounds must be finite");
  }
  if (slack_case() == Case::Three && h_plus <= 0.0 && h_minus >= 0.0) {
    throw ConfigError("case-three band is empty");
  }
}

SlackConfig SlackConfig::case_one() {
  SlackConfig s;
  s.h_plus = kInf;
  s.h_minus = 0.0;
  s.h_plus_init = kInf;
  s.h_minus_init = 0.0;
  return s;
}

SlackConfig SlackConfig::case_two() {
  SlackConfig s;
  s.h_plus = 0.0;
  s.h_minus = -kInf;
  s.h_plus_init = 0.0;
  s.h_minus_init = -kInf;
  return s;
}

SlackConfig SlackConfig::case_three(double h_plus, double h_minus,
                                    bool decay_plus, bool decay_minus) {
  SlackConfig s;
  s.h_plus = h_plus;
  s.h_minus = h_minus;
  s.h_plus_init = h_plus;
  s.h_minus_init = h_minus;
  s.decay_plus = decay_plus;
  s.decay_minus = decay_minus;
  s.validate();
  return s;
}

void TrainerConfig::validate() const {
  if (total_iters < 0) throw ConfigError("total_iters must be nonnegative");
  if (eta <= 0.0) throw ConfigError("eta must be positive");
  if (kl_threshold <= 0.0) throw ConfigError("kl_threshold must be positive");
  if (k_td < 1) throw ConfigError("k_td must be at least 1");
  if (td_lr0 <= 0.0) throw ConfigError("td_lr0 must be positive");
  if (safety_warmup_iters < 0) throw ConfigError("warmup must be nonnegative");
  if (max_kl_halvings < 0) throw ConfigError("max_kl_halvings must be nonnegative");
  weights.validate();
}

std::string UpdateMode::name() const {
  switch (kind) {
    case Kind::RewardOnly: return "reward_only";
    case Kind::SafetyOnly: return "safety_only";
    case Kind::Projection: return "projection";
  }
  return "?";
}

UpdateMode select_mode(const std::vector<double>& cost_values,
                       const Vector& limits, const SlackConfig& slack) {
  if (static_cast<Eigen::Index>(cost_values.size()) != limits.size()) {
    throw ChannelMismatchError("one cost value per limit required");
  }
  slack.validate();
  const int n = static_cast<int>(cost_values.size());
  auto normalized_violation = [&](int i) {
    return (cost_values[i] - limits(i)) / std::max(1.0, std::abs(limits(i)));
  };
  // worst channel above the given offset from its limit (strict comparison)
  auto worst_above = [&](double offset) {
    int arg = -1;
    double worst = -kInf;
    for (int i = 0; i < n; ++i) {
      if (cost_values[i] > limits(i) + offset) {
        const double v = normalized_violation(i);
        if (v > worst) {
          worst = v;
          arg = i;
        }
      }
    }
    return arg;
  };

  switch (slack.slack_case()) {
    case SlackConfig::Case::One: {
      // violations are handled by combined optimization, otherwise pure reward
      int arg = -1;
      double worst = -kInf;
      for (int i = 0; i < n; ++i) {
        if (cost_values[i] >= limits(i) && normalized_violation(i) > worst) {
          worst = normalized_violation(i);
          arg = i;
        }
      }
      if (arg >= 0) return {UpdateMode::Kind::Projection, arg};
      return {UpdateMode::Kind::RewardOnly, -1};
    }
    case SlackConfig::Case::Two: {
      int arg = -1;
      double worst = -kInf;
      for (int i = 0; i < n; ++i) {
        if (cost_values[i] >= limits(i) && normalized_violation(i) > worst) {
          worst = normalized_violation(i);
          arg = i;
        }
      }
      if (arg >= 0) return {UpdateMode::Kind::SafetyOnly, arg};
      // all satisfied: keep improving reward while pushing cost down
      int binding = 0;
      double best = -kInf;
      for (int i = 0; i < n; ++i) {
        if (normalized_violation(i) > best) {
          best = normalized_violation(i);
          binding = i;
        }
      }
      return {UpdateMode::Kind::Projection, binding};
    }
    case SlackConfig::Case::Three: {
      const int above = worst_above(slack.h_plus);
      if (above >= 0) return {UpdateMode::Kind::SafetyOnly, above};
      // any channel inside the closed band => combined update; boundaries
      // route to the band
      int in_band = -1;
      double best = -kInf;
      for (int i = 0; i < n; ++i) {
        if (cost_values[i] >= limits(i) + slack.h_minus &&
            cost_values[i] <= limits(i) + slack.h_plus) {
          if (normalized_violation(i) > best) {
            best = normalized_violation(i);
            in_band = i;
          }
        }
      }
      if (in_band >= 0) return {UpdateMode::Kind::Projection, in_band};
      return {UpdateMode::Kind::RewardOnly, -1};
    }
  }
  return {UpdateMode::Kind::RewardOnly, -1};
}

SlackConfig decay_slack(const SlackConfig& slack, int total_iters) {
  if (total_iters < 1) throw ConfigError("total_iters must be positive");
  if (slack.slack_case() != SlackConfig::Case::Three) return slack;
  SlackConfig out = slack;
  const double t = static_cast<double>(total_iters);
  if (slack.decay_law == SlackDecayLaw::Geometric) {
    if (out.decay_plus) out.h_plus -= out.h_plus / t;
    if (out.decay_minus) out.h_minus -= out.h_minus / t;
  } else {
    if (out.decay_plus) out.h_plus = std::max(0.0, out.h_plus - out.h_plus_init / t);
    if (out.decay_minus) out.h_minus = std::min(0.0, out.h_minus - out.h_minus_init / t);
  }
  return out;
}

StepResult pcrpo_step(const CmdpSpec& spec, const TrainerConfig& config,
                      const SoftmaxPolicy& policy, SlackConfig& slack, int iter) {
  TrainerConfig c = config;
  c.algorithm = Algorithm::Pcrpo;
  return run_step(spec, c, policy, slack, iter);
}

StepResult crpo_step(const CmdpSpec& spec, const TrainerConfig& config,
                     const SoftmaxPolicy& policy, SlackConfig& slack, int iter) {
  TrainerConfig c = config;
  c.algorithm = Algorithm::Crpo;
  return run_step(spec, c, policy, slack, iter);
}

StepResult scrpo_step(const CmdpSpec& spec, const TrainerConfig& config,
                      const SoftmaxPolicy& policy, SlackConfig& slack, int iter) {
  TrainerConfig c = config;
  c.algorithm = Algorithm::Scrpo;
  return run_step(spec, c, policy, slack, iter);
}

TrainResult train(const TrainerConfig& config, const CmdpSpec& spec,
                  SlackConfig slack) {
  config.validate();
  slack.validate();
  require_valid(spec);

  Rng init_rng(derive_seed(config.seed, {kInitStream}));
  SoftmaxPolicy policy = SoftmaxPolicy::random_init(
      spec.n_states, spec.n_actions, config.init_logit_scale, init_rng);

  TrainResult result;
  result.records.reserve(config.total_iters);
  for (int t = 0; t < config.total_iters; ++t) {
    StepResult step = run_step(spec, config, policy, slack, t);
    policy = std::move(step.policy);
    result.records.push_back(std::move(step.record));
  }
  result.final_policy = std::move(policy);
  return result;
}

int mode_flip_count(const std::vector<TrainRecord>& records) {
  int flips = 0;
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (!(records[i].mode == records[i - 1].mode)) ++flips;
  }
  return flips;
}

}  // namespace pcrpo
