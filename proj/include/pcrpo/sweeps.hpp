#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pcrpo/gradmanip.hpp"

namespace pcrpo {

// Per-sample measurements of the gradient-kernel properties on one random
// pair: a raw Gaussian pair and its unit-normalized counterpart. Residuals
// are defined so that 0 is ideal.
struct PairOutcome {
  double cos_theta = 0.0;        // angle of the unit pair
  double orth_residual = 0.0;    // |proj(a|b).b| / (|a||b|), worst of both orders
  double idem_residual = 0.0;    // relative change of re-projecting
  double eqnorm_residual = 0.0;  // | |g| - (1-c)|gbar| |, unit pair, c <= 0
  bool eqnorm_checked = false;
  double ascent_residual = 0.0;  // relative error of the ascent identity
  double surgery_gap = 0.0;      // |g| - |g'| on the unit pair, c < 0
  bool surgery_checked = false;
  double raw_avg_gap = 0.0;      // |g| - |gbar| on the raw pair (informational)
  double raw_surgery_gap = 0.0;  // |g| - |g'| on the raw pair (informational)
};

// Deterministic per-index sample; the sweep output does not depend on
// evaluation order or thread count.
PairOutcome evaluate_pair_sample(int dim, std::uint64_t seed, long index);

std::vector<PairOutcome> gradient_sweep_serial(int dim, long n_samples,
                                               std::uint64_t seed);
std::vector<PairOutcome> gradient_sweep_parallel(int dim, long n_samples,
                                                 std::uint64_t seed);

struct GradientSweepReport {
  int dim = 0;
  long samples = 0;
  long conflict_samples = 0;

  long orth_violations = 0;
  double worst_orth = 0.0;
  long idem_violations = 0;
  double worst_idem = 0.0;
  long eqnorm_checked = 0;
  long eqnorm_violations = 0;
  double worst_eqnorm = 0.0;
  long ascent_violations = 0;
  double worst_ascent = 0.0;

  long surgery_checked = 0;
  long surgery_violations = 0;
  double worst_surgery_gap = 0.0;       // most negative |g| - |g'|
  double surgery_violation_max_cos = -1.0;  // largest cos among violations
  std::vector<long> surgery_counterexamples;  // first few sample indices

  // informational raw-norm section: how often the dominance claims fail for
  // unnormalized gradients
  long raw_avg_dominance_failures = 0;
  long raw_surgery_dominance_failures = 0;

  bool asserted_properties_pass() const {
    return orth_violations == 0 && idem_violations == 0 &&
           eqnorm_violations == 0 && ascent_violations == 0 &&
           surgery_violations == 0;
  }
};

GradientSweepReport summarize_gradient_sweep(std::span<const PairOutcome> outcomes,
                                             int dim);

// One random quadratic instance checked at eta = 1/L and eta = 1/(2L).
// Instances alternate between the aligned and conflicting gradient regimes.
struct TheoremOutcome {
  int dim = 0;
  double cos_theta = 0.0;
  TheoremCheck at_full_step;  // eta = 1/L
  TheoremCheck at_half_step;  // eta = 1/(2L)
  bool positive_ok = true;    // delta_f > 0 whenever sin(theta) != 0
};

TheoremOutcome evaluate_theorem_sample(std::uint64_t seed, long index);

std::vector<TheoremOutcome> theorem_sweep_serial(long n_instances,
                                                 std::uint64_t seed);
std::vector<TheoremOutcome> theorem_sweep_parallel(long n_instances,
                                                   std::uint64_t seed);

struct TheoremSweepReport {
  long instances = 0;
  long lower_bound_failures = 0;
  long positivity_failures = 0;
  long upper_bound_holds = 0;  // satisfaction count over both step sizes
  long upper_bound_checks = 0;
  double worst_lower_margin = 0.0;  // min(delta_f - lower) over everything

  bool lower_bound_passes() const {
    return lower_bound_failures == 0 && positivity_failures == 0;
  }
};

TheoremSweepReport summarize_theorem_sweep(std::span<const TheoremOutcome> outcomes);

}  // namespace pcrpo
