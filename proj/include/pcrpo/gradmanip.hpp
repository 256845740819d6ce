#pragma once

#include "pcrpo/rng.hpp"
#include "pcrpo/types.hpp"

namespace pcrpo {

// Convex weights for the two combination rules. beta_r/beta_c weight the raw
// gradients in the aligned rule, beta_r_plus/beta_c_plus weight the projected
// gradients in the conflict rule. Each pair must sum to 1.
struct GradientWeights {
  double beta_r = 0.5;
  double beta_c = 0.5;
  double beta_r_plus = 0.5;
  double beta_c_plus = 0.5;
  void validate() const;
};

// A reward gradient and a cost gradient of equal dimension, plus the weights
// used when they are combined.
struct GradientPair {
  Vector g_r;
  Vector g_c;
  GradientWeights weights;

  GradientPair() = default;
  GradientPair(Vector reward_grad, Vector cost_grad, GradientWeights w = {})
      : g_r(std::move(reward_grad)), g_c(std::move(cost_grad)), weights(w) {}
};

enum class CombineMode { ConflictProjected, AlignedAveraged };

const char* to_string(CombineMode mode);

// Combined update direction with the geometry that produced it.
// mode == ConflictProjected exactly when cos_theta < 0; the cos_theta == 0
// boundary resolves to AlignedAveraged (both rules coincide there).
// effective_weights are the coefficients (lambda_r, lambda_c) such that
// direction == lambda_r * g_r + lambda_c * g_c for the (possibly normalized)
// inputs that entered the combination.
struct ManipulationResult {
  Vector direction;
  double cos_theta = 1.0;
  double theta_deg = 0.0;
  CombineMode mode = CombineMode::AlignedAveraged;
  double lambda_r = 0.0;
  double lambda_c = 0.0;
};

// cos of the angle between two nonzero vectors, clamped into [-1, 1] so that
// downstream acos never sees floating-point overshoot.
// Throws ZeroGradientError if either norm <= kZeroNormEps.
double cos_angle(const Vector& g_a, const Vector& g_b);

// g_a minus its component along g_b; the residual is orthogonal to g_b.
// Throws ZeroGradientError if ||g_b|| <= kZeroNormEps.
Vector project_onto_normal_plane(const Vector& g_a, const Vector& g_b);

// beta_r_plus * proj(g_r | g_c) + beta_c_plus * proj(g_c | g_r).
// Intended for conflicting pairs (cos < 0) but defined for any nonzero pair.
Vector combine_conflicting(const GradientPair& pair);

// beta_r * g_r + beta_c * g_c.
Vector combine_aligned(const GradientPair& pair);

// Dispatches to combine_conflicting when cos < 0, combine_aligned otherwise.
// If exactly one gradient is zero, returns the other scaled by its beta weight
// (a total function is simpler for the trainer; no combination is needed when
// one channel is inactive). Throws ZeroGradientError only when both are zero.
// With normalize set, both gradients are rescaled to unit norm first.
ManipulationResult manipulate(const GradientPair& pair, bool normalize = false);

// One-sided comparison rule: (g_r + proj(g_c | g_r)) / 2 when the pair
// conflicts, plain average otherwise. Both gradients must be nonzero.
Vector surgery_combine(const GradientPair& pair);

// surgery_combine with the same dispatch/normalize/degenerate handling as
// manipulate, for use as a drop-in alternative update rule.
ManipulationResult surgery_manipulate(const GradientPair& pair,
                                      bool normalize = false);

struct NormComparison {
  double combined = 0.0;   // ||conflict-projected combination||
  double averaged = 0.0;   // ||plain weighted average||
  double surgery = 0.0;    // ||one-sided surgery combination||
  bool dominates_average = false;  // combined >= averaged
  bool dominates_surgery = false;  // combined >= surgery
};

// Norms of the three candidate directions for the given pair, evaluated both
// on the raw gradients and after rescaling each to unit norm. The dominance
// relations are provable only in the unit-norm regime, and even there only
// for cos_theta above (1 - sqrt(17))/4 in the surgery case; the report
// exposes measurements instead of asserting either claim.
struct NormDominanceReport {
  double cos_theta = 0.0;
  double theta_deg = 0.0;
  NormComparison raw;
  NormComparison normalized;
};

NormDominanceReport norm_dominance_report(const GradientPair& pair);

struct ImprovementBounds {
  double lower = 0.0;
  double upper = 0.0;
};

// One-step improvement bounds for f = f_r + f_c under L-smoothness when the
// parameters move along the manipulate direction with step eta <= 1/L.
//
// Conflicting regime (cos < 0), with a = ||g_r||, b = ||g_c||, c = cos theta:
//   lower = eta * (3a^2 + 3b^2 - 3c^2(a^2+b^2) - 2c^3 ab + 2c ab) / 8
//   upper = (1/L) * (5a^2 + 5b^2 - 5c^2(a^2+b^2) + 2c^3 ab - 2c ab) / 8
// Aligned regime (cos >= 0):
//   lower = eta * (3a^2 + 6c ab + 3b^2) / 8
//   upper = (1/L) * (5a^2 + 10c ab + 5b^2) / 8
//
// Throws StepTooLargeError if eta > 1/L, ZeroGradientError on zero inputs.
ImprovementBounds improvement_bounds(const GradientPair& pair, double eta,
                                     double lipschitz);

// Pair of concave quadratic surrogates f_r, f_c with f_i(w) =
// 0.5 w^T H_i w + b_i^T w, plus a smoothness constant L >= ||H_r + H_c||_2.
struct QuadraticTestSpec {
  Matrix h_r;
  Matrix h_c;
  Vector b_r;
  Vector b_c;
  Vector w0;
  double lipschitz = 1.0;

  int dim() const { return static_cast<int>(w0.size()); }
  double f(const Vector& w) const;
  Vector grad_r(const Vector& w) const { return h_r * w + b_r; }
  Vector grad_c(const Vector& w) const { return h_c * w + b_c; }

  // Checks symmetry, negative semidefiniteness, and L >= ||H_r + H_c||_2.
  void validate() const;

  // Random instance with H_i = -A_i A_i^T / dim and L set to the exact
  // spectral norm of H_r + H_c.
  static QuadraticTestSpec random(int dim, Rng& rng);
};

struct TheoremCheck {
  double delta_f = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double cos_theta = 0.0;
  double theta_deg = 0.0;
  bool lower_holds = false;
  bool upper_holds = false;
};

// Takes one step w1 = w0 + eta * manipulate(g_r, g_c) on the quadratic pair
// and checks the measured improvement f(w1) - f(w0) against
// improvement_bounds (lower bound with 1e-9 slack).
TheoremCheck verify_theorem_bounds(const QuadraticTestSpec& spec, double eta);

}  // namespace pcrpo
