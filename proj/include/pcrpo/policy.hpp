#pragma once

#include <cstdint>

#include "pcrpo/rng.hpp"
#include "pcrpo/types.hpp"

namespace pcrpo {

struct CmdpSpec;

// Tabular softmax policy over a finite CMDP: pi(a|s) = softmax(logits row s).
// Logits are unnormalized (softmax is shift-invariant per state), so tests
// and comparisons should assert on probabilities, not raw logits.
class SoftmaxPolicy {
 public:
  SoftmaxPolicy() = default;
  SoftmaxPolicy(int n_states, int n_actions)
      : logits_(Matrix::Zero(n_states, n_actions)) {}
  explicit SoftmaxPolicy(Matrix logits) : logits_(std::move(logits)) {}

  static SoftmaxPolicy random_init(int n_states, int n_actions, double scale,
                                   Rng& rng);

  int n_states() const { return static_cast<int>(logits_.rows()); }
  int n_actions() const { return static_cast<int>(logits_.cols()); }
  const Matrix& logits() const { return logits_; }

  // softmax of the logits row, stabilized by max subtraction
  Vector action_probs(int s) const;
  Matrix prob_matrix() const;

  // score phi(s,a) = grad_w log pi(a|s), flattened to length S*A with
  // index s * n_actions + a; row s carries 1{a'==a} - pi(a'|s), rest is zero.
  Vector score(int s, int a) const;

 private:
  Matrix logits_;
};

// Flattening convention shared by all parameter-space vectors.
Vector flatten(const Matrix& m);
Matrix unflatten(const Vector& v, int n_states, int n_actions);

// Natural-gradient tabular update w' = w + sign * eta * Q / (1 - gamma).
// sign +1 ascends the reward channel, -1 descends a cost channel.
SoftmaxPolicy npg_update(const SoftmaxPolicy& policy, const QTable& q,
                         double gamma, double eta, int sign);

// Plain parameter-space step w' = w + eta * d for a flattened direction d.
SoftmaxPolicy direction_update(const SoftmaxPolicy& policy, const Vector& d,
                               double eta);

// Sum_s weights(s) * KL(old(.|s) || new(.|s)); weights must sum to 1.
double kl_divergence(const SoftmaxPolicy& old_policy,
                     const SoftmaxPolicy& new_policy,
                     const Vector& state_weights);

// Exact policy gradient of the channel value: grad V(rho) =
// sum_s occ(s) sum_a pi(a|s) Q(s,a) phi(s,a) with the unnormalized discounted
// occupancy from the linear solve, so it matches finite differences of
// exact_value directly.
Vector value_gradient(const CmdpSpec& spec, const SoftmaxPolicy& policy,
                      const QTable& q);

// Trajectory-sampled estimate of the same quantity; converges to the exact
// gradient as n_trajectories grows. horizon < 0 uses the spec default.
Vector value_gradient_sampled(const CmdpSpec& spec, const SoftmaxPolicy& policy,
                              const QTable& q, int n_trajectories, int horizon,
                              std::uint64_t seed);

}  // namespace pcrpo
