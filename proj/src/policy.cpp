#include "pcrpo/policy.hpp"

#include <cmath>

#include "pcrpo/cmdp.hpp"

namespace pcrpo {

SoftmaxPolicy SoftmaxPolicy::random_init(int n_states, int n_actions,
                                         double scale, Rng& rng) {
  Matrix logits(n_states, n_actions);
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) {
      logits(s, a) = scale * rng.normal();
    }
  }
  return SoftmaxPolicy(std::move(logits));
}

Vector SoftmaxPolicy::action_probs(int s) const {
  if (s < 0 || s >= n_states()) {
    throw DimensionMismatchError("state index out of range");
  }
  const Vector row = logits_.row(s);
  const Vector shifted = row.array() - row.maxCoeff();
  Vector e = shifted.array().exp();
  return e / e.sum();
}

Matrix SoftmaxPolicy::prob_matrix() const {
  Matrix probs(n_states(), n_actions());
  for (int s = 0; s < n_states(); ++s) {
    probs.row(s) = action_probs(s);
  }
  return probs;
}

Vector SoftmaxPolicy::score(int s, int a) const {
  if (s < 0 || s >= n_states() || a < 0 || a >= n_actions()) {
    throw DimensionMismatchError("state/action index out of range");
  }
  Vector out = Vector::Zero(static_cast<Eigen::Index>(n_states()) * n_actions());
  const Vector probs = action_probs(s);
  for (int a2 = 0; a2 < n_actions(); ++a2) {
    out(static_cast<Eigen::Index>(s) * n_actions() + a2) =
        (a2 == a ? 1.0 : 0.0) - probs(a2);
  }
  return out;
}

Vector flatten(const Matrix& m) {
  Vector v(m.size());
  for (int s = 0; s < m.rows(); ++s) {
    for (int a = 0; a < m.cols(); ++a) {
      v(static_cast<Eigen::Index>(s) * m.cols() + a) = m(s, a);
    }
  }
  return v;
}

Matrix unflatten(const Vector& v, int n_states, int n_actions) {
  if (v.size() != static_cast<Eigen::Index>(n_states) * n_actions) {
    throw DimensionMismatchError("flattened vector has wrong length");
  }
  Matrix m(n_states, n_actions);
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) {
      m(s, a) = v(static_cast<Eigen::Index>(s) * n_actions + a);
    }
  }
  return m;
}

SoftmaxPolicy npg_update(const SoftmaxPolicy& policy, const QTable& q,
                         double gamma, double eta, int sign) {
  if (eta <= 0.0) throw StepTooLargeError("eta must be positive");
  if (q.table.rows() != policy.n_states() ||
      q.table.cols() != policy.n_actions()) {
    throw DimensionMismatchError("Q table shape does not match the policy");
  }
  const double scale = sign * eta / (1.0 - gamma);
  return SoftmaxPolicy(policy.logits() + scale * q.table);
}

SoftmaxPolicy direction_update(const SoftmaxPolicy& policy, const Vector& d,
                               double eta) {
  return SoftmaxPolicy(policy.logits() +
                       eta * unflatten(d, policy.n_states(), policy.n_actions()));
}

double kl_divergence(const SoftmaxPolicy& old_policy,
                     const SoftmaxPolicy& new_policy,
                     const Vector& state_weights) {
  if (old_policy.n_states() != new_policy.n_states() ||
      old_policy.n_actions() != new_policy.n_actions()) {
    throw DimensionMismatchError("policies have different shapes");
  }
  if (state_weights.size() != old_policy.n_states()) {
    throw DimensionMismatchError("state weights have wrong length");
  }
  if (std::abs(state_weights.sum() - 1.0) > 1e-6 ||
      state_weights.minCoeff() < -1e-12) {
    throw InvalidSpecError("state weights must form a distribution");
  }
  double kl = 0.0;
  for (int s = 0; s < old_policy.n_states(); ++s) {
    if (state_weights(s) <= 0.0) continue;
    const Vector po = old_policy.action_probs(s);
    const Vector pn = new_policy.action_probs(s);
    double per_state = 0.0;
    for (int a = 0; a < old_policy.n_actions(); ++a) {
      if (po(a) <= 0.0) continue;  // softmax keeps probabilities positive
      per_state += po(a) * std::log(po(a) / pn(a));
    }
    kl += state_weights(s) * per_state;
  }
  return kl < 0.0 && kl > -1e-15 ? 0.0 : kl;
}

Vector value_gradient(const CmdpSpec& spec, const SoftmaxPolicy& policy,
                      const QTable& q) {
  if (q.table.rows() != spec.n_states || q.table.cols() != spec.n_actions ||
      policy.n_states() != spec.n_states) {
    throw DimensionMismatchError("Q/policy shape does not match the spec");
  }
  const Vector occ = discounted_occupancy(spec, policy);
  const Matrix probs = policy.prob_matrix();
  // grad[s, a] = occ(s) * pi(a|s) * (Q(s, a) - V(s)) with V(s) = sum_a pi Q
  Matrix grad(spec.n_states, spec.n_actions);
  for (int s = 0; s < spec.n_states; ++s) {
    const double v = probs.row(s).dot(q.table.row(s));
    for (int a = 0; a < spec.n_actions; ++a) {
      grad(s, a) = occ(s) * probs(s, a) * (q.table(s, a) - v);
    }
  }
  return flatten(grad);
}

Vector value_gradient_sampled(const CmdpSpec& spec, const SoftmaxPolicy& policy,
                              const QTable& q, int n_trajectories, int horizon,
                              std::uint64_t seed) {
  if (n_trajectories < 1) throw InvalidSpecError("need at least one trajectory");
  if (horizon < 0) horizon = default_horizon(spec.gamma);
  Vector acc = Vector::Zero(static_cast<Eigen::Index>(spec.n_states) * spec.n_actions);
  for (int i = 0; i < n_trajectories; ++i) {
    const Trajectory traj =
        sample_trajectory(spec, policy, horizon, derive_seed(seed, {0x67u, static_cast<std::uint64_t>(i)}));
    double discount = 1.0;
    for (const TrajectoryStep& step : traj.steps) {
      acc += discount * q.table(step.state, step.action) *
             policy.score(step.state, step.action);
      discount *= spec.gamma;
    }
  }
  return acc / n_trajectories;
}

}  // namespace pcrpo
