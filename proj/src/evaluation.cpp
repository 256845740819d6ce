#include "pcrpo/evaluation.hpp"

#include <cmath>
#include <cstdio>

#include "pcrpo/rng.hpp"

namespace pcrpo {

QEstimate td_q_estimate(const CmdpSpec& spec, const SoftmaxPolicy& policy,
                        Channel ch, long k_td, double lr0, std::uint64_t seed,
                        int horizon) {
  if (k_td < 1) throw InvalidSpecError("k_td must be at least 1");
  if (lr0 <= 0.0) throw InvalidSpecError("lr0 must be positive");
  if (horizon < 0) horizon = default_horizon(spec.gamma);

  const Matrix& table = spec.channel_table(ch);
  const Matrix probs = policy.prob_matrix();
  Matrix q = Matrix::Zero(spec.n_states, spec.n_actions);
  const double tau = static_cast<double>(k_td) / 10.0;

  Rng rng(seed);
  std::vector<double> rho(spec.rho.data(), spec.rho.data() + spec.rho.size());
  std::vector<double> row(spec.n_states);
  std::vector<double> pi_row(spec.n_actions);

  auto draw_action = [&](int state) {
    for (int a = 0; a < spec.n_actions; ++a) pi_row[a] = probs(state, a);
    return rng.categorical(pi_row);
  };

  int s = rng.categorical(rho);
  int a = draw_action(s);
  int steps_since_restart = 0;
  for (long k = 0; k < k_td; ++k) {
    for (int s2 = 0; s2 < spec.n_states; ++s2) row[s2] = spec.transition[a](s, s2);
    const int s2 = rng.categorical(row);
    const int a2 = draw_action(s2);
    const double lr = lr0 / (1.0 + static_cast<double>(k) / tau);
    q(s, a) += lr * (table(s, a) + spec.gamma * q(s2, a2) - q(s, a));
    s = s2;
    a = a2;
    if (++steps_since_restart >= horizon) {
      s = rng.categorical(rho);
      a = draw_action(s);
      steps_since_restart = 0;
    }
  }
  if (!q.allFinite()) {
    throw EvaluationError("TD estimate diverged to a non-finite value");
  }
  return {{q, ch}, k_td, lr0, tau};
}

Matrix synchronous_q_sweep(const CmdpSpec& spec, const SoftmaxPolicy& policy,
                           Channel ch, const Matrix& q, double lr) {
  if (q.rows() != spec.n_states || q.cols() != spec.n_actions) {
    throw DimensionMismatchError("Q table shape does not match the spec");
  }
  const Matrix& table = spec.channel_table(ch);
  const Matrix probs = policy.prob_matrix();
  const Vector v = (probs.array() * q.array()).rowwise().sum();
  Matrix next(spec.n_states, spec.n_actions);
  for (int a = 0; a < spec.n_actions; ++a) {
    next.col(a) = table.col(a) + spec.gamma * (spec.transition[a] * v);
  }
  return q + lr * (next - q);
}

std::vector<double> estimate_values(const CmdpSpec& spec,
                                    const SoftmaxPolicy& policy,
                                    const std::vector<QEstimate>& qhats) {
  if (static_cast<int>(qhats.size()) != spec.n_channels() + 1) {
    throw ChannelMismatchError("need one estimate per channel plus reward");
  }
  if (!(qhats[0].q.channel == Channel::reward())) {
    throw ChannelMismatchError("first estimate must be the reward channel");
  }
  for (int i = 0; i < spec.n_channels(); ++i) {
    if (!(qhats[i + 1].q.channel == Channel::cost(i))) {
      throw ChannelMismatchError("cost estimates must arrive in channel order");
    }
  }
  std::vector<double> values;
  values.reserve(qhats.size());
  for (const QEstimate& est : qhats) {
    values.push_back(value_from_q(spec, policy, est.q.table));
  }
  return values;
}

void dump_q_csv(const QEstimate& estimate, std::ostream& out) {
  out << "s,a,qhat\n";
  char buf[64];
  for (int s = 0; s < estimate.q.table.rows(); ++s) {
    for (int a = 0; a < estimate.q.table.cols(); ++a) {
      std::snprintf(buf, sizeof(buf), "%.17g", estimate.q.table(s, a));
      out << s << ',' << a << ',' << buf << '\n';
    }
  }
}

}  // namespace pcrpo
