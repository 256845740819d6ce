#include "pcrpo/montecarlo.hpp"

#include <cmath>
#include <vector>

#include "pcrpo/rng.hpp"

namespace pcrpo {

namespace {

// discounted return of one fresh rollout; all sampling state is local
double rollout_return(const CmdpSpec& spec, const Matrix& probs,
                      const Matrix& table, int horizon, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> rho(spec.rho.data(), spec.rho.data() + spec.rho.size());
  std::vector<double> pi_row(spec.n_actions);
  std::vector<double> p_row(spec.n_states);
  int s = rng.categorical(rho);
  double ret = 0.0;
  double discount = 1.0;
  for (int t = 0; t < horizon; ++t) {
    for (int a = 0; a < spec.n_actions; ++a) pi_row[a] = probs(s, a);
    const int a = rng.categorical(pi_row);
    ret += discount * table(s, a);
    discount *= spec.gamma;
    for (int s2 = 0; s2 < spec.n_states; ++s2) p_row[s2] = spec.transition[a](s, s2);
    s = rng.categorical(p_row);
  }
  return ret;
}

McEstimate reduce(const std::vector<double>& returns) {
  const long n = static_cast<long>(returns.size());
  double sum = 0.0;
  for (double r : returns) sum += r;
  const double mean = sum / n;
  double sq = 0.0;
  for (double r : returns) sq += (r - mean) * (r - mean);
  McEstimate est;
  est.mean = mean;
  est.std_error = n > 1 ? std::sqrt(sq / (n - 1) / n) : 0.0;
  est.n_trajectories = n;
  return est;
}

}  // namespace

McEstimate mc_value_serial(const CmdpSpec& spec, const SoftmaxPolicy& policy,
                           Channel ch, long n_trajectories, int horizon,
                           std::uint64_t seed) {
  if (n_trajectories < 1) throw InvalidSpecError("need at least one trajectory");
  if (horizon < 0) horizon = default_horizon(spec.gamma);
  const Matrix probs = policy.prob_matrix();
  const Matrix& table = spec.channel_table(ch);
  std::vector<double> returns(n_trajectories);
  for (long i = 0; i < n_trajectories; ++i) {
    returns[i] = rollout_return(spec, probs, table, horizon,
                                derive_seed(seed, {0x4dc0ULL, static_cast<std::uint64_t>(i)}));
  }
  return reduce(returns);
}

McEstimate mc_value(const CmdpSpec& spec, const SoftmaxPolicy& policy,
                    Channel ch, long n_trajectories, int horizon,
                    std::uint64_t seed) {
  if (n_trajectories < 1) throw InvalidSpecError("need at least one trajectory");
  if (horizon < 0) horizon = default_horizon(spec.gamma);
  const Matrix probs = policy.prob_matrix();
  const Matrix& table = spec.channel_table(ch);
  std::vector<double> returns(n_trajectories);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n_trajectories; ++i) {
    returns[i] = rollout_return(spec, probs, table, horizon,
                                derive_seed(seed, {0x4dc0ULL, static_cast<std::uint64_t>(i)}));
  }
  return reduce(returns);
}

Vector empirical_occupancy(const CmdpSpec& spec, const SoftmaxPolicy& policy,
                           long n_steps, int horizon, std::uint64_t seed) {
  if (horizon < 0) horizon = default_horizon(spec.gamma);
  const Matrix probs = policy.prob_matrix();
  Rng rng(seed);
  std::vector<double> rho(spec.rho.data(), spec.rho.data() + spec.rho.size());
  std::vector<double> pi_row(spec.n_actions);
  std::vector<double> p_row(spec.n_states);
  Vector weights = Vector::Zero(spec.n_states);
  int s = rng.categorical(rho);
  double discount = 1.0;
  int steps_in_episode = 0;
  for (long k = 0; k < n_steps; ++k) {
    weights(s) += discount;
    for (int a = 0; a < spec.n_actions; ++a) pi_row[a] = probs(s, a);
    const int a = rng.categorical(pi_row);
    for (int s2 = 0; s2 < spec.n_states; ++s2) p_row[s2] = spec.transition[a](s, s2);
    s = rng.categorical(p_row);
    discount *= spec.gamma;
    if (++steps_in_episode >= horizon) {
      s = rng.categorical(rho);
      discount = 1.0;
      steps_in_episode = 0;
    }
  }
  return weights / weights.sum();
}

}  // namespace pcrpo
