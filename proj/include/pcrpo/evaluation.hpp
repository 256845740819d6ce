#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "pcrpo/cmdp.hpp"
#include "pcrpo/types.hpp"

namespace pcrpo {

// Default initial learning rate of the TD schedule l_k = lr0 / (1 + k / tau)
// with tau = k_td / 10. Calibrated so that 2e5 iterations bring the max-norm
// Q error of small random MDPs below 0.05.
constexpr double kDefaultTdLr0 = 0.05;

// TD(0) action-value estimate for one channel plus the estimation metadata.
struct QEstimate {
  QTable q;
  long k_td = 0;
  double lr0 = kDefaultTdLr0;
  double tau = 0.0;
};

// On-policy TD(0): k_td updates Q(s,a) += l_k [r_i + gamma Q(s',a') - Q(s,a)]
// along a persistent behavior trajectory restarted from rho every `horizon`
// steps (horizon < 0 uses the spec default). Q starts at zero; deterministic
// per seed. Driving k_td large is the variance-reduction knob: the estimator
// noise shrinks as the learning rate anneals.
QEstimate td_q_estimate(const CmdpSpec& spec, const SoftmaxPolicy& policy,
                        Channel ch, long k_td, double lr0, std::uint64_t seed,
                        int horizon = -1);

// One synchronous expected update Q <- Q + lr (T_pi Q - Q) over all (s, a).
// Test-only mode: with lr = 1 this is exact fixed-point iteration, which
// converges to the true Q at geometric rate gamma.
Matrix synchronous_q_sweep(const CmdpSpec& spec, const SoftmaxPolicy& policy,
                           Channel ch, const Matrix& q, double lr);

// Scalar value estimates consumed by the trainer's mode selection:
// V(rho) = sum_s rho(s) sum_a pi(a|s) Qhat(s,a) per channel. The estimates
// must arrive as [reward, cost_0, ..., cost_{n-1}].
std::vector<double> estimate_values(const CmdpSpec& spec,
                                    const SoftmaxPolicy& policy,
                                    const std::vector<QEstimate>& qhats);

// Debug dump, one row per (s, a): "s,a,qhat".
void dump_q_csv(const QEstimate& estimate, std::ostream& out);

}  // namespace pcrpo
