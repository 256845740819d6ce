#pragma once

#include <cstdint>

#include "pcrpo/cmdp.hpp"

namespace pcrpo {

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  long n_trajectories = 0;
};

// Monte Carlo estimate of V^pi(rho) for one channel from n independent
// truncated rollouts (horizon < 0 uses the spec default). Trajectory i draws
// from its own stream derived from (seed, i), so the estimate is independent
// of evaluation order.
//
// mc_value_serial is the plain-loop reference; mc_value runs the same
// per-trajectory computation under OpenMP and reduces the per-slot returns
// sequentially, so both produce bit-identical results.
McEstimate mc_value_serial(const CmdpSpec& spec, const SoftmaxPolicy& policy,
                           Channel ch, long n_trajectories, int horizon,
                           std::uint64_t seed);
McEstimate mc_value(const CmdpSpec& spec, const SoftmaxPolicy& policy,
                    Channel ch, long n_trajectories, int horizon,
                    std::uint64_t seed);

// Discount-weighted state-visit frequencies (normalized to sum 1) accumulated
// over n_steps of restarted rollouts; converges to the normalized discounted
// occupancy. Serial only; used as a sampling-side oracle in tests.
Vector empirical_occupancy(const CmdpSpec& spec, const SoftmaxPolicy& policy,
                           long n_steps, int horizon, std::uint64_t seed);

}  // namespace pcrpo
