#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pcrpo/policy.hpp"
#include "pcrpo/rng.hpp"
#include "pcrpo/types.hpp"

namespace pcrpo {

// Finite constrained MDP. transition[a] is the (s, s') matrix for action a;
// reward and each cost channel are (s, a) tables. Immutable by convention
// after construction, so instances are freely shareable across threads.
struct CmdpSpec {
  int n_states = 0;
  int n_actions = 0;
  std::vector<Matrix> transition;  // [a](s, s')
  Matrix reward;                   // (s, a)
  std::vector<Matrix> costs;       // per channel, (s, a)
  Vector limits;                   // one per cost channel
  double gamma = 0.9;
  Vector rho;                      // initial state distribution

  int n_channels() const { return static_cast<int>(costs.size()); }
  const Matrix& channel_table(Channel ch) const;
};

struct SpecViolation {
  std::string what;
  int state = -1;
  int action = -1;
};

// Checks transition rows and rho for normalization/nonnegativity, table
// shapes, channel/limit counts, and gamma range. Returns every violation.
std::vector<SpecViolation> validate(const CmdpSpec& spec);
void require_valid(const CmdpSpec& spec);  // throws InvalidSpecError

struct TrajectoryStep {
  int state;
  int action;
  double reward;
  Vector costs;
  int next_state;
};

struct Trajectory {
  std::vector<TrajectoryStep> steps;
  int horizon = 0;
};

// State-transition matrix and per-state reward under a fixed policy.
Matrix policy_transition(const CmdpSpec& spec, const SoftmaxPolicy& policy);
Vector policy_channel_reward(const CmdpSpec& spec, const SoftmaxPolicy& policy,
                             Channel ch);

// V^pi(rho) for the selected channel by direct linear solve of
// (I - gamma P_pi) V = R_pi. No sampling involved.
double exact_value(const CmdpSpec& spec, const SoftmaxPolicy& policy,
                   Channel ch);
Vector exact_state_values(const CmdpSpec& spec, const SoftmaxPolicy& policy,
                          Channel ch);

// Q(s,a) = R(s,a) + gamma * sum_s' P(s'|s,a) V(s').
QTable exact_q(const CmdpSpec& spec, const SoftmaxPolicy& policy, Channel ch);

// Unnormalized discounted state occupancy d(s) = sum_t gamma^t Pr(s_t = s);
// sums to 1/(1 - gamma).
Vector discounted_occupancy(const CmdpSpec& spec, const SoftmaxPolicy& policy);

// sum_s rho(s) sum_a pi(a|s) Q(s,a) for an arbitrary Q table.
double value_from_q(const CmdpSpec& spec, const SoftmaxPolicy& policy,
                    const Matrix& q);

// Seed-deterministic rollout of `horizon` steps from rho under the policy.
Trajectory sample_trajectory(const CmdpSpec& spec, const SoftmaxPolicy& policy,
                             int horizon, std::uint64_t seed);

// Smallest horizon h with gamma^h / (1 - gamma) < tol; default tolerance
// bounds the truncation error of finite-horizon sampling at 1e-3.
int default_horizon(double gamma, double tol = 1e-3);

struct Cell {
  int x = 0;
  int y = 0;
  bool operator==(const Cell& o) const { return x == o.x && y == o.y; }
};

// Hazard gridworld: reward 1 per step spent at the absorbing goal, cost 1 per
// step spent on a hazard cell; single cost channel with the given limit.
// Actions up/down/left/right; off-grid moves stay in place; with slip > 0 the
// move goes perpendicular (either side with probability slip/2).
CmdpSpec build_gridworld(int width, int height, const std::vector<Cell>& hazards,
                         Cell goal, double slip, double gamma,
                         double cost_limit, Cell start = {0, 0});

// Point-mass on a circular track: velocity lattice with thrust actions,
// reward alpha_r * velocity, cost alpha_c * thrust^2; single cost channel.
CmdpSpec build_pointmass_velocity(int n_positions, int n_velocities,
                                  int action_levels, double alpha_r,
                                  double alpha_c, double gamma,
                                  double cost_limit);

// Thrust value of action index j in [-1, 1], exposed for tests.
double pointmass_thrust(int action_index, int action_levels);

}  // namespace pcrpo
