#include "pcrpo/cmdp.hpp"

#include <cmath>
#include <sstream>

namespace pcrpo {

namespace {

void append(std::vector<SpecViolation>& out, std::string what, int s = -1,
            int a = -1) {
  out.push_back({std::move(what), s, a});
}

}  // namespace

const Matrix& CmdpSpec::channel_table(Channel ch) const {
  if (ch.is_reward()) return reward;
  if (ch.index < 0 || ch.index >= n_channels()) {
    throw ChannelMismatchError("cost channel index out of range: " +
                               std::to_string(ch.index));
  }
  return costs[ch.index];
}

std::vector<SpecViolation> validate(const CmdpSpec& spec) {
  std::vector<SpecViolation> out;
  if (spec.n_states < 1 || spec.n_actions < 1) {
    append(out, "state and action counts must be at least 1");
    return out;
  }
  if (!(spec.gamma >= 0.0 && spec.gamma < 1.0)) {
    append(out, "gamma must lie in [0, 1)");
  }
  if (static_cast<int>(spec.transition.size()) != spec.n_actions) {
    append(out, "transition must hold one matrix per action");
    return out;
  }
  for (int a = 0; a < spec.n_actions; ++a) {
    const Matrix& p = spec.transition[a];
    if (p.rows() != spec.n_states || p.cols() != spec.n_states) {
      append(out, "transition matrix has wrong shape", -1, a);
      continue;
    }
    for (int s = 0; s < spec.n_states; ++s) {
      if (p.row(s).minCoeff() < -1e-12) {
        append(out, "negative transition probability", s, a);
      }
      if (std::abs(p.row(s).sum() - 1.0) > 1e-9) {
        std::ostringstream msg;
        msg << "transition row sums to " << p.row(s).sum();
        append(out, msg.str(), s, a);
      }
    }
  }
  if (spec.reward.rows() != spec.n_states || spec.reward.cols() != spec.n_actions) {
    append(out, "reward table has wrong shape");
  }
  if (spec.costs.size() != static_cast<std::size_t>(spec.limits.size()) ||
      spec.costs.empty()) {
    append(out, "need one limit per cost channel and at least one channel");
  }
  for (std::size_t i = 0; i < spec.costs.size(); ++i) {
    if (spec.costs[i].rows() != spec.n_states ||
        spec.costs[i].cols() != spec.n_actions) {
      append(out, "cost table " + std::to_string(i) + " has wrong shape");
    }
  }
  if (spec.rho.size() != spec.n_states) {
    append(out, "rho has wrong length");
  } else {
    if (spec.rho.minCoeff() < -1e-12) append(out, "rho has a negative entry");
    if (std::abs(spec.rho.sum() - 1.0) > 1e-9) {
      append(out, "rho sums to " + std::to_string(spec.rho.sum()));
    }
  }
  return out;
}

void require_valid(const CmdpSpec& spec) {
  const auto violations = validate(spec);
  if (!violations.empty()) {
    std::ostringstream msg;
    msg << "invalid CMDP spec:";
    for (const auto& v : violations) {
      msg << " [" << v.what;
      if (v.state >= 0) msg << " at s=" << v.state;
      if (v.action >= 0) msg << " a=" << v.action;
      msg << "]";
    }
    throw InvalidSpecError(msg.str());
  }
}

Matrix policy_transition(const CmdpSpec& spec, const SoftmaxPolicy& policy) {
  Matrix ppi = Matrix::Zero(spec.n_states, spec.n_states);
  const Matrix probs = policy.prob_matrix();
  for (int a = 0; a < spec.n_actions; ++a) {
    ppi += probs.col(a).asDiagonal() * spec.transition[a];
  }
  return ppi;
}

Vector policy_channel_reward(const CmdpSpec& spec, const SoftmaxPolicy& policy,
                             Channel ch) {
  const Matrix& table = spec.channel_table(ch);
  return (policy.prob_matrix().array() * table.array()).rowwise().sum();
}

Vector exact_state_values(const CmdpSpec& spec, const SoftmaxPolicy& policy,
                          Channel ch) {
  const Matrix ppi = policy_transition(spec, policy);
  const Matrix system =
      Matrix::Identity(spec.n_states, spec.n_states) - spec.gamma * ppi;
  Eigen::PartialPivLU<Matrix> lu(system);
  // (I - gamma P) is strictly diagonally dominant in the induced infinity norm
  // for gamma < 1, so this cannot trigger; guarded regardless.
  if (std::abs(lu.determinant()) < 1e-300) {
    throw SingularSystemError("value system is numerically singular");
  }
  return lu.solve(policy_channel_reward(spec, policy, ch));
}

double exact_value(const CmdpSpec& spec, const SoftmaxPolicy& policy,
                   Channel ch) {
  return spec.rho.dot(exact_state_values(spec, policy, ch));
}

QTable exact_q(const CmdpSpec& spec, const SoftmaxPolicy& policy, Channel ch) {
  const Vector v = exact_state_values(spec, policy, ch);
  const Matrix& table = spec.channel_table(ch);
  Matrix q(spec.n_states, spec.n_actions);
  for (int a = 0; a < spec.n_actions; ++a) {
    q.col(a) = table.col(a) + spec.gamma * (spec.transition[a] * v);
  }
  return {q, ch};
}

Vector discounted_occupancy(const CmdpSpec& spec, const SoftmaxPolicy& policy) {
  const Matrix ppi = policy_transition(spec, policy);
  const Matrix system = Matrix::Identity(spec.n_states, spec.n_states) -
                        spec.gamma * ppi.transpose();
  return Eigen::PartialPivLU<Matrix>(system).solve(spec.rho);
}

double value_from_q(const CmdpSpec& spec, const SoftmaxPolicy& policy,
                    const Matrix& q) {
  if (q.rows() != spec.n_states || q.cols() != spec.n_actions) {
    throw DimensionMismatchError("Q table shape does not match the spec");
  }
  const Matrix probs = policy.prob_matrix();
  return spec.rho.dot((probs.array() * q.array()).rowwise().sum().matrix());
}

Trajectory sample_trajectory(const CmdpSpec& spec, const SoftmaxPolicy& policy,
                             int horizon, std::uint64_t seed) {
  if (horizon < 1) throw InvalidSpecError("horizon must be at least 1");
  Rng rng(seed);
  Trajectory traj;
  traj.horizon = horizon;
  traj.steps.reserve(horizon);

  const Matrix probs = policy.prob_matrix();
  std::vector<double> rho(spec.rho.data(), spec.rho.data() + spec.rho.size());
  int s = rng.categorical(rho);
  for (int t = 0; t < horizon; ++t) {
    std::vector<double> pi_row(spec.n_actions);
    for (int a = 0; a < spec.n_actions; ++a) pi_row[a] = probs(s, a);
    const int a = rng.categorical(pi_row);
    std::vector<double> p_row(spec.n_states);
    for (int s2 = 0; s2 < spec.n_states; ++s2) p_row[s2] = spec.transition[a](s, s2);
    const int s2 = rng.categorical(p_row);
    Vector costs(spec.n_channels());
    for (int i = 0; i < spec.n_channels(); ++i) costs(i) = spec.costs[i](s, a);
    traj.steps.push_back({s, a, spec.reward(s, a), costs, s2});
    s = s2;
  }
  return traj;
}

int default_horizon(double gamma, double tol) {
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw InvalidSpecError("gamma must lie in [0, 1)");
  }
  if (gamma == 0.0) return 1;
  int h = 1;
  while (std::pow(gamma, h) / (1.0 - gamma) >= tol) ++h;
  return h;
}

CmdpSpec build_gridworld(int width, int height, const std::vector<Cell>& hazards,
                         Cell goal, double slip, double gamma,
                         double cost_limit, Cell start) {
  if (width < 1 || height < 1) {
    throw BadGeometryError("grid must be at least 1x1");
  }
  auto in_grid = [&](Cell c) {
    return c.x >= 0 && c.x < width && c.y >= 0 && c.y < height;
  };
  if (!in_grid(goal) || !in_grid(start)) {
    throw BadGeometryError("goal and start must lie inside the grid");
  }
  for (const Cell& h : hazards) {
    if (!in_grid(h)) throw BadGeometryError("hazard lies outside the grid");
    if (h == goal) throw BadGeometryError("goal cell cannot be a hazard");
  }
  if (!(slip >= 0.0 && slip < 1.0)) {
    throw BadGeometryError("slip must lie in [0, 1)");
  }
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw BadGeometryError("gamma must lie in [0, 1)");
  }

  const int n_states = width * height;
  const int n_actions = 4;
  auto idx = [&](Cell c) { return c.y * width + c.x; };

  CmdpSpec spec;
  spec.n_states = n_states;
  spec.n_actions = n_actions;
  spec.gamma = gamma;
  spec.transition.assign(n_actions, Matrix::Zero(n_states, n_states));
  spec.reward = Matrix::Zero(n_states, n_actions);
  Matrix cost = Matrix::Zero(n_states, n_actions);

  // action deltas: up, down, left, right
  const int dx[4] = {0, 0, -1, 1};
  const int dy[4] = {1, -1, 0, 0};
  auto move = [&](Cell from, int a) {
    Cell to{from.x + dx[a], from.y + dy[a]};
    return in_grid(to) ? to : from;
  };
  // perpendicular slip directions per action
  const int perp[4][2] = {{2, 3}, {2, 3}, {0, 1}, {0, 1}};

  const int goal_s = idx(goal);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const Cell c{x, y};
      const int s = idx(c);
      if (s == goal_s) {
        for (int a = 0; a < n_actions; ++a) {
          spec.transition[a](s, s) = 1.0;
          spec.reward(s, a) = 1.0;
        }
        continue;
      }
      for (int a = 0; a < n_actions; ++a) {
        spec.transition[a](s, idx(move(c, a))) += 1.0 - slip;
        spec.transition[a](s, idx(move(c, perp[a][0]))) += slip / 2.0;
        spec.transition[a](s, idx(move(c, perp[a][1]))) += slip / 2.0;
      }
    }
  }
  for (const Cell& h : hazards) {
    cost.row(idx(h)).setOnes();
  }
  spec.costs = {cost};
  spec.limits = Vector::Constant(1, cost_limit);
  spec.rho = Vector::Zero(n_states);
  spec.rho(idx(start)) = 1.0;
  require_valid(spec);
  return spec;
}

double pointmass_thrust(int action_index, int action_levels) {
  if (action_levels < 2) throw BadGeometryError("need at least 2 thrust levels");
  return -1.0 + 2.0 * action_index / (action_levels - 1);
}

CmdpSpec build_pointmass_velocity(int n_positions, int n_velocities,
                                  int action_levels, double alpha_r,
                                  double alpha_c, double gamma,
                                  double cost_limit) {
  if (n_positions < 2 || n_velocities < 2 || action_levels < 2) {
    throw BadGeometryError("pointmass lattice needs at least 2 levels per axis");
  }
  if (alpha_r < 0.0 || alpha_c < 0.0) {
    throw BadGeometryError("reward/cost weights must be nonnegative");
  }
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw BadGeometryError("gamma must lie in [0, 1)");
  }

  const int n_states = n_positions * n_velocities;
  CmdpSpec spec;
  spec.n_states = n_states;
  spec.n_actions = action_levels;
  spec.gamma = gamma;
  spec.transition.assign(action_levels, Matrix::Zero(n_states, n_states));
  spec.reward = Matrix::Zero(n_states, action_levels);
  Matrix cost = Matrix::Zero(n_states, action_levels);

  auto idx = [&](int pos, int vel) { return vel * n_positions + pos; };
  for (int vel = 0; vel < n_velocities; ++vel) {
    const double vel_value = static_cast<double>(vel) / (n_velocities - 1);
    for (int pos = 0; pos < n_positions; ++pos) {
      const int s = idx(pos, vel);
      for (int j = 0; j < action_levels; ++j) {
        const double u = pointmass_thrust(j, action_levels);
        int vel2 = vel + static_cast<int>(std::lround(u));
        vel2 = std::max(0, std::min(n_velocities - 1, vel2));
        const int pos2 = (pos + vel2) % n_positions;  // circular track
        spec.transition[j](s, idx(pos2, vel2)) = 1.0;
        spec.reward(s, j) = alpha_r * vel_value;
        cost(s, j) = alpha_c * u * u;
      }
    }
  }
  spec.costs = {cost};
  spec.limits = Vector::Constant(1, cost_limit);
  spec.rho = Vector::Zero(n_states);
  spec.rho(idx(0, 0)) = 1.0;
  require_valid(spec);
  return spec;
}

}  // namespace pcrpo
