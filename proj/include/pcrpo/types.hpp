#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace pcrpo {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Gradients with norm below this are treated as zero.
constexpr double kZeroNormEps = 1e-12;

struct ZeroGradientError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct StepTooLargeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DimensionMismatchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ChannelMismatchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SingularSystemError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct BadGeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvalidSpecError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EvaluationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Value channel selector: the reward function or one of the cost functions.
struct Channel {
  enum class Kind { Reward, Cost };
  Kind kind = Kind::Reward;
  int index = 0;  // cost channel index; ignored for reward

  static Channel reward() { return {Kind::Reward, 0}; }
  static Channel cost(int i) { return {Kind::Cost, i}; }
  bool is_reward() const { return kind == Kind::Reward; }
  bool operator==(const Channel& o) const {
    return kind == o.kind && (kind == Kind::Reward || index == o.index);
  }
  std::string name() const {
    return is_reward() ? "reward" : "cost_" + std::to_string(index);
  }
};

// Per-(state, action) action-value table for one channel.
struct QTable {
  Matrix table;  // (n_states, n_actions)
  Channel channel;
};

}  // namespace pcrpo
