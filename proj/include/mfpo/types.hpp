#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>
#include <vector>

namespace mfpo {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Flat policy parameter vector (theta, directions u, etc. all live here).
using ParamVector = Vec;

struct InvalidAction : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NonFiniteOutput : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DimensionMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EnumerationTooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvalidSchedule : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Either a discrete action index or a continuous action vector.
struct Action {
  int index = -1;   // valid iff discrete
  Vec value;        // valid iff continuous
  // For continuous actions sampled from a squashing policy: the exact
  // pre-squash (Gaussian) sample. Densities and gradients under any
  // parameters are computed from this value when present; reconstructing it
  // as atanh(value) loses precision once |pre-squash| exceeds the atanh
  // clip range, which manufactures huge spurious gradients.
  Vec pre_squash;   // empty if not recorded

  bool is_discrete() const { return value.size() == 0; }

  static Action discrete(int i) {
    Action a;
    a.index = i;
    return a;
  }
  static Action continuous(Vec v) {
    Action a;
    a.value = std::move(v);
    return a;
  }
};

// One episode: per-step (state, action, reward) plus the log-probability of
// each action under the policy that generated it.
struct Trajectory {
  std::vector<Vec> states;
  std::vector<Action> actions;
  std::vector<double> rewards;
  std::vector<double> behavior_logps;

  std::size_t length() const { return states.size(); }
  bool empty() const { return states.empty(); }
};

inline void check_finite(const Vec& v, const char* what) {
  if (!v.allFinite()) throw NonFiniteOutput(std::string("non-finite ") + what);
}

}  // namespace mfpo
