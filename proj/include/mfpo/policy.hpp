#pragma once

#include <utility>

#include "mfpo/rng.hpp"
#include "mfpo/types.hpp"

namespace mfpo {
namespace policy {

// Two-layer MLP trunk (ReLU) with either a categorical head over n actions
// or a tanh-squashed diagonal Gaussian head with a state-independent
// learned log-std.
//
// Flat parameter layout (row-major matrices):
//   W1 (hidden x input), b1 (hidden), W2 (out x hidden), b2 (out),
//   then log_std (dim) for the TanhGaussian head.
struct PolicyArch {
  enum HeadKind { Categorical, TanhGaussian };
  int input_dim = 0;
  int hidden_units = 0;
  HeadKind head = Categorical;
  int head_dim = 0;  // n actions or action dimension

  int out_dim() const { return head_dim; }

  static PolicyArch categorical(int input_dim, int hidden, int n_actions) {
    return {input_dim, hidden, Categorical, n_actions};
  }
  static PolicyArch tanh_gaussian(int input_dim, int hidden, int action_dim) {
    return {input_dim, hidden, TanhGaussian, action_dim};
  }
};

// Log-std clamp range for the Gaussian head.
inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 2.0;

int param_count(const PolicyArch& arch);

// Fan-in-scaled centered uniform initialization; log-std starts at -0.5.
ParamVector init_params(const PolicyArch& arch, RngStream& rng);

std::pair<Action, double> sample_action(const PolicyArch& arch,
                                        const ParamVector& params,
                                        const Vec& state, RngStream& rng);

double log_prob(const PolicyArch& arch, const ParamVector& params,
                const Vec& state, const Action& action);

// Exact reverse-mode gradient of log_prob with respect to the flat params.
ParamVector grad_log_prob(const PolicyArch& arch, const ParamVector& params,
                          const Vec& state, const Action& action);

// Sum of per-step log-probabilities over the trajectory's actual length.
double traj_log_prob(const PolicyArch& arch, const ParamVector& params,
                     const Trajectory& traj);

}  // namespace policy
}  // namespace mfpo
