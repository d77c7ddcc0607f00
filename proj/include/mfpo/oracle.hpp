#pragma once

#include <vector>

#include "mfpo/estimators.hpp"
#include "mfpo/tabular.hpp"

namespace mfpo {
namespace oracle {

inline constexpr std::size_t kEnumerationCap = 1'000'000;

struct WeightedTrajectory {
  Trajectory traj;
  double probability = 0.0;
};

// Exhaustive trajectory enumeration: probability is
// mu(s1) * prod_h T(s_{h+1}|s_h,a_h) * prod_h pi(a_h|s_h), with the final
// transition marginalized out (no estimator depends on s_{H+1}).
// behavior_logps are filled under `params`. Probabilities sum to 1.
std::vector<WeightedTrajectory> enumerate_trajectories(
    const TabularMDP& mdp, const policy::PolicyArch& arch,
    const ParamVector& params);

// J(theta) = -sum_tau p(tau|theta) r(tau), discounted by mdp.gamma.
double exact_J(const TabularMDP& mdp, const policy::PolicyArch& arch,
               const ParamVector& params);

// Exact gradient via the log-gradient trick; ground truth for every
// unbiasedness test.
ParamVector exact_grad_J(const TabularMDP& mdp,
                         const policy::PolicyArch& arch,
                         const ParamVector& params);

// sum_tau p(tau|params_sample) * [w(params_sample, params_eval; tau)] *
// g(params_eval; tau). Equals exact_grad_J(params_eval) when weighted and
// exact_grad_J(params_sample) when unweighted with params_eval ==
// params_sample. Baselines inside g are zero.
ParamVector exact_estimator_mean(const TabularMDP& mdp,
                                 const policy::PolicyArch& arch,
                                 const ParamVector& params_sample,
                                 const ParamVector& params_eval,
                                 const estimators::EstimatorConfig& cfg,
                                 bool weighted);

}  // namespace oracle
}  // namespace mfpo
