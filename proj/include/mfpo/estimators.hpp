#pragma once

#include <optional>
#include <vector>

#include "mfpo/policy.hpp"
#include "mfpo/types.hpp"

namespace mfpo {
namespace estimators {

// Gradient estimators follow the minimization convention
// J(theta) = -E[r(tau)]: they return gradients of the negative expected
// return, and every update subtracts alpha * u.
enum class Kind { Reinforce, Gpomdp };

enum class BaselineMode { Zero, RunningMean };

struct EstimatorConfig {
  Kind kind = Kind::Gpomdp;
  BaselineMode baseline_mode = BaselineMode::RunningMean;
  double baseline_decay = 0.9;
  double gamma = 0.99;
  std::optional<double> weight_clip;  // disabled by default

  void validate() const {
    if (gamma <= 0.0 || gamma > 1.0)
      throw DimensionMismatch("gamma must be in (0, 1]");
    if (baseline_decay < 0.0 || baseline_decay >= 1.0)
      throw DimensionMismatch("baseline decay must be in [0, 1)");
    if (weight_clip && *weight_clip <= 0.0)
      throw DimensionMismatch("weight_clip must be positive");
  }
};

// Running-mean baseline state, owned per agent and updated once per step
// from the trajectories of that step (after directions are computed, so the
// baseline never depends on the batch it is applied to).
//
// REINFORCE uses the scalar EMA of discounted trajectory returns. GPOMDP
// uses a per-time-index EMA of rewards, with episodes shorter than the
// index contributing 0 (the logical-padding view); on fixed-reward
// environments this makes the per-step advantage track episode survival.
struct BaselineState {
  double return_ema = 0.0;
  std::vector<double> step_ema;
  bool initialized = false;

  double return_baseline() const { return initialized ? return_ema : 0.0; }
  double step_baseline(std::size_t h) const {
    return initialized && h < step_ema.size() ? step_ema[h] : 0.0;
  }
  void update(const std::vector<Trajectory>& trajs, const EstimatorConfig& cfg);
};

double trajectory_return(const Trajectory& traj, double gamma);

// (b - R(tau)) * sum_h grad log pi(a_h | s_h), R discounted.
ParamVector reinforce_grad(const policy::PolicyArch& arch,
                           const ParamVector& params, const Trajectory& traj,
                           const EstimatorConfig& cfg,
                           const BaselineState* baseline = nullptr);

// -sum_h (sum_{h' <= h} grad log pi_{h'}) * gamma^{h-1} (r_h - b_h).
ParamVector gpomdp_grad(const policy::PolicyArch& arch,
                        const ParamVector& params, const Trajectory& traj,
                        const EstimatorConfig& cfg,
                        const BaselineState* baseline = nullptr);

ParamVector estimator_grad(const policy::PolicyArch& arch,
                           const ParamVector& params, const Trajectory& traj,
                           const EstimatorConfig& cfg,
                           const BaselineState* baseline = nullptr);

// w = prod pi_prev / prod pi_t for a trajectory sampled under params_t;
// computed entirely in log space before one exponentiation.
double importance_weight(const policy::PolicyArch& arch,
                         const ParamVector& params_t,
                         const ParamVector& params_prev,
                         const Trajectory& traj,
                         const EstimatorConfig& cfg);

// Mean of per-trajectory estimator outputs in fixed list order.
ParamVector batch_direction(const policy::PolicyArch& arch,
                            const ParamVector& params,
                            const std::vector<Trajectory>& trajs,
                            const EstimatorConfig& cfg,
                            const BaselineState* baseline = nullptr);

}  // namespace estimators
}  // namespace mfpo
