#include "mfpo/estimators.hpp"

#include <cmath>

namespace mfpo {
namespace estimators {

void BaselineState::update(const std::vector<Trajectory>& trajs,
                           const EstimatorConfig& cfg) {
  if (cfg.baseline_mode == BaselineMode::Zero || trajs.empty()) return;
  const double decay = cfg.baseline_decay;
  std::size_t max_len = step_ema.size();
  for (const auto& t : trajs) max_len = std::max(max_len, t.length());
  step_ema.resize(max_len, 0.0);

  for (const auto& t : trajs) {
    const double ret = trajectory_return(t, cfg.gamma);
    if (!initialized) {
      return_ema = ret;
      for (std::size_t h = 0; h < max_len; ++h)
        step_ema[h] = h < t.length() ? t.rewards[h] : 0.0;
      initialized = true;
      continue;
    }
    return_ema = decay * return_ema + (1.0 - decay) * ret;
    for (std::size_t h = 0; h < max_len; ++h) {
      const double r = h < t.length() ? t.rewards[h] : 0.0;
      step_ema[h] = decay * step_ema[h] + (1.0 - decay) * r;
    }
  }
}

double trajectory_return(const Trajectory& traj, double gamma) {
  double ret = 0.0, g = 1.0;
  for (double r : traj.rewards) {
    ret += g * r;
    g *= gamma;
  }
  return ret;
}

ParamVector reinforce_grad(const policy::PolicyArch& arch,
                           const ParamVector& params, const Trajectory& traj,
                           const EstimatorConfig& cfg,
                           const BaselineState* baseline) {
  cfg.validate();
  if (traj.empty()) throw DimensionMismatch("empty trajectory");
  const double b = (baseline && cfg.baseline_mode == BaselineMode::RunningMean)
                       ? baseline->return_baseline()
                       : 0.0;
  const double coeff = b - trajectory_return(traj, cfg.gamma);
  ParamVector score = ParamVector::Zero(policy::param_count(arch));
  for (std::size_t h = 0; h < traj.length(); ++h)
    score += policy::grad_log_prob(arch, params, traj.states[h],
                                   traj.actions[h]);
  ParamVector g = coeff * score;
  check_finite(g, "reinforce gradient");
  return g;
}

ParamVector gpomdp_grad(const policy::PolicyArch& arch,
                        const ParamVector& params, const Trajectory& traj,
                        const EstimatorConfig& cfg,
                        const BaselineState* baseline) {
  cfg.validate();
  if (traj.empty()) throw DimensionMismatch("empty trajectory");
  const std::size_t len = traj.length();
  const bool use_b =
      baseline && cfg.baseline_mode == BaselineMode::RunningMean;

  // Equivalent suffix-sum form: each step's score is weighted by
  // sum_{h >= h'} gamma^{h-1} (r_h - b_h). In the absorbing-state view an
  // episode that ends before the baseline horizon keeps collecting reward 0,
  // so the suffix is seeded with the post-termination (0 - b_h) tail;
  // without it a per-step baseline is biased under early termination.
  std::vector<double> coeff(len);
  double g = 1.0;
  for (std::size_t h = 0; h < len; ++h) {
    const double b_h = use_b ? baseline->step_baseline(h) : 0.0;
    coeff[h] = g * (traj.rewards[h] - b_h);
    g *= cfg.gamma;
  }
  double suffix = 0.0;
  if (use_b) {
    double gh = g;
    for (std::size_t h = len; h < baseline->step_ema.size(); ++h) {
      suffix -= gh * baseline->step_baseline(h);
      gh *= cfg.gamma;
    }
  }
  for (std::size_t h = len; h-- > 0;) {
    suffix += coeff[h];
    coeff[h] = suffix;
  }

  ParamVector grad = ParamVector::Zero(policy::param_count(arch));
  for (std::size_t h = 0; h < len; ++h)
    grad -= coeff[h] * policy::grad_log_prob(arch, params, traj.states[h],
                                             traj.actions[h]);
  check_finite(grad, "gpomdp gradient");
  return grad;
}

ParamVector estimator_grad(const policy::PolicyArch& arch,
                           const ParamVector& params, const Trajectory& traj,
                           const EstimatorConfig& cfg,
                           const BaselineState* baseline) {
  return cfg.kind == Kind::Reinforce
             ? reinforce_grad(arch, params, traj, cfg, baseline)
             : gpomdp_grad(arch, params, traj, cfg, baseline);
}

double importance_weight(const policy::PolicyArch& arch,
                         const ParamVector& params_t,
                         const ParamVector& params_prev,
                         const Trajectory& traj,
                         const EstimatorConfig& cfg) {
  const double log_ratio = policy::traj_log_prob(arch, params_prev, traj) -
                           policy::traj_log_prob(arch, params_t, traj);
  if (!std::isfinite(log_ratio))
    throw NonFiniteOutput("importance weight log-ratio");
  double w = std::exp(log_ratio);
  if (cfg.weight_clip) w = std::min(w, *cfg.weight_clip);
  return w;
}

ParamVector batch_direction(const policy::PolicyArch& arch,
                            const ParamVector& params,
                            const std::vector<Trajectory>& trajs,
                            const EstimatorConfig& cfg,
                            const BaselineState* baseline) {
  if (trajs.empty()) throw DimensionMismatch("empty trajectory batch");
  ParamVector sum = ParamVector::Zero(policy::param_count(arch));
  for (const auto& t : trajs)
    sum += estimator_grad(arch, params, t, cfg, baseline);
  return sum / static_cast<double>(trajs.size());
}

}  // namespace estimators
}  // namespace mfpo
