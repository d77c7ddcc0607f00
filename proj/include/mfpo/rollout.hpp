#pragma once

#include "mfpo/env.hpp"
#include "mfpo/policy.hpp"

namespace mfpo {

// Sample one episode of at most `horizon` steps under the given policy
// parameters, recording per-step behavior log-probabilities.
inline Trajectory rollout(Environment& env, const policy::PolicyArch& arch,
                          const ParamVector& params, int horizon,
                          RngStream& rng) {
  Trajectory traj;
  if (horizon <= 0) return traj;
  Vec state = env.reset(rng);
  for (int h = 0; h < horizon; ++h) {
    check_finite(state, "environment state");
    auto [action, logp] = policy::sample_action(arch, params, state, rng);
    StepResult r = env.step(state, action, rng);
    traj.states.push_back(state);
    traj.actions.push_back(std::move(action));
    traj.rewards.push_back(r.reward);
    traj.behavior_logps.push_back(logp);
    if (r.terminal) break;
    state = std::move(r.next_state);
  }
  return traj;
}

// Undiscounted episode return; the benchmark score reported in metrics.
inline double undiscounted_return(const Trajectory& traj) {
  double sum = 0.0;
  for (double r : traj.rewards) sum += r;
  return sum;
}

}  // namespace mfpo
