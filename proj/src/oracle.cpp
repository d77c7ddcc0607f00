#include "mfpo/oracle.hpp"

#include <cmath>

namespace mfpo {
namespace oracle {

namespace {

struct Path {
  std::vector<int> states;
  std::vector<int> actions;
  double env_prob = 0.0;  // mu and transition factors only
};

void extend(const TabularMDP& mdp, Path& path, double env_prob, int depth,
            std::vector<Path>& out) {
  if (depth == mdp.horizon) {
    Path p = path;
    p.env_prob = env_prob;
    out.push_back(std::move(p));
    return;
  }
  const int s = path.states.back();
  for (int a = 0; a < mdp.n_actions; ++a) {
    path.actions.push_back(a);
    if (depth + 1 == mdp.horizon) {
      // Final transition marginalizes to 1; do not branch on it.
      extend(mdp, path, env_prob, depth + 1, out);
    } else {
      for (int sp = 0; sp < mdp.n_states; ++sp) {
        const double t = mdp.transition[a](s, sp);
        if (t == 0.0) continue;
        path.states.push_back(sp);
        extend(mdp, path, env_prob * t, depth + 1, out);
        path.states.pop_back();
        if (out.size() > kEnumerationCap)
          throw EnumerationTooLarge("trajectory enumeration exceeds cap");
      }
    }
    path.actions.pop_back();
  }
}

std::vector<Path> enumerate_paths(const TabularMDP& mdp) {
  mdp.validate();
  // Upper bound before doing any work.
  double bound = 1.0;
  for (int h = 0; h < mdp.horizon; ++h) bound *= mdp.n_actions;
  for (int h = 0; h + 1 < mdp.horizon; ++h) bound *= mdp.n_states;
  if (bound > static_cast<double>(kEnumerationCap))
    throw EnumerationTooLarge("trajectory enumeration exceeds cap");

  std::vector<Path> out;
  Path path;
  for (int s0 = 0; s0 < mdp.n_states; ++s0) {
    if (mdp.mu[s0] == 0.0) continue;
    path.states = {s0};
    path.actions.clear();
    extend(mdp, path, mdp.mu[s0], 0, out);
  }
  return out;
}

Trajectory to_trajectory(const TabularMDP& mdp, const Path& p) {
  Trajectory t;
  for (int h = 0; h < mdp.horizon; ++h) {
    t.states.push_back(one_hot(p.states[h], mdp.n_states));
    t.actions.push_back(Action::discrete(p.actions[h]));
    t.rewards.push_back(mdp.reward(p.states[h], p.actions[h]));
    t.behavior_logps.push_back(0.0);  // filled by the caller
  }
  return t;
}

}  // namespace

std::vector<WeightedTrajectory> enumerate_trajectories(
    const TabularMDP& mdp, const policy::PolicyArch& arch,
    const ParamVector& params) {
  std::vector<WeightedTrajectory> out;
  for (const auto& path : enumerate_paths(mdp)) {
    WeightedTrajectory wt;
    wt.traj = to_trajectory(mdp, path);
    double log_pi = 0.0;
    for (int h = 0; h < mdp.horizon; ++h) {
      const double lp = policy::log_prob(arch, params, wt.traj.states[h],
                                         wt.traj.actions[h]);
      wt.traj.behavior_logps[h] = lp;
      log_pi += lp;
    }
    wt.probability = path.env_prob * std::exp(log_pi);
    out.push_back(std::move(wt));
  }
  return out;
}

double exact_J(const TabularMDP& mdp, const policy::PolicyArch& arch,
               const ParamVector& params) {
  double j = 0.0;
  for (const auto& wt : enumerate_trajectories(mdp, arch, params))
    j -= wt.probability * estimators::trajectory_return(wt.traj, mdp.gamma);
  return j;
}

ParamVector exact_grad_J(const TabularMDP& mdp,
                         const policy::PolicyArch& arch,
                         const ParamVector& params) {
  ParamVector g = ParamVector::Zero(policy::param_count(arch));
  for (const auto& wt : enumerate_trajectories(mdp, arch, params)) {
    ParamVector score = ParamVector::Zero(g.size());
    for (std::size_t h = 0; h < wt.traj.length(); ++h)
      score += policy::grad_log_prob(arch, params, wt.traj.states[h],
                                     wt.traj.actions[h]);
    g -= wt.probability *
         estimators::trajectory_return(wt.traj, mdp.gamma) * score;
  }
  return g;
}

ParamVector exact_estimator_mean(const TabularMDP& mdp,
                                 const policy::PolicyArch& arch,
                                 const ParamVector& params_sample,
                                 const ParamVector& params_eval,
                                 const estimators::EstimatorConfig& cfg,
                                 bool weighted) {
  ParamVector mean = ParamVector::Zero(policy::param_count(arch));
  for (const auto& wt : enumerate_trajectories(mdp, arch, params_sample)) {
    double w = 1.0;
    if (weighted)
      w = estimators::importance_weight(arch, params_sample, params_eval,
                                        wt.traj, cfg);
    mean += wt.probability * w *
            estimators::estimator_grad(arch, params_eval, wt.traj, cfg);
  }
  return mean;
}

}  // namespace oracle
}  // namespace mfpo
