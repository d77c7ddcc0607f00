#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "mfpo/env.hpp"
#include "mfpo/estimators.hpp"
#include "mfpo/metrics.hpp"
#include "mfpo/rollout.hpp"
#include "mfpo/schedule.hpp"
#include "mfpo/tabular.hpp"

namespace mfpo {
namespace algorithm {

struct AgentState {
  ParamVector theta;        // theta_i^{(t)}
  ParamVector theta_prev;   // theta_i^{(t-1)}
  ParamVector direction;    // u~_i^{(t-1)} entering step t
  estimators::BaselineState baseline;
  int step = 0;
};

struct HyperParams {
  int N = 1;        // agents
  int K = 1;        // local steps per round
  int D = 1;        // trajectories per step
  int D_tilde = 0;  // initialization trajectories; 0 means D * K
  int T = 1;        // total steps, multiple of K
  Schedule schedule = PracticalSchedule{};
  estimators::EstimatorConfig estimator;

  int d_tilde() const { return D_tilde > 0 ? D_tilde : D * K; }
  void validate() const {
    if (N < 1 || K < 1 || D < 1 || T < 1)
      throw DimensionMismatch("hyperparameters must be positive");
    if (T % K != 0) throw DimensionMismatch("T must be a multiple of K");
    estimator.validate();
    std::visit([](const auto& s) { s.validate(); }, schedule);
  }
};

using EnvFactory = std::function<std::unique_ptr<Environment>()>;

struct TrainOptions {
  int eval_episodes = 20;
  std::optional<double> stop_at_return;  // end the run once reached
  const TabularMDP* oracle_mdp = nullptr;  // enables grad_norm_sq metric
};

struct TrainResult {
  ParamVector theta_bar;
  MetricsTable metrics;
  std::int64_t env_interactions = 0;
};

// All agents start at a shared theta_bar = init_params(master_seed); each
// samples D~ trajectories with its own stream and sets its initial
// direction to the batch-mean gradient estimate.
std::vector<AgentState> init_agents(const policy::PolicyArch& arch,
                                    const EnvFactory& env_factory,
                                    const HyperParams& hp,
                                    std::uint64_t master_seed,
                                    std::int64_t* env_interactions);

// Momentum local direction:
//   nu * (u~^{(t-1)} - (1/D) sum_j w_j g(theta^{(t-1)}; tau_j))
//   + (1/D) sum_j g(theta^{(t)}; tau_j).
ParamVector local_direction(const policy::PolicyArch& arch,
                            const AgentState& agent,
                            const std::vector<Trajectory>& trajs, double nu,
                            const estimators::EstimatorConfig& cfg);

// theta <- theta - alpha * direction (theta_prev keeps the old theta).
void local_update(AgentState& agent, const ParamVector& direction,
                  double alpha);

// Fixed agent-index-order means of directions and parameters.
std::pair<ParamVector, ParamVector> global_aggregate(
    const std::vector<AgentState>& agents);

inline ParamVector server_adjust(const ParamVector& theta_bar,
                                 const ParamVector& u_bar, double alpha) {
  return theta_bar - alpha * u_bar;
}

// Every agent: theta_prev <- its pre-sync theta, theta <- theta_bar_next,
// direction <- u_bar.
void synchronize(std::vector<AgentState>& agents,
                 const ParamVector& theta_bar_next, const ParamVector& u_bar);

// Mean/std of undiscounted returns over `episodes` stochastic rollouts.
std::pair<double, double> evaluate_policy(Environment& env,
                                          const policy::PolicyArch& arch,
                                          const ParamVector& params,
                                          int episodes,
                                          std::uint64_t master_seed,
                                          int round);

TrainResult run_training(const HyperParams& hp,
                         const policy::PolicyArch& arch,
                         const EnvFactory& env_factory,
                         std::uint64_t master_seed,
                         const TrainOptions& options = {});

}  // namespace algorithm
}  // namespace mfpo
