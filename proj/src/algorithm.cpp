#include "mfpo/algorithm.hpp"

#include <chrono>
#include <cmath>

#include "mfpo/oracle.hpp"

namespace mfpo {
namespace algorithm {

namespace {

std::vector<Trajectory> sample_batch(Environment& env,
                                     const policy::PolicyArch& arch,
                                     const ParamVector& params, int count,
                                     std::uint64_t master_seed, int agent,
                                     int step,
                                     std::int64_t* env_interactions) {
  std::vector<Trajectory> trajs;
  trajs.reserve(count);
  for (int j = 0; j < count; ++j) {
    RngStream rng(RngStream::derive(
        master_seed, {kAgentTag, static_cast<std::uint64_t>(agent),
                      static_cast<std::uint64_t>(step),
                      static_cast<std::uint64_t>(j)}));
    trajs.push_back(
        rollout(env, arch, params, env.spec().horizon, rng));
    if (env_interactions)
      *env_interactions += static_cast<std::int64_t>(trajs.back().length());
  }
  return trajs;
}

}  // namespace

std::vector<AgentState> init_agents(const policy::PolicyArch& arch,
                                    const EnvFactory& env_factory,
                                    const HyperParams& hp,
                                    std::uint64_t master_seed,
                                    std::int64_t* env_interactions) {
  hp.validate();
  RngStream init_rng(RngStream::derive(master_seed, {kInitTag}));
  const ParamVector theta_bar = policy::init_params(arch, init_rng);

  std::vector<AgentState> agents(hp.N);
  for (int i = 0; i < hp.N; ++i) {
    auto env = env_factory();
    AgentState& a = agents[i];
    a.theta = theta_bar;
    a.theta_prev = theta_bar;
    auto trajs = sample_batch(*env, arch, a.theta, hp.d_tilde(), master_seed,
                              i + 1, 0, env_interactions);
    // Warm the running baseline on the initialization batch before forming
    // the first direction: with a cold (zero) baseline every coefficient is
    // a full discounted return, which inflates the initial momentum by one
    // to two orders of magnitude (catastrophically so when returns are far
    // from zero, as on Pendulum).
    a.baseline.update(trajs, hp.estimator);
    a.direction = estimators::batch_direction(arch, a.theta, trajs,
                                              hp.estimator, &a.baseline);
  }
  return agents;
}

ParamVector local_direction(const policy::PolicyArch& arch,
                            const AgentState& agent,
                            const std::vector<Trajectory>& trajs, double nu,
                            const estimators::EstimatorConfig& cfg) {
  const ParamVector current = estimators::batch_direction(
      arch, agent.theta, trajs, cfg, &agent.baseline);
  if (nu == 0.0) return current;  // keeps the FedPG reduction bitwise exact

  ParamVector corrected = ParamVector::Zero(current.size());
  for (const auto& traj : trajs) {
    const double w = estimators::importance_weight(arch, agent.theta,
                                                   agent.theta_prev, traj, cfg);
    corrected += w * estimators::estimator_grad(arch, agent.theta_prev, traj,
                                                cfg, &agent.baseline);
  }
  corrected /= static_cast<double>(trajs.size());

  ParamVector dir = nu * (agent.direction - corrected) + current;
  check_finite(dir, "local direction");
  return dir;
}

void local_update(AgentState& agent, const ParamVector& direction,
                  double alpha) {
  agent.theta_prev = agent.theta;
  agent.theta -= alpha * direction;
  agent.direction = direction;
  ++agent.step;
}

std::pair<ParamVector, ParamVector> global_aggregate(
    const std::vector<AgentState>& agents) {
  if (agents.empty()) throw DimensionMismatch("no agents");
  const auto d = agents.front().theta.size();
  ParamVector u_bar = ParamVector::Zero(d);
  ParamVector theta_bar = ParamVector::Zero(d);
  for (const auto& a : agents) {
    if (a.theta.size() != d || a.direction.size() != d)
      throw DimensionMismatch("agent dimension mismatch");
    u_bar += a.direction;
    theta_bar += a.theta;
  }
  const double n = static_cast<double>(agents.size());
  return {u_bar / n, theta_bar / n};
}

void synchronize(std::vector<AgentState>& agents,
                 const ParamVector& theta_bar_next, const ParamVector& u_bar) {
  for (auto& a : agents) {
    a.theta_prev = a.theta;
    a.theta = theta_bar_next;
    a.direction = u_bar;
  }
}

std::pair<double, double> evaluate_policy(Environment& env,
                                          const policy::PolicyArch& arch,
                                          const ParamVector& params,
                                          int episodes,
                                          std::uint64_t master_seed,
                                          int round) {
  double sum = 0.0, sum_sq = 0.0;
  for (int e = 0; e < episodes; ++e) {
    RngStream rng(RngStream::derive(
        master_seed, {kEvalTag, static_cast<std::uint64_t>(round),
                      static_cast<std::uint64_t>(e)}));
    const Trajectory traj =
        rollout(env, arch, params, env.spec().horizon, rng);
    const double ret = undiscounted_return(traj);
    sum += ret;
    sum_sq += ret * ret;
  }
  const double mean = sum / episodes;
  const double var = std::max(0.0, sum_sq / episodes - mean * mean);
  return {mean, std::sqrt(var)};
}

TrainResult run_training(const HyperParams& hp,
                         const policy::PolicyArch& arch,
                         const EnvFactory& env_factory,
                         std::uint64_t master_seed,
                         const TrainOptions& options) {
  hp.validate();
  const auto start = std::chrono::steady_clock::now();

  TrainResult result;
  std::vector<AgentState> agents =
      init_agents(arch, env_factory, hp, master_seed, &result.env_interactions);

  std::vector<std::unique_ptr<Environment>> envs;
  for (int i = 0; i < hp.N; ++i) envs.push_back(env_factory());
  auto eval_env = env_factory();

  double alpha_prev = stepsize(0, hp.schedule);
  int round = 0;

  for (int t = 1; t <= hp.T; ++t) {
    const double alpha = stepsize(t, hp.schedule);
    const double nu = momentum(t, hp.schedule, alpha_prev);
    alpha_prev = alpha;

    std::vector<ParamVector> directions(hp.N);
    for (int i = 0; i < hp.N; ++i) {
      auto trajs =
          sample_batch(*envs[i], arch, agents[i].theta, hp.D, master_seed,
                       i + 1, t, &result.env_interactions);
      try {
        directions[i] =
            local_direction(arch, agents[i], trajs, nu, hp.estimator);
      } catch (const NonFiniteOutput& e) {
        throw NonFiniteOutput("agent " + std::to_string(i) + " step " +
                              std::to_string(t) + ": " + e.what());
      }
      agents[i].baseline.update(trajs, hp.estimator);
    }

    if (t % hp.K != 0) {
      for (int i = 0; i < hp.N; ++i)
        local_update(agents[i], directions[i], alpha);
      continue;
    }

    // Global phase: the direction is recorded but not applied locally; the
    // server takes the descent step instead.
    for (int i = 0; i < hp.N; ++i) agents[i].direction = directions[i];
    auto [u_bar, theta_bar] = global_aggregate(agents);
    const ParamVector theta_next = server_adjust(theta_bar, u_bar, alpha);
    synchronize(agents, theta_next, u_bar);
    ++round;

    MetricsRecord rec;
    rec.round = round;
    rec.step = t;
    rec.env_interactions = result.env_interactions;
    rec.comm_rounds = round;
    std::tie(rec.eval_return_mean, rec.eval_return_std) = evaluate_policy(
        *eval_env, arch, theta_next, options.eval_episodes, master_seed,
        round);
    if (options.oracle_mdp)
      rec.grad_norm_sq =
          oracle::exact_grad_J(*options.oracle_mdp, arch, theta_next)
              .squaredNorm();
    rec.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - start)
                      .count();
    result.metrics.push_back(rec);

    if (options.stop_at_return &&
        rec.eval_return_mean >= *options.stop_at_return)
      break;
  }

  result.theta_bar = agents.front().theta;
  return result;
}

}  // namespace algorithm
}  // namespace mfpo
