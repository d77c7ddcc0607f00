#include "mfpo/fedavg_pg.hpp"

#include <chrono>

#include "mfpo/oracle.hpp"

namespace mfpo {
namespace fedavg_pg {

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
    trajs.push_back(rollout(env, arch, params, env.spec().horizon, rng));
    *env_interactions += static_cast<std::int64_t>(trajs.back().length());
  }
  return trajs;
}

}  // namespace

algorithm::TrainResult run_training(const FedPgParams& params,
                                    const policy::PolicyArch& arch,
                                    const algorithm::EnvFactory& env_factory,
                                    std::uint64_t master_seed,
                                    const algorithm::TrainOptions& options) {
  params.validate();
  const auto start = std::chrono::steady_clock::now();

  algorithm::TrainResult result;
  RngStream init_rng(RngStream::derive(master_seed, {kInitTag}));
  ParamVector theta_bar = policy::init_params(arch, init_rng);

  struct Agent {
    ParamVector theta;
    estimators::BaselineState baseline;
  };
  std::vector<Agent> agents(params.N);
  std::vector<std::unique_ptr<Environment>> envs;
  for (int i = 0; i < params.N; ++i) envs.push_back(env_factory());
  auto eval_env = env_factory();

  // Baseline warm-up on the same step-0 streams MFPO uses for direction
  // initialization, keeping the two algorithms' traces and interaction
  // accounting aligned.
  for (int i = 0; i < params.N; ++i) {
    agents[i].theta = theta_bar;
    auto trajs =
        sample_batch(*envs[i], arch, agents[i].theta, params.D * params.K,
                     master_seed, i + 1, 0, &result.env_interactions);
    agents[i].baseline.update(trajs, params.estimator);
  }

  int round = 0;
  for (int t = 1; t <= params.T; ++t) {
    const double alpha = params.schedule.alpha(t);
    for (int i = 0; i < params.N; ++i) {
      auto trajs =
          sample_batch(*envs[i], arch, agents[i].theta, params.D, master_seed,
                       i + 1, t, &result.env_interactions);
      ParamVector dir;
      try {
        dir = estimators::batch_direction(arch, agents[i].theta, trajs,
                                          params.estimator,
                                          &agents[i].baseline);
      } catch (const NonFiniteOutput& e) {
        throw NonFiniteOutput("agent " + std::to_string(i) + " step " +
                              std::to_string(t) + ": " + e.what());
      }
      agents[i].baseline.update(trajs, params.estimator);
      agents[i].theta -= alpha * dir;
    }

    if (t % params.K != 0) continue;

    theta_bar = ParamVector::Zero(agents.front().theta.size());
    for (const auto& a : agents) theta_bar += a.theta;
    theta_bar /= static_cast<double>(params.N);
    for (auto& a : agents) a.theta = theta_bar;
    ++round;

    MetricsRecord rec;
    rec.round = round;
    rec.step = t;
    rec.env_interactions = result.env_interactions;
    rec.comm_rounds = round;
    std::tie(rec.eval_return_mean, rec.eval_return_std) =
        algorithm::evaluate_policy(*eval_env, arch, theta_bar,
                                   options.eval_episodes, master_seed, round);
    if (options.oracle_mdp)
      rec.grad_norm_sq =
          oracle::exact_grad_J(*options.oracle_mdp, arch, theta_bar)
              .squaredNorm();
    rec.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - start)
                      .count();
    result.metrics.push_back(rec);

    if (options.stop_at_return &&
        rec.eval_return_mean >= *options.stop_at_return)
      break;
  }

  result.theta_bar = theta_bar;
  return result;
}

}  // namespace fedavg_pg
}  // namespace mfpo
