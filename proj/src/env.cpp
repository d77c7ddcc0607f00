#include "mfpo/env.hpp"

#include <cmath>

namespace mfpo {

namespace {

double wrap_angle(double a) {
  a = std::fmod(a + M_PI, 2.0 * M_PI);
  if (a < 0.0) a += 2.0 * M_PI;
  return a - M_PI;
}

}  // namespace

// ---------------------------------------------------------------- CartPole

CartPoleEnv::CartPoleEnv() {
  spec_.state_dim = 4;
  spec_.action_space = ActionSpace::discrete(2);
  spec_.horizon = 500;
  spec_.reward_min = 1.0;
  spec_.reward_max = 1.0;
}

Vec CartPoleEnv::reset(RngStream& rng) {
  Vec s(4);
  for (int i = 0; i < 4; ++i) s[i] = rng.uniform(-0.05, 0.05);
  return s;
}

StepResult CartPoleEnv::step(const Vec& state, const Action& action,
                             RngStream&) {
  if (!action.is_discrete() || action.index < 0 || action.index > 1)
    throw InvalidAction("cartpole expects a discrete action in {0, 1}");

  constexpr double kGravity = 9.8;
  constexpr double kMassCart = 1.0;
  constexpr double kMassPole = 0.1;
  constexpr double kTotalMass = kMassCart + kMassPole;
  constexpr double kHalfLength = 0.5;
  constexpr double kPoleMassLength = kMassPole * kHalfLength;
  constexpr double kForceMag = 10.0;
  constexpr double kDt = 0.02;
  constexpr double kXLimit = 2.4;
  const double kThetaLimit = 12.0 * M_PI / 180.0;

  const double x = state[0], x_dot = state[1], theta = state[2],
               theta_dot = state[3];
  const double force = action.index == 1 ? kForceMag : -kForceMag;
  const double cos_t = std::cos(theta), sin_t = std::sin(theta);

  const double temp =
      (force + kPoleMassLength * theta_dot * theta_dot * sin_t) / kTotalMass;
  const double theta_acc =
      (kGravity * sin_t - cos_t * temp) /
      (kHalfLength * (4.0 / 3.0 - kMassPole * cos_t * cos_t / kTotalMass));
  const double x_acc = temp - kPoleMassLength * theta_acc * cos_t / kTotalMass;

  StepResult r;
  r.next_state = Vec(4);
  r.next_state[0] = x + kDt * x_dot;
  r.next_state[1] = x_dot + kDt * x_acc;
  r.next_state[2] = theta + kDt * theta_dot;
  r.next_state[3] = theta_dot + kDt * theta_acc;
  r.reward = 1.0;
  r.terminal = std::abs(r.next_state[0]) > kXLimit ||
               std::abs(r.next_state[2]) > kThetaLimit;
  return r;
}

// ---------------------------------------------------------------- Pendulum

namespace {

Vec pendulum_obs(double theta, double theta_dot) {
  Vec s(3);
  s[0] = std::cos(theta);
  s[1] = std::sin(theta);
  s[2] = theta_dot;
  return s;
}

}  // namespace

PendulumEnv::PendulumEnv() {
  spec_.state_dim = 3;
  Vec lo(1), hi(1);
  lo[0] = -2.0;
  hi[0] = 2.0;
  spec_.action_space = ActionSpace::continuous(lo, hi);
  spec_.horizon = 200;
  const double max_cost =
      M_PI * M_PI + 0.1 * 8.0 * 8.0 + 0.001 * 2.0 * 2.0;
  spec_.reward_min = -max_cost;
  spec_.reward_max = 0.0;
}

Vec PendulumEnv::reset(RngStream& rng) {
  const double theta = rng.uniform(-M_PI, M_PI);
  const double theta_dot = rng.uniform(-1.0, 1.0);
  return pendulum_obs(theta, theta_dot);
}

StepResult PendulumEnv::step(const Vec& state, const Action& action,
                             RngStream&) {
  if (action.is_discrete() || action.value.size() != 1)
    throw InvalidAction("pendulum expects a 1-d continuous action");
  if (!std::isfinite(action.value[0]))
    throw InvalidAction("pendulum action is non-finite");

  constexpr double kG = 10.0, kMass = 1.0, kLength = 1.0, kDt = 0.05;
  constexpr double kMaxTorque = 2.0, kMaxSpeed = 8.0;

  // Policy actions live in [-1, 1]; scale to the torque range, then clip.
  double u = kMaxTorque * action.value[0];
  u = std::clamp(u, -kMaxTorque, kMaxTorque);

  const double theta = std::atan2(state[1], state[0]);
  const double theta_dot = state[2];
  const double cost =
      theta * theta + 0.1 * theta_dot * theta_dot + 0.001 * u * u;

  double new_dot = theta_dot +
                   (3.0 * kG / (2.0 * kLength) * std::sin(theta) +
                    3.0 / (kMass * kLength * kLength) * u) *
                       kDt;
  new_dot = std::clamp(new_dot, -kMaxSpeed, kMaxSpeed);
  const double new_theta = wrap_angle(theta + new_dot * kDt);

  StepResult r;
  r.next_state = pendulum_obs(new_theta, new_dot);
  r.reward = -cost;
  r.terminal = false;  // fixed horizon
  return r;
}

// ------------------------------------------------------------------- Chain

ChainEnv::ChainEnv(TabularMDP mdp) : mdp_(std::move(mdp)) {
  mdp_.validate();
  spec_.state_dim = mdp_.n_states;
  spec_.action_space = ActionSpace::discrete(mdp_.n_actions);
  spec_.horizon = mdp_.horizon;
  spec_.reward_min = mdp_.reward_min();
  spec_.reward_max = mdp_.reward_max();
}

Vec ChainEnv::reset(RngStream& rng) {
  return one_hot(rng.categorical(mdp_.mu), mdp_.n_states);
}

StepResult ChainEnv::step(const Vec& state, const Action& action,
                          RngStream& rng) {
  if (!action.is_discrete() || action.index < 0 ||
      action.index >= mdp_.n_actions)
    throw InvalidAction("chain action out of range");
  int s = 0;
  state.maxCoeff(&s);
  const int next = rng.categorical(mdp_.transition[action.index].row(s).transpose());
  StepResult r;
  r.next_state = one_hot(next, mdp_.n_states);
  r.reward = mdp_.reward(s, action.index);
  r.terminal = false;
  return r;
}

// ----------------------------------------------------------------- factory

std::unique_ptr<Environment> make_environment(const std::string& name,
                                              std::uint64_t env_seed) {
  if (name == "cartpole") return std::make_unique<CartPoleEnv>();
  if (name == "pendulum") return std::make_unique<PendulumEnv>();
  if (name == "chain")
    return std::make_unique<ChainEnv>(TabularMDP::random_chain(
        RngStream::derive(env_seed, {kEnvTag})));
  throw ParseError("unknown environment: " + name);
}

}  // namespace mfpo
