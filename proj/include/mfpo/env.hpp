#pragma once

#include <memory>
#include <string>
#include <utility>

#include "mfpo/rng.hpp"
#include "mfpo/tabular.hpp"
#include "mfpo/types.hpp"

namespace mfpo {

struct ActionSpace {
  enum Kind { Discrete, Continuous } kind = Discrete;
  int n = 0;    // Discrete: number of actions
  Vec lower;    // Continuous bounds
  Vec upper;

  static ActionSpace discrete(int n) {
    ActionSpace s;
    s.kind = Discrete;
    s.n = n;
    return s;
  }
  static ActionSpace continuous(Vec lo, Vec hi) {
    ActionSpace s;
    s.kind = Continuous;
    s.lower = std::move(lo);
    s.upper = std::move(hi);
    return s;
  }
  int dim() const { return kind == Discrete ? 1 : static_cast<int>(lower.size()); }
};

struct EnvSpec {
  int state_dim = 0;
  ActionSpace action_space;
  int horizon = 0;
  double reward_min = 0.0;
  double reward_max = 0.0;
};

struct StepResult {
  Vec next_state;
  double reward = 0.0;
  bool terminal = false;
};

// Single-owner environment instance; no shared mutable state.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual const EnvSpec& spec() const = 0;
  virtual Vec reset(RngStream& rng) = 0;
  virtual StepResult step(const Vec& state, const Action& action,
                          RngStream& rng) = 0;
};

// Classic cart-pole: gravity 9.8, cart mass 1.0, pole mass 0.1,
// half-length 0.5, force +-10 N, Euler dt 0.02, terminate at |x| > 2.4 or
// |theta| > 12 degrees, reward 1 per step, horizon 500.
class CartPoleEnv final : public Environment {
 public:
  CartPoleEnv();
  const EnvSpec& spec() const override { return spec_; }
  Vec reset(RngStream& rng) override;
  StepResult step(const Vec& state, const Action& action,
                  RngStream& rng) override;

 private:
  EnvSpec spec_;
};

// Torque-limited pendulum: g=10, m=1, l=1, dt=0.05, torque in [-2, 2],
// reward -(theta^2 + 0.1 thetadot^2 + 0.001 u^2) with theta wrapped to
// [-pi, pi] (0 = upright), horizon 200. The observable state is
// (cos theta, sin theta, thetadot). Continuous actions arrive in [-1, 1]
// and are scaled to the torque range.
class PendulumEnv final : public Environment {
 public:
  PendulumEnv();
  const EnvSpec& spec() const override { return spec_; }
  Vec reset(RngStream& rng) override;
  StepResult step(const Vec& state, const Action& action,
                  RngStream& rng) override;

 private:
  EnvSpec spec_;
};

// Sampling wrapper around a TabularMDP; states are one-hot vectors.
class ChainEnv final : public Environment {
 public:
  explicit ChainEnv(TabularMDP mdp);
  const EnvSpec& spec() const override { return spec_; }
  Vec reset(RngStream& rng) override;
  StepResult step(const Vec& state, const Action& action,
                  RngStream& rng) override;
  const TabularMDP& mdp() const { return mdp_; }

 private:
  TabularMDP mdp_;
  EnvSpec spec_;
};

// Factory keyed by the run-config environment name:
// "cartpole", "pendulum", "chain".
std::unique_ptr<Environment> make_environment(const std::string& name,
                                              std::uint64_t env_seed = 0);

}  // namespace mfpo
