#pragma once

#include <cstdint>
#include <vector>

#include "mfpo/types.hpp"

namespace mfpo {

// Finite MDP in exact form. transition[a] is an (S x S) row-stochastic
// matrix, reward is (S x A), mu the initial state distribution.
struct TabularMDP {
  int n_states = 0;
  int n_actions = 0;
  std::vector<Mat> transition;  // transition[a](s, s')
  Mat reward;                   // reward(s, a)
  Vec mu;
  double gamma = 0.99;
  int horizon = 0;

  void validate() const;
  double reward_min() const { return reward.minCoeff(); }
  double reward_max() const { return reward.maxCoeff(); }

  // Seed-fixed random chain: |S|=3, |A|=2, H=3, gamma=0.99, mu a point
  // mass on state 0, dense random transitions and rewards in [0, 1].
  static TabularMDP random_chain(std::uint64_t seed, int n_states = 3,
                                 int n_actions = 2, int horizon = 3,
                                 double gamma = 0.99);
};

// One-hot encoding used as the policy-facing state representation.
inline Vec one_hot(int index, int n) {
  Vec v = Vec::Zero(n);
  v[index] = 1.0;
  return v;
}

}  // namespace mfpo
