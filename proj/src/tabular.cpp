#include "mfpo/tabular.hpp"

#include <cmath>

#include "mfpo/rng.hpp"

namespace mfpo {

void TabularMDP::validate() const {
  if (n_states < 1 || n_actions < 1 || horizon < 1)
    throw DimensionMismatch("tabular MDP dimensions must be positive");
  if (static_cast<int>(transition.size()) != n_actions ||
      reward.rows() != n_states || reward.cols() != n_actions ||
      mu.size() != n_states)
    throw DimensionMismatch("tabular MDP table shapes inconsistent");
  for (const auto& t : transition) {
    if (t.rows() != n_states || t.cols() != n_states)
      throw DimensionMismatch("transition matrix shape mismatch");
    for (int s = 0; s < n_states; ++s) {
      if (std::abs(t.row(s).sum() - 1.0) > 1e-12)
        throw DimensionMismatch("transition row does not sum to 1");
    }
  }
  if (std::abs(mu.sum() - 1.0) > 1e-12)
    throw DimensionMismatch("mu does not sum to 1");
  if (!reward.allFinite()) throw NonFiniteOutput("tabular rewards");
  if (gamma <= 0.0 || gamma > 1.0)
    throw DimensionMismatch("gamma must be in (0, 1]");
}

TabularMDP TabularMDP::random_chain(std::uint64_t seed, int n_states,
                                    int n_actions, int horizon, double gamma) {
  RngStream rng(seed);
  TabularMDP m;
  m.n_states = n_states;
  m.n_actions = n_actions;
  m.horizon = horizon;
  m.gamma = gamma;
  m.transition.assign(n_actions, Mat(n_states, n_states));
  m.reward = Mat(n_states, n_actions);
  for (int a = 0; a < n_actions; ++a) {
    for (int s = 0; s < n_states; ++s) {
      Vec row(n_states);
      for (int sp = 0; sp < n_states; ++sp) row[sp] = 0.05 + rng.uniform();
      row /= row.sum();
      // Renormalize the last entry so each row sums to 1 exactly.
      row[n_states - 1] = 1.0 - row.head(n_states - 1).sum();
      m.transition[a].row(s) = row.transpose();
      m.reward(s, a) = rng.uniform();
    }
  }
  m.mu = Vec::Zero(n_states);
  m.mu[0] = 1.0;  // point mass on state 0
  m.validate();
  return m;
}

}  // namespace mfpo
