#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace mfpo {

// One row per communication round. env_interactions counts every action
// taken by every agent during training (initialization rollouts included,
// evaluation episodes excluded).
struct MetricsRecord {
  int round = 0;
  int step = 0;
  std::int64_t env_interactions = 0;
  int comm_rounds = 0;
  double eval_return_mean = 0.0;
  double eval_return_std = 0.0;
  std::optional<double> grad_norm_sq;  // chain MDP runs only
  std::int64_t wall_ms = 0;
};

using MetricsTable = std::vector<MetricsRecord>;

}  // namespace mfpo
