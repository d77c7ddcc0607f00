#pragma once

#include "mfpo/algorithm.hpp"

namespace mfpo {
namespace fedavg_pg {

// Direct FedAvg + policy-gradient combination: K local SGD steps on the
// batch estimator, parameter averaging, synchronization. No momentum, no
// importance weights, no server-side adjustment.
struct FedPgParams {
  int N = 1;
  int K = 1;
  int D = 1;
  int T = 1;
  PracticalSchedule schedule;
  estimators::EstimatorConfig estimator;

  void validate() const {
    if (N < 1 || K < 1 || D < 1 || T < 1)
      throw DimensionMismatch("hyperparameters must be positive");
    if (T % K != 0) throw DimensionMismatch("T must be a multiple of K");
    estimator.validate();
    schedule.validate();
  }
};

// Same metrics schema and seeding discipline as MFPO's run_training, so the
// first step's trajectories are identical across the two algorithms under a
// shared master seed.
algorithm::TrainResult run_training(const FedPgParams& params,
                                    const policy::PolicyArch& arch,
                                    const algorithm::EnvFactory& env_factory,
                                    std::uint64_t master_seed,
                                    const algorithm::TrainOptions& options = {});

}  // namespace fedavg_pg
}  // namespace mfpo
