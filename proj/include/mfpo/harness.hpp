#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mfpo/algorithm.hpp"
#include "mfpo/fedavg_pg.hpp"

namespace mfpo {
namespace harness {

// Flat key-value run configuration. All seeds are explicit; ablation
// sweeps expand into one run (and one CSV) per swept value.
struct RunConfig {
  std::string algorithm = "mfpo";  // "mfpo" | "fedpg"
  std::string env = "cartpole";
  int hidden = 16;
  std::uint64_t seed = 1;
  algorithm::HyperParams hp;
  int eval_episodes = 20;
  std::string out = "metrics.csv";
  std::optional<double> stop_at_return;
  std::vector<int> sweep_agents;

  void validate() const;
};

// Parses the documented key = value schema; '#' starts a comment and
// unknown keys are errors.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

policy::PolicyArch arch_for(const RunConfig& cfg);

// Executes the configured run (or the agent-count sweep) and writes one
// CSV per run. Returns the written paths.
std::vector<std::string> run(const RunConfig& cfg);

algorithm::TrainResult execute(const RunConfig& cfg, int agents_override = 0);

void write_csv(const std::string& path, const MetricsTable& metrics);
MetricsTable read_csv(const std::string& path);

// CSV body with the wall_ms column stripped; the unit of the determinism
// contract.
std::string csv_body_without_wall(const std::string& path);

struct RunReport {
  std::string path;
  std::string group;  // basename with seed token and extension stripped
  bool reached = false;
  int rounds_to_threshold = 0;
  std::int64_t interactions_to_threshold = 0;
};

struct GroupReport {
  std::string group;
  int runs = 0, reached = 0;
  double median_rounds = 0.0;
  double median_interactions = 0.0;
};

struct CompareReport {
  std::vector<RunReport> runs;
  std::vector<GroupReport> groups;
  // interactions ratio of each group relative to the first, in group order
  std::vector<double> speedup_vs_first;
};

CompareReport compare_report(const std::vector<std::string>& csv_paths,
                             double threshold_return);

std::string format_report(const CompareReport& report, double threshold);

}  // namespace harness
}  // namespace mfpo
