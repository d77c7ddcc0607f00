#include <CLI11.hpp>
#include <cstdio>

#include "mfpo/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Federated policy optimization experiment runner"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out;
  int agents = 0, local_steps = 0, batch = 0;

  auto* run_cmd = app.add_subcommand("run", "Execute a configured run");
  run_cmd->add_option("config", config_path, "Config file (key = value)")
      ->required();
  run_cmd->add_option("--seed", seed, "Override master seed")
      ->each([&](const std::string&) { seed_set = true; });
  run_cmd->add_option("--out", out, "Override output CSV path");
  run_cmd->add_option("-N,--agents", agents, "Override agent count");
  run_cmd->add_option("-K,--local-steps", local_steps, "Override local steps");
  run_cmd->add_option("-D,--batch", batch, "Override trajectories per step");

  std::vector<std::string> csvs;
  double threshold = 0.0;
  auto* report_cmd =
      app.add_subcommand("report", "Rounds/interactions-to-threshold report");
  report_cmd->add_option("csv", csvs, "Metrics CSV files")->required();
  report_cmd->add_option("--threshold", threshold, "Return threshold")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      mfpo::harness::RunConfig cfg = mfpo::harness::load_config(config_path);
      if (seed_set) cfg.seed = seed;
      if (!out.empty()) cfg.out = out;
      if (agents > 0) cfg.hp.N = agents;
      if (local_steps > 0) cfg.hp.K = local_steps;
      if (batch > 0) cfg.hp.D = batch;
      mfpo::harness::run(cfg);
    } else {
      const auto report = mfpo::harness::compare_report(csvs, threshold);
      std::fputs(mfpo::harness::format_report(report, threshold).c_str(),
                 stdout);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
