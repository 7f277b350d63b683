#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "psrl/experiment.hpp"
#include "psrl_cli/config.hpp"

namespace psrl::cli {

/// Seed-level outcome of one configuration, as written by `run`.
struct RunOutcome {
  std::string config_hash;
  std::vector<SeedResult> results;
  MeanStat regret;
  /// Only filled when the control-variate diagnostic is on.
  MeanStat control_variate_regret;
  double mean_j_star = 0.0;
  bool episode_bounds_ok = true;
};

/// Runs every seed and writes per-seed and aggregate artifacts into
/// config.output_dir.
RunOutcome execute_run(const ExperimentConfig& config, std::ostream& log);

int cmd_run(const ExperimentConfig& config, std::ostream& log);

/// which: separation | concentration | lemma3 | episode-bounds.
int cmd_verify(const ExperimentConfig& config, std::string_view which, std::ostream& log);

/// axis: T | grid | seeds. Each value gets its own run directory.
int cmd_sweep(const ExperimentConfig& config, std::string_view axis,
              const std::vector<double>& values, std::ostream& log);

struct PlanRequest {
  std::filesystem::path model;
  /// Candidate index when `model` is a parameter-set file.
  int index = 0;
  int grid_resolution = 20;
  double tolerance = 1e-7;
  long max_iterations = 100000;
  std::filesystem::path output_dir;
};
int cmd_plan(const PlanRequest& request, std::ostream& log);

/// Pretty-prints artifacts, or merges per-seed summaries into `merge_out`.
int cmd_inspect(const std::vector<std::filesystem::path>& files,
                const std::optional<std::filesystem::path>& merge_out, std::ostream& log);

}  // namespace psrl::cli
