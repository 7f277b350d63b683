#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "psrl/experiment.hpp"

namespace psrl::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kConfigError = 1,
  kNoConvergence = 2,
  kIoError = 3,
  kCheckFailed = 4,
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fully resolved experiment configuration.
struct ExperimentConfig {
  Regime regime = Regime::Finite;
  /// Parameter-set file (finite) or single model file (Dirichlet).
  std::filesystem::path model;
  int true_parameter = 0;
  bool sample_true_kernel = false;
  double prior_strength = 1.0;

  ScheduleConfig schedule = ScheduleConfig::finite_preset();
  long horizon = 1000;
  int seeds = 10;
  std::uint64_t base_seed = 1;
  int grid_resolution = 20;
  double tolerance = 1e-7;
  long max_iterations = 100000;
  int smoothing_stride = 1;

  std::filesystem::path output_dir;
  int jobs = 1;

  // Diagnostics.
  bool record_beliefs = false;
  bool record_posterior_mass = false;
  bool control_variate_regret = false;
  std::vector<long> count_checkpoints;

  // Verifier knobs.
  int separation_depth = 6;
  std::vector<double> lemma3_alphas{0.1, 0.3, 0.5};
};

/// Builds a config from JSON. Relative model paths resolve against `base_dir`.
/// Missing fields keep their defaults; unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
nlohmann::json config_to_json(const ExperimentConfig& config);

/// Reads a config file (or starts empty), applies `overrides` on top of it,
/// then fills the output directory from PSRL_OUTPUT_DIR or "psrl_out".
/// Override paths are taken relative to the working directory.
ExperimentConfig resolve_config(const std::filesystem::path& config_file,
                                const nlohmann::json& overrides);

/// Throws ConfigError on regime or range violations.
void validate_config(const ExperimentConfig& config);

/// Core experiment setting described by the config. Loads model files.
ExperimentSpec build_spec(const ExperimentConfig& config);

/// Hash of everything that determines results: the resolved config without
/// output location and thread count, plus the model file contents.
std::string experiment_hash(const ExperimentConfig& config);

}  // namespace psrl::cli
