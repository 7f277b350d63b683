#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "psrl/agent.hpp"
#include "psrl/belief_grid.hpp"
#include "psrl/episode.hpp"
#include "psrl/planner.hpp"
#include "psrl/posterior.hpp"
#include "psrl/sim.hpp"

namespace psrl {

enum class Regime { Finite, DirichletMdp };

std::string_view to_string(Regime regime);
Regime regime_from_string(std::string_view name);

/// One experimental setting; seeds are supplied separately.
struct ExperimentSpec {
  Regime regime = Regime::Finite;

  // Finite regime: candidates and the index of theta*. A negative index draws
  // theta* from the prior for every seed.
  FiniteParameterSet params;
  int true_parameter = 0;

  // Dirichlet regime: `mdp` supplies dimensions, C, h and the true kernel.
  // With sample_true_kernel the kernel is drawn from the prior per seed.
  PomdpModel mdp;
  bool sample_true_kernel = false;
  double prior_strength = 1.0;

  ScheduleConfig schedule = ScheduleConfig::finite_preset();
  long horizon = 1000;
  int grid_resolution = 20;
  PlannerOptions planner;
  int smoothing_stride = 1;

  bool record_beliefs = false;
  bool record_posterior_mass = false;
  bool keep_trajectory = false;
  /// Also fill RegretReport::control_variate_curve.
  bool control_variate_regret = false;
  /// Steps at which pseudo-counts and true visit counts are captured.
  std::vector<long> count_checkpoints;
};

void validate_experiment(const ExperimentSpec& spec);

struct CountCheckpoint {
  long t = 0;
  std::vector<long long> pseudo;
  std::vector<long long> visits;
};

struct SeedResult {
  std::uint64_t seed = 0;
  /// Index of theta* (finite regime), otherwise -1.
  int true_parameter = -1;
  double span_h = 0.0;
  EpisodeLog log;
  RegretReport regret;
  /// 1 - f_t(theta*) for t = 1..T.
  std::vector<double> posterior_mass;
  std::vector<CountCheckpoint> checkpoints;
  Trajectory trajectory;
};

/// Planner work shared by all seeds: grid and per-candidate solutions.
class PreparedExperiment {
 public:
  explicit PreparedExperiment(ExperimentSpec spec);

  const ExperimentSpec& spec() const { return spec_; }
  const BeliefGrid& grid() const { return grid_; }
  const std::vector<PlannerSolution>& solutions() const { return solutions_; }
  /// max span over the candidate set (finite regime).
  double span_bound() const { return span_bound_; }

  SeedResult run(std::uint64_t seed) const;

 private:
  SeedResult run_finite(std::uint64_t seed) const;
  SeedResult run_dirichlet(std::uint64_t seed) const;

  ExperimentSpec spec_;
  BeliefGrid grid_;
  std::vector<PlannerSolution> solutions_;
  PlannerSolution true_mdp_solution_;
  double span_bound_ = 0.0;
};

/// seeds[i] = mix_seed(base, i).
std::vector<std::uint64_t> derive_seeds(std::uint64_t base, int count);

/// Runs every seed, with up to `jobs` worker threads. Results keep the order
/// of `seeds`.
std::vector<SeedResult> run_seeds(const PreparedExperiment& experiment,
                                  std::span<const std::uint64_t> seeds, int jobs = 1);

struct MeanStat {
  double mean = 0.0;
  double se = 0.0;
  std::size_t n = 0;
};
MeanStat mean_and_se(std::span<const double> xs);

/// Pointwise seed mean of the regret curves with a 95% normal band.
struct AggregateCurve {
  std::vector<double> mean;
  std::vector<double> lower;
  std::vector<double> upper;
};
AggregateCurve aggregate_regret(const std::vector<SeedResult>& results);

/// Pointwise mean of 1 - f_t(theta*).
std::vector<double> mean_posterior_mass(const std::vector<SeedResult>& results);

/// Visit counts n_t(s,a) = #{tau < t : s_tau = s, a_tau = a}, layout [a + A*s].
std::vector<long long> visit_counts(const Trajectory& trajectory, long t, int num_states,
                                    int num_actions);

/// FNV-1a over the canonical JSON dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& config);

}  // namespace psrl
