#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "psrl/episode.hpp"
#include "psrl/model.hpp"
#include "psrl/planner.hpp"
#include "psrl/random.hpp"

namespace psrl {

/// Ground-truth record of one run. states/observations hold s_1..s_{T+1} and
/// o_1..o_{T+1}; actions/costs hold a_1..a_T and C(s_t, a_t).
struct Trajectory {
  std::vector<int> states;
  std::vector<int> observations;
  std::vector<int> actions;
  std::vector<double> costs;
  std::uint64_t seed = 0;
};

struct EnvStep {
  int next_state;
  int next_observation;
  double cost;
};

/// s' ~ theta(.|s,a), o' ~ eta(.|s'), cost C(s,a).
EnvStep step_env(const PomdpModel& model, int state, int action, Rng& rng);

/// What the agent sees of the world: observations only.
class Environment {
 public:
  virtual ~Environment() = default;
  /// Draws s_1 ~ h and returns o_1.
  virtual int reset() = 0;
  /// Applies a_t and returns o_{t+1}.
  virtual int step(int action) = 0;
};

class Simulator final : public Environment {
 public:
  Simulator(PomdpModel truth, std::uint64_t seed);

  int reset() override;
  int step(int action) override;

  const PomdpModel& model() const { return truth_; }
  const Trajectory& trajectory() const { return trajectory_; }

 private:
  PomdpModel truth_;
  Rng rng_;
  Trajectory trajectory_;
};

/// Per-run split R_T = H K_T + R1 + R2 + R3 + remainder.
struct RegretDecomposition {
  double span_h = 0.0;
  double h_kt = 0.0;
  double r1 = 0.0;
  double r2 = 0.0;
  double r3 = 0.0;
  double remainder = 0.0;
  std::vector<double> r1_per_episode;
  std::vector<double> r2_per_step;
  std::vector<double> r3_per_step;
};

struct RegretReport {
  double total = 0.0;
  /// Partial sums sum_{tau <= t} (C(s_tau, a_tau) - J*), t = 1..T.
  std::vector<double> curve;
  double j_star = 0.0;
  int grid_resolution = 0;
  std::optional<RegretDecomposition> decomposition;
  /// Same quantity through the control-variate estimator, when requested.
  std::vector<double> control_variate_curve;
};

RegretReport compute_regret(const Trajectory& trajectory, double j_star);

/// Everything decompose_regret needs. Beliefs are per step t = 1..T; kernels
/// and gains are per episode.
struct DecompositionInputs {
  const EpisodeLog* log = nullptr;
  const Trajectory* trajectory = nullptr;
  const PomdpModel* truth = nullptr;
  double j_star = 0.0;
  double span_h = 0.0;
  std::vector<std::vector<double>> true_beliefs;
  std::vector<std::vector<double>> sampled_beliefs;
  std::vector<std::vector<double>> sampled_kernels;
  std::vector<double> sampled_gains;
};

/// Throws MissingArtifacts when the dual beliefs or per-episode samples were
/// not recorded.
RegretDecomposition decompose_regret(const DecompositionInputs& in, double total_regret);

/// Average cost of following `solution` greedily in `model` itself for
/// `steps` steps, with the agent's belief filtered under the same model.
struct RolloutEstimate {
  double realized_cost = 0.0;
  double expected_cost = 0.0;
};
RolloutEstimate rollout_average_cost(const PomdpModel& model, const PlannerSolution& solution,
                                     const BeliefGrid& grid, long steps, std::uint64_t seed);

/// Cumulative regret with the cost noise integrated out: for t = 1..T,
///   sum_{tau <= t} [Q(h_tau, a_tau) - v(h_tau) - J] + v(h_1) - v(h_{t+1})
/// with h the belief filtered under the true model and (J, v, Q) from its
/// solution. It differs from the realized regret by a zero-mean martingale.
std::vector<double> control_variate_regret(const PomdpModel& truth,
                                           const PlannerSolution& solution,
                                           const BeliefGrid& grid, const Trajectory& trajectory);

/// CSV schema `t,cum_regret`.
void write_regret_csv(std::ostream& out, const RegretReport& report);

}  // namespace psrl
