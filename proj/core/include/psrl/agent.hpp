#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "psrl/belief_grid.hpp"
#include "psrl/episode.hpp"
#include "psrl/planner.hpp"
#include "psrl/posterior.hpp"
#include "psrl/random.hpp"
#include "psrl/sim.hpp"
#include "psrl/smoothing.hpp"

namespace psrl {

struct StopDecision {
  bool stop = false;
  EpisodeTrigger trigger = EpisodeTrigger::Sched;
};

/// Negation of the episode while-guard. `snapshot` is m~_{t_k}; a zero
/// snapshot entry makes the doubling test read m~_t(s,a) > 0.
StopDecision stopping_check(long t, long start, long previous_length, ScheduleRule rule,
                            const CountTracker& tracker, std::span<const long long> snapshot);

/// The learning side of the control loop. A learner sees only actions and
/// observations.
class Learner {
 public:
  virtual ~Learner() = default;

  /// Consumes o_1. Counts are at step 1 afterwards.
  virtual void start(int first_observation) = 0;
  /// Samples theta_k and plans for it. Returns the sampled parameter id.
  virtual int begin_episode(Rng& rng) = 0;
  /// a_t under the current episode's policy.
  virtual int act() = 0;
  /// Folds in (a_t, o_{t+1}); counts move to step t+1.
  virtual void observe(int action, int next_observation) = 0;

  virtual const CountTracker& counts() const = 0;
  /// h_t(.; theta_k) for the current step.
  virtual std::span<const double> sampled_belief() const = 0;
  virtual const PomdpModel& sampled_model() const = 0;
  virtual const PlannerSolution& sampled_solution() const = 0;
};

/// Learner over a finite candidate set. Planner solutions are supplied per
/// candidate (solved once, since the planner is deterministic).
class FiniteLearner final : public Learner {
 public:
  /// `smoothing_stride` > 1 refreshes n~ by full smoothing only every that
  /// many steps and adds the filtered marginal in between. Only affects
  /// MaxCeil.
  FiniteLearner(const FiniteParameterSet& params, const std::vector<PlannerSolution>& solutions,
                const BeliefGrid& grid, PseudoCountPolicy policy, int smoothing_stride = 1);

  void start(int first_observation) override;
  int begin_episode(Rng& rng) override;
  int act() override;
  void observe(int action, int next_observation) override;

  const CountTracker& counts() const override { return tracker_; }
  std::span<const double> sampled_belief() const override;
  const PomdpModel& sampled_model() const override { return params_[sampled_]; }
  const PlannerSolution& sampled_solution() const override {
    return solutions_[static_cast<std::size_t>(sampled_)];
  }

  const JointPosterior& posterior() const { return posterior_; }
  int sampled_parameter() const { return sampled_; }

 private:
  std::vector<double> refreshed_expected_counts(int action);

  const FiniteParameterSet& params_;
  const std::vector<PlannerSolution>& solutions_;
  const BeliefGrid& grid_;
  int stride_;
  JointPosterior posterior_;
  CountTracker tracker_;
  std::vector<int> actions_;
  std::vector<int> observations_;
  long last_full_smooth_ = 0;
  int sampled_ = 0;
};

/// Learner for a perfectly observed model with an unknown kernel and a
/// Dirichlet prior. `base` supplies dimensions, C and h; its kernel is ignored.
class DirichletLearner final : public Learner {
 public:
  DirichletLearner(PomdpModel base, DirichletPosterior prior, PseudoCountPolicy policy,
                   PlannerOptions planner = {});

  void start(int first_observation) override;
  int begin_episode(Rng& rng) override;
  int act() override;
  void observe(int action, int next_observation) override;

  const CountTracker& counts() const override { return tracker_; }
  std::span<const double> sampled_belief() const override { return state_indicator_; }
  const PomdpModel& sampled_model() const override { return sampled_model_; }
  const PlannerSolution& sampled_solution() const override { return solution_; }

  const DirichletPosterior& posterior() const { return posterior_; }

 private:
  PomdpModel sampled_model_;
  DirichletPosterior posterior_;
  PlannerOptions planner_;
  CountTracker tracker_;
  PlannerSolution solution_;
  std::vector<double> visits_;
  std::vector<double> state_indicator_;
  int state_ = 0;
  int samples_ = 0;
};

/// Called once per acted step t (before the action) and once per episode
/// start. Used by diagnostic runs to record beliefs and posterior mass.
struct AgentHooks {
  std::function<void(long t, const Learner&)> on_step;
  std::function<void(const EpisodeRecord& started, const Learner&)> on_episode;
};

struct AgentRun {
  EpisodeLog log;
};

/// Posterior-sampling control loop over t = 1..horizon. Episode k starts at
/// t_k, samples theta_k, and acts greedily on h_t(.; theta_k) until the
/// stopping check fires or the horizon is reached (the last episode is tagged
/// HorizonEnd). T_0 = 1.
AgentRun run_agent(Learner& learner, Environment& env, const ScheduleConfig& schedule,
                   long horizon, Rng& rng, const AgentHooks* hooks = nullptr);

}  // namespace psrl
