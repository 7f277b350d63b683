#include "psrl/agent.hpp"

#include <algorithm>
#include <stdexcept>

namespace psrl {

StopDecision stopping_check(long t, long start, long previous_length, ScheduleRule rule,
                            const CountTracker& tracker, std::span<const long long> snapshot) {
  const ScheduleConfig cfg{rule, tracker.policy};
  if (t > cfg.sched(start, previous_length)) return {true, EpisodeTrigger::Sched};
  for (std::size_t i = 0; i < tracker.pseudo.size(); ++i) {
    if (tracker.pseudo[i] > 2 * snapshot[i]) return {true, EpisodeTrigger::CountDoubling};
  }
  return {false, EpisodeTrigger::Sched};
}

FiniteLearner::FiniteLearner(const FiniteParameterSet& params,
                             const std::vector<PlannerSolution>& solutions,
                             const BeliefGrid& grid, PseudoCountPolicy policy,
                             int smoothing_stride)
    : params_(params),
      solutions_(solutions),
      grid_(grid),
      stride_(std::max(1, smoothing_stride)),
      tracker_(CountTracker::make(policy, params.num_states(), params.num_actions())) {
  if (static_cast<int>(solutions.size()) != params.size())
    throw std::invalid_argument("FiniteLearner: one planner solution per candidate required");
  if (policy == PseudoCountPolicy::TrueCount && !params[0].perfect_observation())
    throw std::invalid_argument("true counts need a perfectly observed model");
}

void FiniteLearner::start(int first_observation) {
  posterior_ = joint_init(params_, first_observation);
  actions_.clear();
  observations_.assign(1, first_observation);
  tracker_ = CountTracker::make(tracker_.policy, tracker_.num_states, tracker_.num_actions);
  tracker_ = advance_pseudo_counts(std::move(tracker_),
                                   std::vector<double>(tracker_.pseudo.size(), 0.0));
  last_full_smooth_ = 1;
}

int FiniteLearner::begin_episode(Rng& rng) {
  sampled_ = sample_parameter(posterior_, rng);
  return sampled_;
}

int FiniteLearner::act() {
  const auto k = static_cast<std::size_t>(sampled_);
  return greedy_action(solutions_[k], params_[sampled_], grid_,
                       posterior_.beliefs[k].probs());
}

std::span<const double> FiniteLearner::sampled_belief() const {
  return posterior_.beliefs[static_cast<std::size_t>(sampled_)].probs();
}

// n~_{t+1} = E[n_{t+1} | o_{1:t}, a_{1:t}], computed before the posterior
// moves to t+1.
std::vector<double> FiniteLearner::refreshed_expected_counts(int action) {
  const int S = tracker_.num_states;
  const int A = tracker_.num_actions;
  switch (tracker_.policy) {
    case PseudoCountPolicy::Time:
      return std::vector<double>(tracker_.pseudo.size(), 0.0);
    case PseudoCountPolicy::TrueCount: {
      std::vector<double> counts = tracker_.expected;
      counts[static_cast<std::size_t>(action + A * observations_.back())] += 1.0;
      return counts;
    }
    case PseudoCountPolicy::MaxCeil:
      break;
  }
  const long next_t = posterior_.t + 1;
  if (stride_ == 1 || next_t - last_full_smooth_ >= stride_) {
    last_full_smooth_ = next_t;
    const SmoothedMarginals sm = smooth_state_marginals(params_, actions_, observations_);
    return expected_counts(sm.marginals, actions_, S, A);
  }
  std::vector<double> counts = tracker_.expected;
  for (int i = 0; i < params_.size(); ++i) {
    const double w = posterior_.f[static_cast<std::size_t>(i)];
    if (w == 0.0) continue;
    const auto& b = posterior_.beliefs[static_cast<std::size_t>(i)];
    for (int s = 0; s < S; ++s) counts[static_cast<std::size_t>(action + A * s)] += w * b[s];
  }
  return counts;
}

void FiniteLearner::observe(int action, int next_observation) {
  actions_.push_back(action);
  std::vector<double> expected = refreshed_expected_counts(action);
  posterior_ = joint_update(std::move(posterior_), params_, action, next_observation);
  observations_.push_back(next_observation);
  tracker_ = advance_pseudo_counts(std::move(tracker_), expected);
}

DirichletLearner::DirichletLearner(PomdpModel base, DirichletPosterior prior,
                                   PseudoCountPolicy policy, PlannerOptions planner)
    : sampled_model_(std::move(base)),
      posterior_(std::move(prior)),
      planner_(planner),
      tracker_(CountTracker::make(policy, sampled_model_.num_states, sampled_model_.num_actions)) {
  if (!sampled_model_.perfect_observation())
    throw std::invalid_argument("Dirichlet regime requires an identity observation map");
  if (posterior_.num_states != sampled_model_.num_states ||
      posterior_.num_actions != sampled_model_.num_actions)
    throw std::invalid_argument("Dirichlet prior dimensions do not match the model");
}

void DirichletLearner::start(int first_observation) {
  state_ = first_observation;
  visits_.assign(tracker_.pseudo.size(), 0.0);
  tracker_ = CountTracker::make(tracker_.policy, tracker_.num_states, tracker_.num_actions);
  tracker_ = advance_pseudo_counts(std::move(tracker_), visits_);
  state_indicator_.assign(static_cast<std::size_t>(tracker_.num_states), 0.0);
  state_indicator_[static_cast<std::size_t>(state_)] = 1.0;
}

int DirichletLearner::begin_episode(Rng& rng) {
  sampled_model_.transition = dirichlet_sample(posterior_, rng);
  solution_ = solve_tabular_mdp(sampled_model_, planner_);
  return samples_++;
}

int DirichletLearner::act() { return solution_.policy[static_cast<std::size_t>(state_)]; }

void DirichletLearner::observe(int action, int next_observation) {
  posterior_ = dirichlet_update(std::move(posterior_), state_, action, next_observation);
  visits_[static_cast<std::size_t>(action + tracker_.num_actions * state_)] += 1.0;
  state_indicator_[static_cast<std::size_t>(state_)] = 0.0;
  state_ = next_observation;
  state_indicator_[static_cast<std::size_t>(state_)] = 1.0;
  tracker_ = advance_pseudo_counts(std::move(tracker_), visits_);
}

AgentRun run_agent(Learner& learner, Environment& env, const ScheduleConfig& schedule,
                   long horizon, Rng& rng, const AgentHooks* hooks) {
  if (horizon < 1) throw std::invalid_argument("run_agent: horizon must be >= 1");
  AgentRun run;
  learner.start(env.reset());
  long t = 1;
  long previous_length = 1;
  int k = 0;
  std::vector<long long> snapshot;
  while (t <= horizon) {
    EpisodeRecord rec;
    rec.k = ++k;
    rec.start = t;
    rec.param_id = learner.begin_episode(rng);
    if (hooks && hooks->on_episode) hooks->on_episode(rec, learner);
    snapshot = learner.counts().pseudo;
    for (;;) {
      if (t > horizon) {
        rec.trigger = EpisodeTrigger::HorizonEnd;
        rec.executed = t - rec.start;
        rec.length = std::max(rec.executed,
                              schedule.sched(rec.start, previous_length) - rec.start + 1);
        break;
      }
      const StopDecision d =
          stopping_check(t, rec.start, previous_length, schedule.rule, learner.counts(), snapshot);
      if (d.stop) {
        rec.trigger = d.trigger;
        rec.executed = rec.length = t - rec.start;
        break;
      }
      if (hooks && hooks->on_step) hooks->on_step(t, learner);
      const int a = learner.act();
      learner.observe(a, env.step(a));
      ++t;
    }
    previous_length = rec.length;
    run.log.episodes.push_back(rec);
  }
  return run;
}

}  // namespace psrl
