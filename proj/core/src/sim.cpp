#include "psrl/sim.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "psrl/errors.hpp"

namespace psrl {

EnvStep step_env(const PomdpModel& model, int state, int action, Rng& rng) {
  const int next = rng.categorical(model.transition_row(state, action));
  const std::span<const double> eta_row(
      model.observation.data() + static_cast<std::size_t>(model.num_obs) * next,
      static_cast<std::size_t>(model.num_obs));
  const int o = rng.categorical(eta_row);
  return {next, o, model.c(state, action)};
}

Simulator::Simulator(PomdpModel truth, std::uint64_t seed)
    : truth_(std::move(truth)), rng_(seed) {
  trajectory_.seed = seed;
}

int Simulator::reset() {
  const std::uint64_t seed = trajectory_.seed;
  trajectory_ = Trajectory{};
  trajectory_.seed = seed;
  rng_ = Rng(seed);
  const int s = rng_.categorical(truth_.initial_belief);
  const std::span<const double> eta_row(
      truth_.observation.data() + static_cast<std::size_t>(truth_.num_obs) * s,
      static_cast<std::size_t>(truth_.num_obs));
  const int o = rng_.categorical(eta_row);
  trajectory_.states.push_back(s);
  trajectory_.observations.push_back(o);
  return o;
}

int Simulator::step(int action) {
  const int s = trajectory_.states.back();
  const EnvStep r = step_env(truth_, s, action, rng_);
  trajectory_.actions.push_back(action);
  trajectory_.costs.push_back(r.cost);
  trajectory_.states.push_back(r.next_state);
  trajectory_.observations.push_back(r.next_observation);
  return r.next_observation;
}

RegretReport compute_regret(const Trajectory& trajectory, double j_star) {
  RegretReport report;
  report.j_star = j_star;
  report.curve.reserve(trajectory.costs.size());
  double sum = 0.0;
  for (double c : trajectory.costs) {
    sum += c - j_star;
    report.curve.push_back(sum);
  }
  report.total = sum;
  return report;
}

RegretDecomposition decompose_regret(const DecompositionInputs& in, double total_regret) {
  if (in.log == nullptr || in.trajectory == nullptr || in.truth == nullptr) {
    throw MissingArtifacts("decomposition needs the episode log, trajectory and true model");
  }
  const auto steps = in.trajectory->actions.size();
  const auto episodes = in.log->episodes.size();
  if (in.true_beliefs.size() != steps || in.sampled_beliefs.size() != steps) {
    throw MissingArtifacts("dual beliefs were not recorded for every step");
  }
  if (in.sampled_kernels.size() != episodes || in.sampled_gains.size() != episodes) {
    throw MissingArtifacts("sampled kernels/gains were not recorded for every episode");
  }

  const PomdpModel& truth = *in.truth;
  const int S = truth.num_states;
  RegretDecomposition d;
  d.span_h = in.span_h;
  d.h_kt = in.span_h * static_cast<double>(episodes);
  d.r2_per_step.reserve(steps);
  d.r3_per_step.reserve(steps);

  std::size_t t = 0;  // zero-based step index
  for (std::size_t k = 0; k < episodes; ++k) {
    const EpisodeRecord& e = in.log->episodes[k];
    const double r1k = static_cast<double>(e.length) * (in.sampled_gains[k] - in.j_star);
    d.r1_per_episode.push_back(r1k);
    d.r1 += r1k;
    const auto& kernel = in.sampled_kernels[k];
    for (long i = 0; i < e.executed && t < steps; ++i, ++t) {
      const int s = in.trajectory->states[t];
      const int a = in.trajectory->actions[t];
      double kernel_gap = 0.0;
      for (int next = 0; next < S; ++next) {
        const auto idx = static_cast<std::size_t>(next + S * (s + S * a));
        kernel_gap += std::abs(truth.transition[idx] - kernel[idx]);
      }
      double belief_gap = 0.0;
      for (int x = 0; x < S; ++x) {
        belief_gap += std::abs(in.true_beliefs[t][static_cast<std::size_t>(x)] -
                               in.sampled_beliefs[t][static_cast<std::size_t>(x)]);
      }
      const double r2t = in.span_h * (kernel_gap + belief_gap);
      const double r3t = expected_cost(truth, in.true_beliefs[t], a) -
                         expected_cost(truth, in.sampled_beliefs[t], a);
      d.r2_per_step.push_back(r2t);
      d.r3_per_step.push_back(r3t);
      d.r2 += r2t;
      d.r3 += r3t;
    }
  }
  d.remainder = total_regret - (d.h_kt + d.r1 + d.r2 + d.r3);
  return d;
}

RolloutEstimate rollout_average_cost(const PomdpModel& model, const PlannerSolution& solution,
                                     const BeliefGrid& grid, long steps, std::uint64_t seed) {
  Simulator env(model, seed);
  BeliefVector belief = initial_belief_update(model, env.reset());
  double realized = 0.0;
  double expected = 0.0;
  for (long t = 0; t < steps; ++t) {
    const int a = greedy_action(solution, model, grid, belief.probs());
    expected += expected_cost(model, belief.probs(), a);
    const int o = env.step(a);
    realized += env.trajectory().costs.back();
    belief = belief_update(model, belief, a, o);
  }
  const auto n = static_cast<double>(std::max(steps, 1L));
  return {realized / n, expected / n};
}

std::vector<double> control_variate_regret(const PomdpModel& truth,
                                           const PlannerSolution& solution,
                                           const BeliefGrid& grid, const Trajectory& trajectory) {
  const std::size_t T = trajectory.actions.size();
  if (trajectory.observations.size() != T + 1)
    throw std::invalid_argument("trajectory needs T + 1 observations");
  std::vector<double> curve(T);
  BeliefVector belief = initial_belief_update(truth, trajectory.observations[0]);
  const double v_first = grid.interpolate(solution.values, belief.probs());
  double increments = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    const int a = trajectory.actions[t];
    const auto q = action_values(solution, truth, grid, belief.probs());
    increments += q[static_cast<std::size_t>(a)] - grid.interpolate(solution.values, belief.probs()) -
                  solution.gain;
    belief = belief_update(truth, belief, a, trajectory.observations[t + 1]);
    curve[t] = increments + v_first - grid.interpolate(solution.values, belief.probs());
  }
  return curve;
}

void write_regret_csv(std::ostream& out, const RegretReport& report) {
  out << "t,cum_regret\n";
  out.precision(17);
  for (std::size_t i = 0; i < report.curve.size(); ++i) {
    out << (i + 1) << ',' << report.curve[i] << '\n';
  }
}

}  // namespace psrl
