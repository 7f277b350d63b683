#include <benchmark/benchmark.h>

#include <filesystem>
#include <string>

#include "psrl/experiment.hpp"
#include "psrl/model_io.hpp"
#include "psrl/planner.hpp"
#include "psrl/posterior.hpp"
#include "psrl/sim.hpp"
#include "psrl/smoothing.hpp"

using namespace psrl;

namespace {

std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(PSRL_FIXTURE_DIR) / name;
}

void BM_BeliefUpdate(benchmark::State& state) {
  const PomdpModel m = load_model(fixture("pomdp/noisy_inventory.json"));
  BeliefVector b = initial_belief_update(m, 0);
  int o = 0;
  for (auto _ : state) {
    b = belief_update(m, b, o % m.num_actions, o % m.num_obs);
    ++o;
    benchmark::DoNotOptimize(b);
  }
}
BENCHMARK(BM_BeliefUpdate);

void BM_JointUpdate(benchmark::State& state) {
  const auto params = load_parameter_set(fixture("separated_pair.json"));
  JointPosterior post = joint_init(params, 0);
  int t = 0;
  for (auto _ : state) {
    post = joint_update(std::move(post), params, t % 2, (t / 3) % 2);
    ++t;
  }
  benchmark::DoNotOptimize(post);
}
BENCHMARK(BM_JointUpdate);

// Full solve; the argument is the grid resolution.
void BM_SolveBeliefMdp(benchmark::State& state) {
  const PomdpModel m = load_model(fixture("pomdp/machine_maintenance.json"));
  const BeliefGrid grid(m.num_states, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(solve_belief_mdp(m, grid));
  state.counters["grid_points"] = static_cast<double>(grid.size());
}
BENCHMARK(BM_SolveBeliefMdp)->Arg(10)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

void BM_GreedyAction(benchmark::State& state) {
  const PomdpModel m = load_model(fixture("pomdp/machine_maintenance.json"));
  const BeliefGrid grid(m.num_states, 40);
  const auto sol = solve_belief_mdp(m, grid);
  const std::vector<double> b{0.31, 0.52, 0.17};
  for (auto _ : state) benchmark::DoNotOptimize(greedy_action(sol, m, grid, b));
}
BENCHMARK(BM_GreedyAction);

// Forward-backward smoothing over a history of the given length.
void BM_Smoothing(benchmark::State& state) {
  const auto params = load_parameter_set(fixture("separated_pair.json"));
  const auto length = static_cast<std::size_t>(state.range(0));
  Simulator env(params[0], 3);
  env.reset();
  for (std::size_t t = 1; t < length; ++t) env.step(static_cast<int>(t % 2));
  const auto& tr = env.trajectory();
  for (auto _ : state)
    benchmark::DoNotOptimize(smooth_state_marginals(params, tr.actions, tr.observations));
}
BENCHMARK(BM_Smoothing)->Arg(64)->Arg(512)->Arg(4096);

// Whole agent runs per seed; items are environment steps.
void BM_FiniteAgentRun(benchmark::State& state) {
  ExperimentSpec spec;
  spec.params = load_parameter_set(fixture("separated_pair.json"));
  spec.horizon = state.range(0);
  spec.grid_resolution = 20;
  const PreparedExperiment exp(spec);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(exp.run(seed++));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FiniteAgentRun)->Arg(1023)->Unit(benchmark::kMillisecond);

void BM_MaxCeilAgentRun(benchmark::State& state) {
  ExperimentSpec spec;
  spec.params = load_parameter_set(fixture("separated_pair.json"));
  spec.schedule = ScheduleConfig::general_preset(PseudoCountPolicy::MaxCeil);
  spec.horizon = state.range(0);
  spec.grid_resolution = 20;
  const PreparedExperiment exp(spec);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(exp.run(seed++));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MaxCeilAgentRun)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_DirichletAgentRun(benchmark::State& state) {
  ExperimentSpec spec;
  spec.regime = Regime::DirichletMdp;
  spec.mdp = load_model(fixture("mdp3x3.json"));
  spec.schedule = ScheduleConfig::general_preset();
  spec.horizon = state.range(0);
  const PreparedExperiment exp(spec);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(exp.run(seed++));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DirichletAgentRun)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
