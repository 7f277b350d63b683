#include "psrl/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <thread>

#include "psrl/errors.hpp"

namespace psrl {

std::string_view to_string(Regime regime) {
  return regime == Regime::Finite ? "finite" : "dirichlet_mdp";
}

Regime regime_from_string(std::string_view name) {
  if (name == "finite") return Regime::Finite;
  if (name == "dirichlet_mdp" || name == "dirichlet") return Regime::DirichletMdp;
  throw ConfigError("unknown regime: " + std::string(name));
}

void validate_experiment(const ExperimentSpec& spec) {
  if (spec.horizon < 1) throw ConfigError("horizon must be >= 1");
  if (spec.grid_resolution < 1) throw ConfigError("grid resolution must be >= 1");
  if (spec.regime == Regime::Finite) {
    if (spec.params.size() == 0) throw ConfigError("finite regime needs at least one candidate");
    const ValidationReport report = validate_parameter_set(spec.params);
    if (!report.ok) throw ConfigError("invalid parameter set: " + report.failures.front());
    if (spec.true_parameter >= spec.params.size())
      throw ConfigError("true_parameter out of range");
    if (spec.schedule.pseudo == PseudoCountPolicy::TrueCount &&
        !spec.params[0].perfect_observation())
      throw ConfigError("true_count pseudo-counts need an identity observation map");
  } else {
    const ValidationReport report = validate_model(spec.mdp);
    if (!report.ok) throw ConfigError("invalid model: " + report.failures.front());
    if (!spec.mdp.perfect_observation())
      throw ConfigError("dirichlet_mdp regime requires an identity observation map");
    if (!(spec.prior_strength > 0.0)) throw ConfigError("prior strength must be positive");
  }
}

namespace {

int states_of(const ExperimentSpec& spec) {
  return spec.regime == Regime::Finite ? spec.params.num_states() : spec.mdp.num_states;
}

}  // namespace

PreparedExperiment::PreparedExperiment(ExperimentSpec spec)
    : spec_((validate_experiment(spec), std::move(spec))),
      grid_(states_of(spec_), spec_.regime == Regime::Finite ? spec_.grid_resolution : 1) {
  std::sort(spec_.count_checkpoints.begin(), spec_.count_checkpoints.end());
  if (spec_.regime == Regime::Finite) {
    solutions_.reserve(static_cast<std::size_t>(spec_.params.size()));
    for (const auto& m : spec_.params.models) {
      solutions_.push_back(solve_belief_mdp(m, grid_, spec_.planner));
      span_bound_ = std::max(span_bound_, solutions_.back().span);
    }
  } else if (!spec_.sample_true_kernel) {
    true_mdp_solution_ = solve_tabular_mdp(spec_.mdp, spec_.planner);
    span_bound_ = true_mdp_solution_.span;
  }
}

SeedResult PreparedExperiment::run(std::uint64_t seed) const {
  return spec_.regime == Regime::Finite ? run_finite(seed) : run_dirichlet(seed);
}

namespace {

// Diagnostics recorded through the agent hooks. The true-parameter belief is
// filtered here from the simulator's record, never by the learner.
struct Recorder {
  const ExperimentSpec& spec;
  const PomdpModel& truth;
  const Simulator& env;
  SeedResult& result;
  DecompositionInputs inputs;
  BeliefVector true_belief;
  std::vector<double> sampled_spans;

  void step(long t, const Learner& learner) {
    const Trajectory& tr = env.trajectory();
    if (spec.record_beliefs) {
      true_belief = t == 1 ? initial_belief_update(truth, tr.observations[0])
                           : belief_update(truth, true_belief,
                                           tr.actions[static_cast<std::size_t>(t - 2)],
                                           tr.observations[static_cast<std::size_t>(t - 1)]);
      const auto hb = true_belief.probs();
      const auto hk = learner.sampled_belief();
      inputs.true_beliefs.emplace_back(hb.begin(), hb.end());
      inputs.sampled_beliefs.emplace_back(hk.begin(), hk.end());
    }
    if (std::binary_search(spec.count_checkpoints.begin(), spec.count_checkpoints.end(), t)) {
      result.checkpoints.push_back({t, learner.counts().pseudo,
                                    visit_counts(tr, t, truth.num_states, truth.num_actions)});
    }
  }

  void episode(const Learner& learner) {
    sampled_spans.push_back(learner.sampled_solution().span);
    if (spec.record_beliefs) {
      inputs.sampled_kernels.push_back(learner.sampled_model().transition);
      inputs.sampled_gains.push_back(learner.sampled_solution().gain);
    }
  }

  void finish(const EpisodeLog& log, const PlannerSolution& star, const BeliefGrid& grid) {
    const double j_star = star.gain;
    result.regret = compute_regret(env.trajectory(), j_star);
    result.regret.grid_resolution = grid.resolution();
    if (spec.control_variate_regret)
      result.regret.control_variate_curve =
          control_variate_regret(truth, star, grid, env.trajectory());
    if (spec.record_beliefs) {
      inputs.log = &log;
      inputs.trajectory = &env.trajectory();
      inputs.truth = &truth;
      inputs.j_star = j_star;
      inputs.span_h = result.span_h;
      result.regret.decomposition = decompose_regret(inputs, result.regret.total);
    }
    if (spec.keep_trajectory) result.trajectory = env.trajectory();
    result.trajectory.seed = env.trajectory().seed;
  }
};

}  // namespace

SeedResult PreparedExperiment::run_finite(std::uint64_t seed) const {
  SeedResult result;
  result.seed = seed;
  Rng theta_rng(mix_seed(seed, 3));
  const int star = spec_.true_parameter >= 0 ? spec_.true_parameter
                                             : theta_rng.categorical(spec_.params.prior);
  result.true_parameter = star;
  result.span_h = span_bound_;
  const PomdpModel& truth = spec_.params[star];

  Simulator env(truth, mix_seed(seed, 1));
  Rng agent_rng(mix_seed(seed, 2));
  FiniteLearner learner(spec_.params, solutions_, grid_, spec_.schedule.pseudo,
                        spec_.smoothing_stride);
  Recorder rec{spec_, truth, env, result, {}, {}, {}};
  if (spec_.record_posterior_mass) result.posterior_mass.reserve(static_cast<std::size_t>(spec_.horizon));

  AgentHooks hooks;
  hooks.on_step = [&](long t, const Learner& l) {
    if (spec_.record_posterior_mass)
      result.posterior_mass.push_back(learner.posterior().mass_excluding(star));
    rec.step(t, l);
  };
  hooks.on_episode = [&](const EpisodeRecord&, const Learner& l) { rec.episode(l); };

  AgentRun run = run_agent(learner, env, spec_.schedule, spec_.horizon, agent_rng, &hooks);
  result.log = std::move(run.log);
  rec.finish(result.log, solutions_[static_cast<std::size_t>(star)], grid_);
  return result;
}

SeedResult PreparedExperiment::run_dirichlet(std::uint64_t seed) const {
  SeedResult result;
  result.seed = seed;
  const int S = spec_.mdp.num_states;
  const int A = spec_.mdp.num_actions;
  const DirichletPosterior prior = DirichletPosterior::uniform(S, A, spec_.prior_strength);

  PomdpModel truth = spec_.mdp;
  PlannerSolution star_solution;
  if (spec_.sample_true_kernel) {
    Rng theta_rng(mix_seed(seed, 3));
    truth.transition = dirichlet_sample(prior, theta_rng);
    star_solution = solve_tabular_mdp(truth, spec_.planner);
  } else {
    star_solution = true_mdp_solution_;
  }

  Simulator env(truth, mix_seed(seed, 1));
  Rng agent_rng(mix_seed(seed, 2));
  DirichletLearner learner(spec_.mdp, prior, spec_.schedule.pseudo, spec_.planner);
  Recorder rec{spec_, truth, env, result, {}, {}, {}};

  AgentHooks hooks;
  hooks.on_step = [&](long t, const Learner& l) { rec.step(t, l); };
  hooks.on_episode = [&](const EpisodeRecord&, const Learner& l) { rec.episode(l); };

  AgentRun run = run_agent(learner, env, spec_.schedule, spec_.horizon, agent_rng, &hooks);
  result.log = std::move(run.log);
  result.span_h = star_solution.span;
  for (double h : rec.sampled_spans) result.span_h = std::max(result.span_h, h);
  rec.finish(result.log, star_solution, BeliefGrid(S, 1));
  return result;
}

std::vector<std::uint64_t> derive_seeds(std::uint64_t base, int count) {
  std::vector<std::uint64_t> seeds;
  seeds.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int i = 0; i < count; ++i) seeds.push_back(mix_seed(base, static_cast<std::uint64_t>(i)));
  return seeds;
}

std::vector<SeedResult> run_seeds(const PreparedExperiment& experiment,
                                  std::span<const std::uint64_t> seeds, int jobs) {
  std::vector<SeedResult> results(seeds.size());
  const auto n = seeds.size();
  const auto workers = static_cast<std::size_t>(std::clamp<long>(jobs, 1, static_cast<long>(std::max<std::size_t>(n, 1))));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) results[i] = experiment.run(seeds[i]);
    return results;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < n; i = next++) results[i] = experiment.run(seeds[i]);
      } catch (...) {
        errors[w] = std::current_exception();
        next = n;
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

MeanStat mean_and_se(std::span<const double> xs) {
  MeanStat st;
  st.n = xs.size();
  if (xs.empty()) return st;
  double sum = 0.0;
  for (double x : xs) sum += x;
  st.mean = sum / static_cast<double>(st.n);
  if (st.n > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - st.mean) * (x - st.mean);
    st.se = std::sqrt(ss / static_cast<double>(st.n - 1) / static_cast<double>(st.n));
  }
  return st;
}

AggregateCurve aggregate_regret(const std::vector<SeedResult>& results) {
  AggregateCurve agg;
  if (results.empty()) return agg;
  std::size_t len = results.front().regret.curve.size();
  for (const auto& r : results) len = std::min(len, r.regret.curve.size());
  std::vector<double> column(results.size());
  for (std::size_t t = 0; t < len; ++t) {
    for (std::size_t i = 0; i < results.size(); ++i) column[i] = results[i].regret.curve[t];
    const MeanStat st = mean_and_se(column);
    agg.mean.push_back(st.mean);
    agg.lower.push_back(st.mean - 1.96 * st.se);
    agg.upper.push_back(st.mean + 1.96 * st.se);
  }
  return agg;
}

std::vector<double> mean_posterior_mass(const std::vector<SeedResult>& results) {
  std::vector<double> mean;
  if (results.empty()) return mean;
  std::size_t len = results.front().posterior_mass.size();
  for (const auto& r : results) len = std::min(len, r.posterior_mass.size());
  mean.assign(len, 0.0);
  for (const auto& r : results)
    for (std::size_t t = 0; t < len; ++t) mean[t] += r.posterior_mass[t];
  for (double& m : mean) m /= static_cast<double>(results.size());
  return mean;
}

std::vector<long long> visit_counts(const Trajectory& trajectory, long t, int num_states,
                                    int num_actions) {
  std::vector<long long> n(static_cast<std::size_t>(num_states * num_actions), 0);
  const auto upto = std::min<std::size_t>(static_cast<std::size_t>(std::max(t - 1, 0L)),
                                          trajectory.actions.size());
  for (std::size_t i = 0; i < upto; ++i)
    ++n[static_cast<std::size_t>(trajectory.actions[i] + num_actions * trajectory.states[i])];
  return n;
}

std::string config_hash(const nlohmann::json& config) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : config.dump()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace psrl
