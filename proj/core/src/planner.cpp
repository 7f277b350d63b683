#include "psrl/planner.hpp"

#include <algorithm>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "psrl/errors.hpp"

namespace psrl {
namespace {

struct Transition {
  std::size_t target;
  double prob;
};

/// Interpolated successor distribution of (b, a): P(o|b,a) times the grid
/// weights of tau(b, a, o).
std::vector<Transition> successors(const PomdpModel& model, const BeliefGrid& grid,
                                   std::span<const double> b, int a) {
  std::vector<Transition> out;
  for (int o = 0; o < model.num_obs; ++o) {
    FilterStep step = filter_step(model, b, a, o);
    if (!(step.normalizer > 0.0)) continue;
    for (double& w : step.weights) w /= step.normalizer;
    for (const auto& gw : grid.project(step.weights))
      out.push_back({gw.index, step.normalizer * gw.weight});
  }
  return out;
}

/// Compressed (point, action) -> successor lists.
struct SparseModel {
  std::vector<std::size_t> offsets;
  std::vector<Transition> entries;
  std::vector<double> costs;
};

SparseModel build_sparse(const PomdpModel& model, const BeliefGrid& grid) {
  SparseModel sm;
  const std::size_t n = grid.size();
  const auto A = static_cast<std::size_t>(model.num_actions);
  sm.offsets.reserve(n * A + 1);
  sm.costs.reserve(n * A);
  sm.offsets.push_back(0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto b = grid.point(i);
    for (std::size_t a = 0; a < A; ++a) {
      auto succ = successors(model, grid, b, static_cast<int>(a));
      sm.entries.insert(sm.entries.end(), succ.begin(), succ.end());
      sm.offsets.push_back(sm.entries.size());
      sm.costs.push_back(expected_cost(model, b, static_cast<int>(a)));
    }
  }
  return sm;
}

/// Generic damped relative value iteration. `backup(w, tw)` writes T w.
template <typename Backup>
PlannerSolution relative_value_iteration(std::size_t n, const PlannerOptions& options,
                                         Backup&& backup) {
  if (!(options.tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (!(options.aperiodicity >= 0.0 && options.aperiodicity < 1.0))
    throw std::invalid_argument("aperiodicity must lie in [0, 1)");
  constexpr std::size_t kRef = 0;
  std::vector<double> w(n, 0.0);
  std::vector<double> tw(n, 0.0);
  const double keep = options.aperiodicity;
  double span = std::numeric_limits<double>::infinity();
  PlannerSolution sol;
  for (long it = 1; it <= options.max_iterations; ++it) {
    backup(w, tw);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = tw[i] - w[i];
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
    span = hi - lo;
    if (span <= options.tolerance) {
      sol.gain = tw[kRef] - w[kRef];
      sol.residual = span;
      sol.iterations = it;
      const double base = *std::min_element(w.begin(), w.end());
      sol.values.resize(n);
      for (std::size_t i = 0; i < n; ++i) sol.values[i] = w[i] - base;
      sol.span = *std::max_element(sol.values.begin(), sol.values.end());
      return sol;
    }
    for (std::size_t i = 0; i < n; ++i) w[i] = keep * w[i] + (1.0 - keep) * tw[i];
    const double offset = w[kRef];
    for (double& x : w) x -= offset;
  }
  throw NoConvergence(options.max_iterations, span);
}

}  // namespace

int argmin_lowest(std::span<const double> values) {
  int best = 0;
  for (std::size_t a = 1; a < values.size(); ++a)
    if (values[a] < values[static_cast<std::size_t>(best)] - kTieTolerance) best = static_cast<int>(a);
  return best;
}

PlannerSolution solve_belief_mdp(const PomdpModel& model, const BeliefGrid& grid,
                                 const PlannerOptions& options) {
  if (grid.num_states() != model.num_states)
    throw std::invalid_argument("grid dimension does not match the model");
  const SparseModel sm = build_sparse(model, grid);
  const std::size_t n = grid.size();
  const auto A = static_cast<std::size_t>(model.num_actions);

  PlannerSolution sol = relative_value_iteration(
      n, options, [&](const std::vector<double>& w, std::vector<double>& tw) {
        for (std::size_t i = 0; i < n; ++i) {
          double best = std::numeric_limits<double>::infinity();
          for (std::size_t a = 0; a < A; ++a) {
            const std::size_t row = i * A + a;
            double q = sm.costs[row];
            for (std::size_t e = sm.offsets[row]; e < sm.offsets[row + 1]; ++e)
              q += sm.entries[e].prob * w[sm.entries[e].target];
            best = std::min(best, q);
          }
          tw[i] = best;
        }
      });
  sol.grid_resolution = grid.resolution();
  sol.policy.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    sol.policy[i] = argmin_lowest(action_values(sol, model, grid, grid.point(i)));
  return sol;
}

std::vector<double> action_values(const PlannerSolution& solution, const PomdpModel& model,
                                  const BeliefGrid& grid, std::span<const double> belief) {
  std::vector<double> q(static_cast<std::size_t>(model.num_actions));
  for (int a = 0; a < model.num_actions; ++a) {
    double value = expected_cost(model, belief, a);
    for (const auto& tr : successors(model, grid, belief, a))
      value += tr.prob * solution.values[tr.target];
    q[static_cast<std::size_t>(a)] = value;
  }
  return q;
}

int greedy_action(const PlannerSolution& solution, const PomdpModel& model,
                  const BeliefGrid& grid, std::span<const double> belief) {
  return argmin_lowest(action_values(solution, model, grid, belief));
}

PlannerSolution solve_tabular_mdp(const PomdpModel& model, const PlannerOptions& options) {
  if (!model.perfect_observation())
    throw std::invalid_argument("solve_tabular_mdp requires an identity observation kernel");
  const auto S = static_cast<std::size_t>(model.num_states);
  PlannerSolution sol = relative_value_iteration(
      S, options, [&](const std::vector<double>& w, std::vector<double>& tw) {
        for (std::size_t s = 0; s < S; ++s) {
          double best = std::numeric_limits<double>::infinity();
          for (int a = 0; a < model.num_actions; ++a) {
            const auto row = model.transition_row(static_cast<int>(s), a);
            double q = model.c(static_cast<int>(s), a);
            for (std::size_t sp = 0; sp < S; ++sp) q += row[sp] * w[sp];
            best = std::min(best, q);
          }
          tw[s] = best;
        }
      });
  sol.grid_resolution = 1;
  sol.policy.resize(S);
  for (std::size_t s = 0; s < S; ++s)
    sol.policy[s] = argmin_lowest(tabular_action_values(sol, model, static_cast<int>(s)));
  return sol;
}

std::vector<double> tabular_action_values(const PlannerSolution& solution,
                                          const PomdpModel& model, int s) {
  std::vector<double> q(static_cast<std::size_t>(model.num_actions));
  for (int a = 0; a < model.num_actions; ++a) {
    const auto row = model.transition_row(s, a);
    double value = model.c(s, a);
    for (std::size_t sp = 0; sp < row.size(); ++sp) value += row[sp] * solution.values[sp];
    q[static_cast<std::size_t>(a)] = value;
  }
  return q;
}

void write_solution_csv(std::ostream& out, const BeliefGrid& grid,
                        const PlannerSolution& solution) {
  for (int s = 0; s < grid.num_states(); ++s) out << 'b' << s << ',';
  out << "value,action\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (double p : grid.point(i)) out << p << ',';
    out << solution.values[i] << ',' << solution.policy[i] << '\n';
  }
}

}  // namespace psrl
