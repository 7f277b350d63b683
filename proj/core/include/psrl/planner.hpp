#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "psrl/belief_grid.hpp"
#include "psrl/model.hpp"

namespace psrl {

struct PlannerOptions {
  double tolerance = 1e-7;
  long max_iterations = 100000;
  /// Weight kept on the previous iterate in each sweep. A value in (0, 1)
  /// makes relative value iteration converge on periodic chains without
  /// changing the fixed point.
  double aperiodicity = 0.5;
};

/// Average-cost solution on a belief grid: gain J, relative values v with
/// min v = 0, greedy policy, span H = max v.
struct PlannerSolution {
  double gain = 0.0;
  std::vector<double> values;
  std::vector<int> policy;
  double span = 0.0;
  /// Span seminorm of T v - v at termination.
  double residual = 0.0;
  long iterations = 0;
  int grid_resolution = 0;
};

/// Actions whose values lie within this distance of the minimum count as tied.
inline constexpr double kTieTolerance = 1e-12;

/// Relative value iteration for J + v(b) = min_a { c(b,a) + sum_o P(o|b,a) v(tau(b,a,o)) }
/// on the grid points, with v evaluated off-grid by Freudenthal interpolation.
/// Observations with zero predictive probability are skipped.
/// Throws NoConvergence after options.max_iterations sweeps.
PlannerSolution solve_belief_mdp(const PomdpModel& model, const BeliefGrid& grid,
                                 const PlannerOptions& options = {});

/// Q(b, a) = c(b,a) + sum_o P(o|b,a) v^(tau(b,a,o)) at an arbitrary belief.
std::vector<double> action_values(const PlannerSolution& solution, const PomdpModel& model,
                                  const BeliefGrid& grid, std::span<const double> belief);

/// argmin_a Q(b, a); ties go to the lowest action index.
int greedy_action(const PlannerSolution& solution, const PomdpModel& model,
                  const BeliefGrid& grid, std::span<const double> belief);

/// Lowest index whose value is within kTieTolerance of the minimum.
int argmin_lowest(std::span<const double> values);

/// Relative value iteration over states for a perfectly observed model. The
/// result lives on the vertex grid BeliefGrid(S, 1): values[s], policy[s].
/// Throws std::invalid_argument if eta is not the identity.
PlannerSolution solve_tabular_mdp(const PomdpModel& model, const PlannerOptions& options = {});

/// Q(s, a) = C(s,a) + sum_s' theta(s'|s,a) v(s') for a tabular solution.
std::vector<double> tabular_action_values(const PlannerSolution& solution,
                                          const PomdpModel& model, int state);

/// CSV rows `b_0,...,b_{S-1},value,action`.
void write_solution_csv(std::ostream& out, const BeliefGrid& grid,
                        const PlannerSolution& solution);

}  // namespace psrl
