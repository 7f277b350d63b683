#include <doctest.h>

#include <string>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "oracles.hpp"
#include "psrl/belief_grid.hpp"
#include "psrl/errors.hpp"
#include "psrl/model_io.hpp"
#include "psrl/planner.hpp"
#include "support.hpp"

using namespace psrl;

namespace {

long binomial(long n, long k) {
  long r = 1;
  for (long i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

double bellman_rhs(const PlannerSolution& sol, const PomdpModel& m, const BeliefGrid& grid,
                   std::span<const double> b) {
  const auto q = action_values(sol, m, grid, b);
  return *std::min_element(q.begin(), q.end());
}

}  // namespace

TEST_CASE("grid enumerates every composition and projects convexly") {
  for (int S = 1; S <= 4; ++S) {
    for (int g : {1, 3, 7}) {
      BeliefGrid grid(S, g);
      CHECK(static_cast<long>(grid.size()) == binomial(g + S - 1, S - 1));
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto c = grid.composition(i);
        CHECK(std::accumulate(c.begin(), c.end(), 0) == g);
        CHECK(grid.index_of(c) == i);
      }
    }
  }
  BeliefGrid g1(3, 1);
  for (int s = 0; s < 3; ++s) CHECK(g1.point(static_cast<std::size_t>(s))[static_cast<std::size_t>(s)] == 1.0);

  Rng rng(6);
  BeliefGrid grid(4, 5);
  std::vector<double> linear(grid.size());
  const std::vector<double> coef{0.3, -1.2, 2.0, 0.7};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto p = grid.point(i);
    linear[i] = std::inner_product(p.begin(), p.end(), coef.begin(), 0.0);
  }
  for (int trial = 0; trial < 500; ++trial) {
    const auto b = support::random_simplex(rng, 4);
    const auto w = grid.project(b);
    CHECK(w.size() <= 4);
    double total = 0.0;
    std::vector<double> rebuilt(4, 0.0);
    for (const auto& gw : w) {
      CHECK(gw.weight > 0.0);
      total += gw.weight;
      const auto p = grid.point(gw.index);
      for (int s = 0; s < 4; ++s) rebuilt[static_cast<std::size_t>(s)] += gw.weight * p[static_cast<std::size_t>(s)];
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    for (int s = 0; s < 4; ++s) CHECK(rebuilt[static_cast<std::size_t>(s)] == doctest::Approx(b[static_cast<std::size_t>(s)]).epsilon(1e-12));
    const double exact = std::inner_product(b.begin(), b.end(), coef.begin(), 0.0);
    CHECK(grid.interpolate(linear, b) == doctest::Approx(exact).epsilon(1e-12));
  }
}

TEST_CASE("constant cost: J = c0, zero values, action 0") {
  PomdpModel m = load_model(support::fixture("pomdp/machine_maintenance.json"));
  std::fill(m.cost.begin(), m.cost.end(), 0.35);
  BeliefGrid grid(3, 6);
  const auto sol = solve_belief_mdp(m, grid);
  CHECK(sol.gain == doctest::Approx(0.35).epsilon(1e-9));
  for (double v : sol.values) CHECK(std::abs(v) <= 1e-9);
  for (int a : sol.policy) CHECK(a == 0);
  CHECK(greedy_action(sol, m, grid, std::vector<double>{0.2, 0.5, 0.3}) == 0);
}

TEST_CASE("belief planner on perfect-observation models matches the brute-force oracle") {
  Rng rng(12);
  PlannerOptions opts;
  opts.tolerance = 1e-10;
  for (int trial = 0; trial < 10; ++trial) {
    const int S = 2 + trial % 3, A = 2 + trial % 2;
    const PomdpModel m = support::perfect_observation_model(rng, S, A);
    BeliefGrid grid(S, 2);
    const auto sol = solve_belief_mdp(m, grid, opts);
    const auto ref = oracle::tabular_brute_force(m);
    CHECK(std::abs(sol.gain - ref.gain) <= 1e-6);
    for (int s = 0; s < S; ++s) {
      const auto vertex = BeliefVector::indicator(S, s);
      const auto q = action_values(sol, m, grid, vertex.probs());
      const double best = *std::min_element(q.begin(), q.end());
      for (int a = 0; a < A; ++a)
        CHECK((q[static_cast<std::size_t>(a)] - best <= 1e-8) ==
              ref.optimal[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)]);
      CHECK(ref.optimal[static_cast<std::size_t>(s)][static_cast<std::size_t>(greedy_action(sol, m, grid, vertex.probs()))]);
    }
    const auto tab = solve_tabular_mdp(m, opts);
    CHECK(std::abs(tab.gain - sol.gain) <= 1e-6);
    for (int s = 0; s < S; ++s) {
      const auto v = BeliefVector::indicator(S, s);
      CHECK(tab.policy[static_cast<std::size_t>(s)] == greedy_action(sol, m, grid, v.probs()));
    }
  }
}

TEST_CASE("tabular solver hand examples") {
  PomdpModel one;
  one.num_states = 1;
  one.num_actions = 2;
  one.num_obs = 1;
  one.transition = {1.0, 1.0};
  one.observation = {1.0};
  one.cost = {0.2, 0.7};
  one.initial_belief = {1.0};
  const auto s1 = solve_tabular_mdp(one);
  CHECK(s1.gain == doctest::Approx(0.2).epsilon(1e-9));
  CHECK(s1.policy[0] == 0);

  // Deterministic 2-cycle: periodic chain, average of the two state costs.
  PomdpModel cycle;
  cycle.num_states = 2;
  cycle.num_actions = 1;
  cycle.num_obs = 2;
  cycle.transition = {0.0, 1.0, 1.0, 0.0};
  cycle.observation = {1.0, 0.0, 0.0, 1.0};
  cycle.cost = {0.2, 0.8};
  cycle.initial_belief = {1.0, 0.0};
  const auto s2 = solve_tabular_mdp(cycle);
  CHECK(s2.gain == doctest::Approx(0.5).epsilon(1e-7));
  CHECK(s2.span == doctest::Approx(0.3).epsilon(1e-6));

  PomdpModel noisy = load_model(support::fixture("pomdp/tiger.json"));
  CHECK_THROWS_AS(solve_tabular_mdp(noisy), std::invalid_argument);
}

TEST_CASE("Bellman residual, normalization and grid-point greedy actions") {
  for (const char* name : {"pomdp/separated_a.json", "pomdp/tiger.json", "pomdp/machine_maintenance.json"}) {
    const PomdpModel m = load_model(support::fixture(name));
    BeliefGrid grid(m.num_states, m.num_states == 2 ? 40 : 12);
    PlannerOptions opts;
    const auto sol = solve_belief_mdp(m, grid, opts);
    CHECK(sol.residual <= opts.tolerance);
    CHECK(*std::min_element(sol.values.begin(), sol.values.end()) == 0.0);
    CHECK(sol.span == doctest::Approx(*std::max_element(sol.values.begin(), sol.values.end())));
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto b = grid.point(i);
      CHECK(std::abs(sol.gain + sol.values[i] - bellman_rhs(sol, m, grid, b)) <= 10 * opts.tolerance);
      CHECK(greedy_action(sol, m, grid, b) == sol.policy[i]);
    }
  }
}

TEST_CASE("cost shift moves J by the shift and keeps every argmin") {
  PomdpModel m = load_model(support::fixture("pomdp/noisy_inventory.json"));
  for (double& c : m.cost) c *= 0.8;
  BeliefGrid grid(3, 10);
  const auto base = solve_belief_mdp(m, grid);
  const double kappa = 0.15;
  PomdpModel shifted = m;
  for (double& c : shifted.cost) c += kappa;
  const auto moved = solve_belief_mdp(shifted, grid);
  CHECK(moved.gain - base.gain == doctest::Approx(kappa).epsilon(1e-6));
  CHECK(moved.policy == base.policy);
}

TEST_CASE("grid refinement shrinks successive gain differences") {
  for (const char* name : {"pomdp/separated_a.json", "pomdp/tiger.json"}) {
    const PomdpModel m = load_model(support::fixture(name));
    const double j10 = solve_belief_mdp(m, BeliefGrid(2, 10)).gain;
    const double j20 = solve_belief_mdp(m, BeliefGrid(2, 20)).gain;
    const double j40 = solve_belief_mdp(m, BeliefGrid(2, 40)).gain;
    INFO(std::string(name) << " J10=" << j10 << " J20=" << j20 << " J40=" << j40);
    CHECK(std::abs(j40 - j20) <= std::abs(j20 - j10));
  }
}

TEST_CASE("separated_b only settles once the grid resolves its switching belief") {
  // 10 -> 20 -> 40 grows here (0.0007 then 0.0010); from 40 on it shrinks.
  const PomdpModel m = load_model(support::fixture("pomdp/separated_b.json"));
  const double j40 = solve_belief_mdp(m, BeliefGrid(2, 40)).gain;
  const double j80 = solve_belief_mdp(m, BeliefGrid(2, 80)).gain;
  const double j160 = solve_belief_mdp(m, BeliefGrid(2, 160)).gain;
  CHECK(std::abs(j160 - j80) <= std::abs(j80 - j40));
}

TEST_CASE("NoConvergence carries the residual") {
  const PomdpModel m = load_model(support::fixture("pomdp/tiger.json"));
  PlannerOptions opts;
  opts.max_iterations = 2;
  try {
    solve_belief_mdp(m, BeliefGrid(2, 20), opts);
    FAIL("expected NoConvergence");
  } catch (const NoConvergence& e) {
    CHECK(e.iterations() == 2);
    CHECK(e.residual() > opts.tolerance);
  }
}

TEST_CASE("argmin_lowest and solution CSV") {
  const double v[] = {0.3, 0.1, 0.1 + 1e-13, 0.5};
  CHECK(argmin_lowest(v) == 1);
  const PomdpModel m = load_model(support::fixture("pomdp/tiger.json"));
  BeliefGrid grid(2, 4);
  const auto sol = solve_belief_mdp(m, grid);
  std::ostringstream out;
  write_solution_csv(out, grid, sol);
  const std::string csv = out.str();
  CHECK(csv.rfind("b0,b1,value,action\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
}
