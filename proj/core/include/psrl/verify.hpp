#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "psrl/episode.hpp"
#include "psrl/experiment.hpp"
#include "psrl/posterior.hpp"

namespace psrl {

/// sum_o p(o) log(p(o)/q(o)) with 0 log 0 = 0; +inf when p is not
/// absolutely continuous with respect to q.
double kl_divergence(std::span<const double> p, std::span<const double> q);

/// KL between the one-step observation predictives of candidates theta and
/// gamma after history (o_1..o_t, a_1..a_t): each belief is filtered under
/// its own kernel and pushed through a_t. Throws InvalidHistory when the
/// history is impossible under theta; returns +inf when it is impossible
/// under gamma only.
double kl_step(const FiniteParameterSet& params, int theta, int gamma,
               std::span<const int> observations, std::span<const int> actions);

enum class SeparationMethod { Exhaustive, Sampled };
std::string_view to_string(SeparationMethod method);

struct SeparationOptions {
  int depth = 6;
  /// Largest number of history nodes the exhaustive search may visit.
  std::size_t cap = 2'000'000;
  /// Sampled mode: histories per candidate, drawn under uniform random actions.
  int samples = 2000;
  std::uint64_t seed = 0;
};

/// Minimum KL found over histories of length 1..depth. It certifies
/// separation only for the depths searched.
struct SeparationReport {
  double epsilon_hat = 0.0;
  int theta = -1;
  int gamma = -1;
  std::vector<int> argmin_observations;
  std::vector<int> argmin_actions;
  int depth = 0;
  SeparationMethod method = SeparationMethod::Exhaustive;
  std::size_t histories = 0;
  std::size_t infinite_pairs = 0;
};

/// Number of KL evaluation nodes in the full history tree up to `depth`.
double separation_tree_size(const FiniteParameterSet& params, int depth);

/// Exhaustive when the history tree fits under options.cap, otherwise sampled.
SeparationReport check_separation(const FiniteParameterSet& params,
                                  const SeparationOptions& options = {});

struct ConcentrationOptions {
  double burn_in_fraction = 0.1;
  /// Envelope check: mean <= alpha_hat exp(-beta_hat t) (1 + slack).
  double slack = 1.0;
  /// beta_hat at or below this is flagged as no learning.
  double flat_threshold = 1e-6;
};

struct ConcentrationEstimate {
  double alpha_hat = 0.0;
  double beta_hat = 0.0;
  double r_squared = 0.0;
  std::size_t burn_in = 0;
  std::size_t points_used = 0;
  bool no_learning = false;
  bool envelope_ok = false;
  std::vector<double> times;
  std::vector<double> mass;
};

/// Least-squares fit of log(mass) against t after the burn-in. Zero-mass
/// points are left out of the fit. Throws DegenerateFit when every point is
/// zero and std::invalid_argument on size mismatch or fewer than 2 usable
/// points.
ConcentrationEstimate fit_concentration(std::span<const double> times,
                                        std::span<const double> mass,
                                        const ConcentrationOptions& options = {});
/// Same with times 1, 2, ..., mass.size().
ConcentrationEstimate fit_concentration(std::span<const double> mass,
                                        const ConcentrationOptions& options = {});

/// Prior-only constant from the concentration proof:
/// 2 max{ max_theta (1 - f(theta)) / f(theta), 2 (|Theta| - 1) }.
double concentration_alpha_from_prior(std::span<const double> prior);

struct Lemma3Row {
  double alpha = 0.0;
  long t = 0;
  int s = 0;
  int a = 0;
  double frequency = 0.0;
  double se = 0.0;
  std::size_t runs = 0;
  bool pass = false;
};

/// Empirical P(m~_t(s,a) < alpha n_t(s,a)) across seeds at each checkpoint.
/// `experiment` must have been built with the checkpoints of interest.
std::vector<Lemma3Row> lemma3_montecarlo(const PreparedExperiment& experiment,
                                         std::span<const double> alphas,
                                         std::span<const std::uint64_t> seeds, int jobs = 1);
/// Same table from finished runs.
std::vector<Lemma3Row> lemma3_table(const std::vector<SeedResult>& results,
                                    std::span<const double> alphas, int num_states,
                                    int num_actions);

/// H log T + 4 (H + 1) / (e^{-beta} - 1)^2.
double finite_regret_bound(double span_h, double beta, double horizon);

struct EpisodeBoundReport {
  int episodes = 0;
  double episode_bound = 0.0;
  double length_sum = 0.0;
  double length_sum_bound = 0.0;
  bool episodes_ok = false;
  bool length_sum_ok = false;
  bool ok() const { return episodes_ok && length_sum_ok; }
};

/// K_T <= sqrt(2T(1 + |S||A| log(T+1))) and
/// sum_k T_k / sqrt(t_k) <= 7 sqrt(2T)(1 + |S||A| log(T+1)) log sqrt(2T),
/// using executed episode lengths.
EpisodeBoundReport episode_bound_check(const EpisodeLog& log, int num_states, int num_actions,
                                       long horizon);

/// 2 sqrt((-1/beta) log(delta / (2 alpha))). Throws DomainError unless
/// 0 < delta < 2 alpha and beta > 0.
double k2_finite_formula(double beta, double alpha, double delta);

/// Constants of the concentration assumptions, recorded when known.
struct BoundParams {
  double span_h = 0.0;
  double k1 = 0.0;
  double k2 = 0.0;
  double delta = 0.0;
  double iota = 0.0;
};

nlohmann::json to_json(const SeparationReport& report);
nlohmann::json to_json(const ConcentrationEstimate& estimate);
nlohmann::json to_json(const EpisodeBoundReport& report);
nlohmann::json to_json(const Lemma3Row& row);
nlohmann::json to_json(const BoundParams& params);

}  // namespace psrl
