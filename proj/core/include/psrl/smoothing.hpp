#pragma once

#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "psrl/posterior.hpp"

namespace psrl {

/// Posterior state marginals P(s_tau = s | o_{1:L}, a_{1:L-1}) mixed over Theta.
struct SmoothedMarginals {
  /// marginals[tau][s], tau = 0 .. L-1 (time steps 1 .. L).
  std::vector<std::vector<double>> marginals;
  /// Mixture weights: the parameter posterior given the same observations.
  std::vector<double> weights;
};

/// Exact fixed-interval smoothing of the hidden chain. `observations` holds
/// o_1..o_L; `actions` must hold at least a_1..a_{L-1}. For every candidate
/// kernel a scaled forward-backward pass runs; the forward normalizers give
/// each candidate's likelihood, and the per-candidate marginals are mixed with
/// the resulting posterior weights. Throws ZeroLikelihood when the history is
/// impossible under every candidate.
SmoothedMarginals smooth_state_marginals(const FiniteParameterSet& params,
                                         std::span<const int> actions,
                                         std::span<const int> observations);

/// n~(s, a) = sum_tau P(s_tau = s | history) 1(a_tau = a) over the marginals
/// provided. Layout [a + A * s].
std::vector<double> expected_counts(const std::vector<std::vector<double>>& marginals,
                                    std::span<const int> actions, int num_states,
                                    int num_actions);

enum class PseudoCountPolicy { Time, MaxCeil, TrueCount };

std::string_view to_string(PseudoCountPolicy policy);
PseudoCountPolicy pseudo_count_policy_from_string(std::string_view name);

/// Agent-side count bookkeeping: expected visit counts n~_t and pseudo-counts
/// m~_t, both in [a + A * s] layout.
struct CountTracker {
  PseudoCountPolicy policy = PseudoCountPolicy::Time;
  int num_states = 0;
  int num_actions = 0;
  int t = 0;
  std::vector<double> expected;
  std::vector<long long> pseudo;

  static CountTracker make(PseudoCountPolicy policy, int num_states, int num_actions);

  long long pseudo_count(int s, int a) const {
    return pseudo[static_cast<std::size_t>(a + num_actions * s)];
  }
};

/// Moves the tracker from step t-1 to step t given n~_t (for TrueCount, the
/// observed visit counts n_t). Throws InvariantViolation when ceil(n~_t) > t,
/// when TrueCount receives non-integer or decreasing counts, or when the
/// pseudo-counts would decrease.
CountTracker advance_pseudo_counts(CountTracker tracker, std::span<const double> expected);

/// ceil with a small downward nudge so 3.0000000001 maps to 3.
long long nudged_ceil(double x);

/// CSV rows `s,a,n,n_tilde,m_tilde`; `true_counts` may be empty.
void write_count_csv(std::ostream& out, const CountTracker& tracker,
                     std::span<const long long> true_counts);

}  // namespace psrl
