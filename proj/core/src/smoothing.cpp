#include "psrl/smoothing.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include "psrl/errors.hpp"

namespace psrl {
namespace {

constexpr double kCeilNudge = 1e-9;

struct ForwardBackward {
  bool possible = false;
  double log_likelihood = 0.0;
  std::vector<std::vector<double>> marginals;
};

ForwardBackward run_forward_backward(const PomdpModel& m, std::span<const int> actions,
                                     std::span<const int> obs) {
  ForwardBackward out;
  const std::size_t L = obs.size();
  const auto S = static_cast<std::size_t>(m.num_states);
  std::vector<std::vector<double>> alpha(L, std::vector<double>(S));
  std::vector<double> scale(L);

  double c = 0.0;
  for (std::size_t s = 0; s < S; ++s) {
    alpha[0][s] = m.obs(static_cast<int>(s), obs[0]) * m.initial_belief[s];
    c += alpha[0][s];
  }
  if (!(c > 0.0)) return out;
  for (double& x : alpha[0]) x /= c;
  scale[0] = c;
  out.log_likelihood = std::log(c);

  for (std::size_t tau = 1; tau < L; ++tau) {
    FilterStep step = filter_step(m, alpha[tau - 1], actions[tau - 1], obs[tau]);
    if (!(step.normalizer > 0.0)) return out;
    for (std::size_t s = 0; s < S; ++s) alpha[tau][s] = step.weights[s] / step.normalizer;
    scale[tau] = step.normalizer;
    out.log_likelihood += std::log(step.normalizer);
  }

  std::vector<double> beta(S, 1.0);
  std::vector<double> next_beta(S);
  out.marginals.assign(L, std::vector<double>(S));
  for (std::size_t tau = L; tau-- > 0;) {
    double total = 0.0;
    for (std::size_t s = 0; s < S; ++s) {
      out.marginals[tau][s] = alpha[tau][s] * beta[s];
      total += out.marginals[tau][s];
    }
    for (double& x : out.marginals[tau]) x /= total;
    if (tau == 0) break;
    const int a = actions[tau - 1];
    const int o = obs[tau];
    for (std::size_t s = 0; s < S; ++s) {
      const auto row = m.transition_row(static_cast<int>(s), a);
      double acc = 0.0;
      for (std::size_t sp = 0; sp < S; ++sp)
        acc += row[sp] * m.obs(static_cast<int>(sp), o) * beta[sp];
      next_beta[s] = acc / scale[tau];
    }
    beta.swap(next_beta);
  }
  out.possible = true;
  return out;
}

}  // namespace

SmoothedMarginals smooth_state_marginals(const FiniteParameterSet& params,
                                         std::span<const int> actions,
                                         std::span<const int> observations) {
  const std::size_t L = observations.size();
  if (L > 0 && actions.size() + 1 < L)
    throw std::invalid_argument("smoothing: need at least L-1 actions for L observations");

  SmoothedMarginals out;
  const auto n = static_cast<std::size_t>(params.size());
  const auto S = static_cast<std::size_t>(params.num_states());
  if (L == 0) {
    out.weights = params.prior;
    return out;
  }

  std::vector<ForwardBackward> runs;
  runs.reserve(n);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    if (params.prior[i] > 0.0) {
      runs.push_back(run_forward_backward(params.models[i], actions, observations));
      if (runs.back().possible)
        top = std::max(top, runs.back().log_likelihood + std::log(params.prior[i]));
    } else {
      runs.emplace_back();
    }
  }
  if (top == -std::numeric_limits<double>::infinity())
    throw ZeroLikelihood("smoothing: history impossible under every parameter");

  out.weights.assign(n, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!runs[i].possible) continue;
    out.weights[i] = std::exp(runs[i].log_likelihood + std::log(params.prior[i]) - top);
    total += out.weights[i];
  }
  for (double& w : out.weights) w /= total;

  out.marginals.assign(L, std::vector<double>(S, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    if (out.weights[i] == 0.0) continue;
    for (std::size_t tau = 0; tau < L; ++tau)
      for (std::size_t s = 0; s < S; ++s)
        out.marginals[tau][s] += out.weights[i] * runs[i].marginals[tau][s];
  }
  return out;
}

std::vector<double> expected_counts(const std::vector<std::vector<double>>& marginals,
                                    std::span<const int> actions, int num_states,
                                    int num_actions) {
  if (actions.size() < marginals.size())
    throw std::invalid_argument("expected_counts: fewer actions than marginals");
  std::vector<double> counts(static_cast<std::size_t>(num_states * num_actions), 0.0);
  for (std::size_t tau = 0; tau < marginals.size(); ++tau) {
    const int a = actions[tau];
    for (int s = 0; s < num_states; ++s)
      counts[static_cast<std::size_t>(a + num_actions * s)] += marginals[tau][static_cast<std::size_t>(s)];
  }
  return counts;
}

std::string_view to_string(PseudoCountPolicy policy) {
  switch (policy) {
    case PseudoCountPolicy::Time: return "time";
    case PseudoCountPolicy::MaxCeil: return "max_ceil";
    case PseudoCountPolicy::TrueCount: return "true_count";
  }
  return "unknown";
}

PseudoCountPolicy pseudo_count_policy_from_string(std::string_view name) {
  if (name == "time") return PseudoCountPolicy::Time;
  if (name == "max_ceil") return PseudoCountPolicy::MaxCeil;
  if (name == "true_count") return PseudoCountPolicy::TrueCount;
  throw ConfigError("unknown pseudo-count policy '" + std::string(name) + "'");
}

CountTracker CountTracker::make(PseudoCountPolicy policy, int num_states, int num_actions) {
  CountTracker tracker;
  tracker.policy = policy;
  tracker.num_states = num_states;
  tracker.num_actions = num_actions;
  tracker.expected.assign(static_cast<std::size_t>(num_states * num_actions), 0.0);
  tracker.pseudo.assign(static_cast<std::size_t>(num_states * num_actions), 0);
  return tracker;
}

long long nudged_ceil(double x) { return static_cast<long long>(std::ceil(x - kCeilNudge)); }

CountTracker advance_pseudo_counts(CountTracker tracker, std::span<const double> expected) {
  if (expected.size() != tracker.pseudo.size())
    throw std::invalid_argument("advance_pseudo_counts: size mismatch");
  ++tracker.t;
  const long long t = tracker.t;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const long long ceiled = nudged_ceil(expected[i]);
    if (ceiled > t)
      throw InvariantViolation("ceil(n~) = " + std::to_string(ceiled) + " exceeds t = " +
                               std::to_string(t));
    long long next = 0;
    switch (tracker.policy) {
      case PseudoCountPolicy::Time:
        next = t;
        break;
      case PseudoCountPolicy::MaxCeil:
        next = std::max(tracker.pseudo[i], ceiled);
        break;
      case PseudoCountPolicy::TrueCount: {
        next = std::llround(expected[i]);
        if (std::abs(expected[i] - static_cast<double>(next)) > kCeilNudge)
          throw InvariantViolation("true counts must be integers");
        break;
      }
    }
    if (next < tracker.pseudo[i]) throw InvariantViolation("pseudo-count decreased");
    tracker.pseudo[i] = next;
  }
  tracker.expected.assign(expected.begin(), expected.end());
  return tracker;
}

void write_count_csv(std::ostream& out, const CountTracker& tracker,
                     std::span<const long long> true_counts) {
  out << "s,a,n,n_tilde,m_tilde\n";
  for (int s = 0; s < tracker.num_states; ++s)
    for (int a = 0; a < tracker.num_actions; ++a) {
      const auto i = static_cast<std::size_t>(a + tracker.num_actions * s);
      out << s << ',' << a << ',';
      if (!true_counts.empty()) out << true_counts[i];
      out << ',' << tracker.expected[i] << ',' << tracker.pseudo[i] << '\n';
    }
}

}  // namespace psrl
