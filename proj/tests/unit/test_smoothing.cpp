#include <doctest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "psrl/errors.hpp"
#include "psrl/model_io.hpp"
#include "psrl/smoothing.hpp"
#include "support.hpp"

using namespace psrl;

TEST_CASE("smoothing under perfect observation gives indicator marginals and exact counts") {
  Rng rng(4);
  FiniteParameterSet params;
  params.models.push_back(support::perfect_observation_model(rng, 3, 2));
  params.models.push_back(support::perfect_observation_model(rng, 3, 2));
  params.models[1].cost = params.models[0].cost;
  params.models[1].initial_belief = params.models[0].initial_belief;
  params.prior = {0.5, 0.5};
  std::vector<int> states{1}, acts;
  for (int t = 0; t < 9; ++t) {
    acts.push_back(t % 2);
    states.push_back(rng.categorical(params[0].transition_row(states.back(), acts.back())));
  }
  const auto sm = smooth_state_marginals(params, acts, states);
  for (std::size_t tau = 0; tau < states.size(); ++tau)
    for (int s = 0; s < 3; ++s)
      CHECK(sm.marginals[tau][static_cast<std::size_t>(s)] == (s == states[tau] ? 1.0 : 0.0));
  CHECK_THROWS_AS(expected_counts(sm.marginals, acts, 3, 2), std::invalid_argument);
  std::vector<double> direct(6, 0.0);
  for (std::size_t tau = 0; tau + 1 < states.size(); ++tau)
    direct[static_cast<std::size_t>(acts[tau] + 2 * states[tau])] += 1.0;
  // marginals cover all observed states, counts only those with an action.
  const auto n_prefix = expected_counts(
      std::vector<std::vector<double>>(sm.marginals.begin(), sm.marginals.end() - 1), acts, 3, 2);
  CHECK(n_prefix == direct);
}

TEST_CASE("no information: marginals equal the initial belief") {
  auto params = load_parameter_set(support::fixture("singleton.json"));
  params.models[0].observation = {0.5, 0.5, 0.5, 0.5};
  params.models[0].transition = {1, 0, 0, 1, 1, 0, 0, 1};
  params.models[0].initial_belief = {0.3, 0.7};
  const std::vector<int> obs{0, 1, 1, 0}, acts{0, 1, 0};
  const auto sm = smooth_state_marginals(params, acts, obs);
  for (const auto& row : sm.marginals) {
    CHECK(row[0] == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(row[1] == doctest::Approx(0.7).epsilon(1e-14));
  }
}

TEST_CASE("smoothed marginals match path enumeration") {
  Rng rng(99);
  for (int trial = 0; trial < 40; ++trial) {
    const int S = 2 + trial % 2;
    const int L = 2 + trial % 6;
    const auto params = support::random_parameter_set(rng, 2, S, 2, 2);
    std::vector<int> obs, acts;
    for (int t = 0; t < L; ++t) obs.push_back(static_cast<int>(rng.uniform() * 2));
    for (int t = 0; t + 1 < L; ++t) acts.push_back(static_cast<int>(rng.uniform() * 2));
    const auto sm = smooth_state_marginals(params, acts, obs);
    const auto ref = oracle::smoothed_marginals(params, obs, acts);
    const auto w = oracle::parameter_posterior(params, obs, acts);
    for (int i = 0; i < 2; ++i)
      CHECK(std::abs(sm.weights[static_cast<std::size_t>(i)] - w[static_cast<std::size_t>(i)]) <= 1e-10);
    for (int tau = 0; tau < L; ++tau) {
      double z = 0.0;
      for (int s = 0; s < S; ++s) {
        const double x = sm.marginals[static_cast<std::size_t>(tau)][static_cast<std::size_t>(s)];
        z += x;
        CHECK(std::abs(x - ref[static_cast<std::size_t>(tau)][static_cast<std::size_t>(s)]) <= 1e-8);
      }
      CHECK(std::abs(z - 1.0) <= 1e-8);
    }
  }
}

TEST_CASE("smoothing mixture weights agree with joint_update") {
  const auto params = load_parameter_set(support::fixture("separated_pair.json"));
  const std::vector<int> obs{0, 1, 1, 0, 0, 1, 0}, acts{1, 0, 0, 1, 1, 0};
  auto post = joint_init(params, obs[0]);
  for (std::size_t t = 0; t < acts.size(); ++t) post = joint_update(post, params, acts[t], obs[t + 1]);
  const auto sm = smooth_state_marginals(params, acts, obs);
  CHECK(sm.weights[0] == doctest::Approx(post.f[0]).epsilon(1e-12));
  // last marginal is the filtered mixture
  for (int s = 0; s < 2; ++s) {
    const double filt = post.f[0] * post.beliefs[0][static_cast<std::size_t>(s)] +
                        post.f[1] * post.beliefs[1][static_cast<std::size_t>(s)];
    CHECK(sm.marginals.back()[static_cast<std::size_t>(s)] == doctest::Approx(filt).epsilon(1e-12));
  }
}

TEST_CASE("expected counts: t = 1 is zero, totals equal t - 1, hand-summed example") {
  const auto params = load_parameter_set(support::fixture("separated_pair.json"));
  const std::vector<int> none;
  const auto zero = expected_counts({}, none, 2, 2);
  CHECK(zero == std::vector<double>(4, 0.0));

  const std::vector<int> obs{0, 1, 0, 1}, acts{0, 1, 1};
  // n~_4 uses the marginals of tau = 1..3 given o_{1:3}
  const std::vector<int> o3(obs.begin(), obs.begin() + 3);
  const auto ref = oracle::smoothed_marginals(params, o3, std::span<const int>(acts).first(2));
  const auto sm = smooth_state_marginals(params, acts, o3);
  const auto n = expected_counts(sm.marginals, acts, 2, 2);
  std::vector<double> hand(4, 0.0);
  for (int tau = 0; tau < 3; ++tau)
    for (int s = 0; s < 2; ++s)
      hand[static_cast<std::size_t>(acts[static_cast<std::size_t>(tau)] + 2 * s)] +=
          ref[static_cast<std::size_t>(tau)][static_cast<std::size_t>(s)];
  double total = 0.0;
  for (int i = 0; i < 4; ++i) {
    CHECK(std::abs(n[static_cast<std::size_t>(i)] - hand[static_cast<std::size_t>(i)]) <= 1e-10);
    total += n[static_cast<std::size_t>(i)];
  }
  CHECK(total == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("smoothing throws when every candidate rules out the history") {
  auto params = load_parameter_set(support::fixture("singleton.json"));
  params.models[0].observation = {1.0, 0.0, 1.0, 0.0};
  const std::vector<int> obs{0, 1}, acts{0};
  CHECK_THROWS_AS(smooth_state_marginals(params, acts, obs), ZeroLikelihood);
}

TEST_CASE("advance_pseudo_counts policies") {
  auto time = CountTracker::make(PseudoCountPolicy::Time, 2, 2);
  for (int t = 0; t < 7; ++t) time = advance_pseudo_counts(time, std::vector<double>(4, 0.0));
  for (auto m : time.pseudo) CHECK(m == 7);

  auto mc = CountTracker::make(PseudoCountPolicy::MaxCeil, 1, 1);
  for (int t = 0; t < 4; ++t) mc = advance_pseudo_counts(mc, std::vector<double>{0.0});
  mc.pseudo[0] = 3;
  auto kept = advance_pseudo_counts(mc, std::vector<double>{2.3});
  CHECK(kept.pseudo[0] == 3);
  auto raised = advance_pseudo_counts(mc, std::vector<double>{3.01});
  CHECK(raised.pseudo[0] == 4);
  auto nudged = advance_pseudo_counts(mc, std::vector<double>{3.0000000001});
  CHECK(nudged.pseudo[0] == 3);

  auto bad = CountTracker::make(PseudoCountPolicy::MaxCeil, 1, 1);
  CHECK_THROWS_AS(advance_pseudo_counts(bad, std::vector<double>{1.5}), InvariantViolation);

  auto tc = CountTracker::make(PseudoCountPolicy::TrueCount, 1, 2);
  tc = advance_pseudo_counts(tc, std::vector<double>{0.0, 0.0});
  tc = advance_pseudo_counts(tc, std::vector<double>{1.0, 0.0});
  CHECK(tc.pseudo == std::vector<long long>{1, 0});
  CHECK_THROWS_AS(advance_pseudo_counts(tc, std::vector<double>{1.5, 0.0}), InvariantViolation);
  CHECK_THROWS_AS(advance_pseudo_counts(tc, std::vector<double>{0.0, 0.0}), InvariantViolation);
}

TEST_CASE("MAX_CEIL tracker along a smoothed history keeps its invariants") {
  const auto params = load_parameter_set(support::fixture("separated_pair.json"));
  Rng rng(31);
  std::vector<int> obs{0}, acts;
  auto tracker = CountTracker::make(PseudoCountPolicy::MaxCeil, 2, 2);
  tracker = advance_pseudo_counts(tracker, std::vector<double>(4, 0.0));
  for (int t = 1; t < 60; ++t) {
    acts.push_back(static_cast<int>(rng.uniform() * 2));
    const auto sm = smooth_state_marginals(params, acts, obs);
    const auto n = expected_counts(sm.marginals, acts, 2, 2);
    const auto before = tracker.pseudo;
    tracker = advance_pseudo_counts(tracker, n);
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(tracker.pseudo[i] >= before[i]);
      CHECK(tracker.pseudo[i] >= nudged_ceil(n[i]));
      CHECK(tracker.pseudo[i] <= tracker.t);
    }
    obs.push_back(static_cast<int>(rng.uniform() * 2));
  }
}

TEST_CASE("expected counts track true counts in expectation") {
  // E[n_t] = E[n~_t] over trajectories simulated from the Bayesian model.
  const auto params = load_parameter_set(support::fixture("separated_pair.json"));
  const int seeds = 600, horizon = 12;
  std::vector<double> diff;
  for (int k = 0; k < seeds; ++k) {
    Rng rng(mix_seed(5, static_cast<std::uint64_t>(k)));
    const int star = rng.categorical(params.prior);
    const auto& m = params[star];
    int s = rng.categorical(m.initial_belief);
    std::vector<int> obs{rng.categorical(std::span<const double>(m.observation.data() + 2 * s, 2))};
    std::vector<int> acts;
    double n00 = 0.0;
    for (int t = 1; t < horizon; ++t) {
      const int a = static_cast<int>(rng.uniform() * 2);
      acts.push_back(a);
      n00 += (s == 0 && a == 0);
      s = rng.categorical(m.transition_row(s, a));
      obs.push_back(rng.categorical(std::span<const double>(m.observation.data() + 2 * s, 2)));
    }
    // n~_{horizon} conditions on o_{1:horizon-1}, a_{1:horizon-1}
    const std::vector<int> o_prefix(obs.begin(), obs.end() - 1);
    const auto sm = smooth_state_marginals(params, acts, o_prefix);
    const auto n = expected_counts(sm.marginals, acts, 2, 2);
    diff.push_back(n00 - n[0]);
  }
  double mean = 0.0, sq = 0.0;
  for (double d : diff) mean += d;
  mean /= seeds;
  for (double d : diff) sq += (d - mean) * (d - mean);
  const double se = std::sqrt(sq / (seeds - 1) / seeds);
  CHECK(std::abs(mean) <= 3.0 * se);
}

TEST_CASE("count CSV and policy names") {
  auto tracker = CountTracker::make(PseudoCountPolicy::MaxCeil, 1, 2);
  tracker = advance_pseudo_counts(tracker, std::vector<double>{0.0, 0.0});
  std::ostringstream out;
  const long long n[] = {0, 0};
  write_count_csv(out, tracker, n);
  CHECK(out.str().rfind("s,a,n,n_tilde,m_tilde\n", 0) == 0);
  CHECK(pseudo_count_policy_from_string("max_ceil") == PseudoCountPolicy::MaxCeil);
  CHECK(to_string(PseudoCountPolicy::TrueCount) == "true_count");
}
