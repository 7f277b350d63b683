#include "psrl/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "psrl/errors.hpp"

namespace psrl {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void renormalize(JointPosterior& post) {
  double top = kNegInf;
  for (double lw : post.log_weights) top = std::max(top, lw);
  if (top == kNegInf) throw ZeroLikelihood("history impossible under every parameter");
  double total = 0.0;
  post.f.assign(post.log_weights.size(), 0.0);
  for (std::size_t i = 0; i < post.log_weights.size(); ++i) {
    if (post.log_weights[i] == kNegInf) continue;
    post.log_weights[i] -= top;
    post.f[i] = std::exp(post.log_weights[i]);
    total += post.f[i];
  }
  for (double& x : post.f) x /= total;
}

}  // namespace

ValidationReport validate_parameter_set(const FiniteParameterSet& params) {
  ValidationReport report;
  if (params.models.empty()) {
    report.fail("parameter set is empty");
    return report;
  }
  if (params.prior.size() != params.models.size()) report.fail("prior has wrong size");
  double sum = 0.0;
  for (double p : params.prior) {
    if (!(p >= 0.0)) report.fail("prior has a negative entry");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kConstructionTolerance) report.fail("prior does not sum to 1");

  const PomdpModel& ref = params.models.front();
  for (std::size_t i = 0; i < params.models.size(); ++i) {
    const PomdpModel& m = params.models[i];
    ValidationReport r = validate_model(m);
    for (auto& msg : r.failures) report.fail("parameter " + std::to_string(i) + ": " + msg);
    if (!r.ok) continue;
    if (m.num_states != ref.num_states || m.num_actions != ref.num_actions ||
        m.num_obs != ref.num_obs) {
      report.fail("parameter " + std::to_string(i) + ": dimensions differ");
      continue;
    }
    if (m.observation != ref.observation)
      report.fail("parameter " + std::to_string(i) + ": observation kernel differs");
    if (m.cost != ref.cost) report.fail("parameter " + std::to_string(i) + ": cost differs");
  }
  return report;
}

double JointPosterior::mass_excluding(int index) const {
  double m = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (static_cast<int>(i) != index) m += f[i];
  return m;
}

JointPosterior joint_init(const FiniteParameterSet& params, int o1) {
  JointPosterior post;
  const auto n = static_cast<std::size_t>(params.size());
  post.log_weights.assign(n, kNegInf);
  post.alive.assign(n, false);
  post.beliefs.resize(n);
  post.t = 1;
  for (std::size_t i = 0; i < n; ++i) {
    const PomdpModel& m = params.models[i];
    if (o1 < 0 || o1 >= m.num_obs) throw std::out_of_range("observation out of range");
    std::vector<double> w(static_cast<std::size_t>(m.num_states));
    double like = 0.0;
    for (int s = 0; s < m.num_states; ++s) {
      w[static_cast<std::size_t>(s)] = m.obs(s, o1) * m.initial_belief[static_cast<std::size_t>(s)];
      like += w[static_cast<std::size_t>(s)];
    }
    if (like > 0.0 && params.prior[i] > 0.0) {
      post.alive[i] = true;
      post.log_weights[i] = std::log(like) + std::log(params.prior[i]);
      post.beliefs[i] = BeliefVector::normalized(std::move(w));
    } else {
      post.beliefs[i] = BeliefVector(m.initial_belief);
    }
  }
  renormalize(post);
  return post;
}

JointPosterior joint_update(JointPosterior post, const FiniteParameterSet& params, int a,
                            int o) {
  for (std::size_t i = 0; i < post.beliefs.size(); ++i) {
    if (!post.alive[i]) continue;
    const PomdpModel& m = params.models[i];
    FilterStep step = filter_step(m, post.beliefs[i].probs(), a, o);
    if (step.normalizer > 0.0) {
      post.log_weights[i] += std::log(step.normalizer);
      post.beliefs[i] = BeliefVector::normalized(std::move(step.weights));
    } else {
      post.alive[i] = false;
      post.log_weights[i] = kNegInf;
    }
  }
  renormalize(post);
  ++post.t;
  return post;
}

int sample_parameter(const JointPosterior& post, Rng& rng) { return rng.categorical(post.f); }

int sample_parameter(const JointPosterior& post, std::uint64_t seed) {
  Rng rng(seed);
  return sample_parameter(post, rng);
}

int map_estimate(const JointPosterior& post) {
  int best = 0;
  for (std::size_t i = 1; i < post.f.size(); ++i)
    if (post.f[i] > post.f[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  return best;
}

DirichletPosterior DirichletPosterior::uniform(int num_states, int num_actions,
                                               double prior_strength) {
  if (num_states <= 0 || num_actions <= 0 || !(prior_strength > 0.0))
    throw std::invalid_argument("Dirichlet posterior needs positive sizes and strength");
  DirichletPosterior post;
  post.num_states = num_states;
  post.num_actions = num_actions;
  post.prior_strength = prior_strength;
  post.counts.assign(static_cast<std::size_t>(num_states * num_states * num_actions),
                     prior_strength);
  return post;
}

DirichletPosterior dirichlet_update(DirichletPosterior post, int s, int a, int next) {
  if (s < 0 || s >= post.num_states || next < 0 || next >= post.num_states || a < 0 ||
      a >= post.num_actions)
    throw std::out_of_range("Dirichlet update index out of range");
  post.counts[static_cast<std::size_t>(next + post.num_states * (s + post.num_states * a))] += 1.0;
  return post;
}

std::vector<double> dirichlet_mean(const DirichletPosterior& post) {
  std::vector<double> mean(post.counts.size());
  const auto S = static_cast<std::size_t>(post.num_states);
  for (std::size_t row = 0; row < post.counts.size(); row += S) {
    double total = 0.0;
    for (std::size_t j = 0; j < S; ++j) total += post.counts[row + j];
    for (std::size_t j = 0; j < S; ++j) mean[row + j] = post.counts[row + j] / total;
  }
  return mean;
}

std::vector<double> dirichlet_sample(const DirichletPosterior& post, Rng& rng) {
  std::vector<double> theta(post.counts.size());
  const auto S = static_cast<std::size_t>(post.num_states);
  for (std::size_t row = 0; row < post.counts.size(); row += S) {
    double total = 0.0;
    for (std::size_t j = 0; j < S; ++j) {
      theta[row + j] = rng.gamma(post.counts[row + j]);
      total += theta[row + j];
    }
    if (total > 0.0) {
      for (std::size_t j = 0; j < S; ++j) theta[row + j] /= total;
    } else {
      // Every gamma draw underflowed (all concentrations tiny): fall back to
      // the largest concentration.
      std::size_t best = 0;
      for (std::size_t j = 1; j < S; ++j)
        if (post.counts[row + j] > post.counts[row + best]) best = j;
      for (std::size_t j = 0; j < S; ++j) theta[row + j] = j == best ? 1.0 : 0.0;
    }
  }
  return theta;
}

std::vector<double> dirichlet_sample(const DirichletPosterior& post, std::uint64_t seed) {
  Rng rng(seed);
  return dirichlet_sample(post, rng);
}

}  // namespace psrl
