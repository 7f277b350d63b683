#include "psrl/model.hpp"

#include <cmath>
#include <stdexcept>

#include "psrl/errors.hpp"

namespace psrl {
namespace {

bool is_distribution(std::span<const double> p, double tol) {
  double sum = 0.0;
  for (double x : p) {
    if (!(x >= 0.0) || !std::isfinite(x)) return false;
    sum += x;
  }
  return std::abs(sum - 1.0) <= tol;
}

std::vector<double> predict(const PomdpModel& m, std::span<const double> b, int a) {
  std::vector<double> next(static_cast<std::size_t>(m.num_states), 0.0);
  for (int s = 0; s < m.num_states; ++s) {
    const double bs = b[static_cast<std::size_t>(s)];
    if (bs == 0.0) continue;
    const auto row = m.transition_row(s, a);
    for (int sp = 0; sp < m.num_states; ++sp) next[static_cast<std::size_t>(sp)] += row[static_cast<std::size_t>(sp)] * bs;
  }
  return next;
}

}  // namespace

bool PomdpModel::perfect_observation() const {
  if (num_obs != num_states) return false;
  for (int s = 0; s < num_states; ++s)
    for (int o = 0; o < num_obs; ++o)
      if (obs(s, o) != (s == o ? 1.0 : 0.0)) return false;
  return true;
}

ValidationReport validate_model(const PomdpModel& m) {
  ValidationReport report;
  if (m.num_states <= 0) report.fail("num_states must be positive");
  if (m.num_actions <= 0) report.fail("num_actions must be positive");
  if (m.num_obs <= 0) report.fail("num_obs must be positive");
  if (!report.ok) return report;

  const auto S = static_cast<std::size_t>(m.num_states);
  const auto A = static_cast<std::size_t>(m.num_actions);
  const auto O = static_cast<std::size_t>(m.num_obs);
  if (m.transition.size() != S * S * A) report.fail("transition has wrong size");
  if (m.observation.size() != S * O) report.fail("observation has wrong size");
  if (m.cost.size() != S * A) report.fail("cost has wrong size");
  if (m.initial_belief.size() != S) report.fail("initial_belief has wrong size");
  if (!report.ok) return report;

  for (int a = 0; a < m.num_actions; ++a)
    for (int s = 0; s < m.num_states; ++s)
      if (!is_distribution(m.transition_row(s, a), kConstructionTolerance))
        report.fail("transition row not stochastic (s=" + std::to_string(s) +
                    ", a=" + std::to_string(a) + ")");

  for (int s = 0; s < m.num_states; ++s) {
    std::span<const double> row(m.observation.data() + O * static_cast<std::size_t>(s), O);
    if (!is_distribution(row, kConstructionTolerance))
      report.fail("observation row not stochastic (s=" + std::to_string(s) + ")");
  }

  for (int s = 0; s < m.num_states; ++s)
    for (int a = 0; a < m.num_actions; ++a) {
      const double c = m.c(s, a);
      if (!(c >= 0.0 && c <= 1.0))
        report.fail("cost out of range (s=" + std::to_string(s) + ", a=" + std::to_string(a) +
                    ")");
    }

  if (!is_distribution(m.initial_belief, kConstructionTolerance))
    report.fail("initial_belief not a distribution");
  return report;
}

BeliefVector::BeliefVector(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty() || !is_distribution(probs_, kArithmeticTolerance))
    throw std::invalid_argument("belief is not a probability vector");
}

BeliefVector BeliefVector::normalized(std::vector<double> weights) {
  double sum = 0.0;
  for (double w : weights) sum += w;
  if (!(sum > 0.0)) throw std::invalid_argument("cannot normalize zero weights");
  for (double& w : weights) w /= sum;
  BeliefVector b;
  b.probs_ = std::move(weights);
  return b;
}

BeliefVector BeliefVector::indicator(int num_states, int s) {
  std::vector<double> p(static_cast<std::size_t>(num_states), 0.0);
  p.at(static_cast<std::size_t>(s)) = 1.0;
  BeliefVector b;
  b.probs_ = std::move(p);
  return b;
}

FilterStep filter_step(const PomdpModel& m, std::span<const double> b, int a, int o) {
  FilterStep step;
  step.weights = predict(m, b, a);
  for (int sp = 0; sp < m.num_states; ++sp) {
    double& w = step.weights[static_cast<std::size_t>(sp)];
    w *= m.obs(sp, o);
    step.normalizer += w;
  }
  return step;
}

BeliefVector belief_update(const PomdpModel& m, const BeliefVector& b, int a, int o) {
  if (a < 0 || a >= m.num_actions) throw std::out_of_range("action out of range");
  if (o < 0 || o >= m.num_obs) throw std::out_of_range("observation out of range");
  FilterStep step = filter_step(m, b.probs(), a, o);
  if (!(step.normalizer > 0.0))
    throw ZeroLikelihood("observation " + std::to_string(o) + " impossible after action " +
                         std::to_string(a));
  return BeliefVector::normalized(std::move(step.weights));
}

BeliefVector initial_belief_update(const PomdpModel& m, int o1) {
  if (o1 < 0 || o1 >= m.num_obs) throw std::out_of_range("observation out of range");
  std::vector<double> w(static_cast<std::size_t>(m.num_states));
  double sum = 0.0;
  for (int s = 0; s < m.num_states; ++s) {
    w[static_cast<std::size_t>(s)] = m.obs(s, o1) * m.initial_belief[static_cast<std::size_t>(s)];
    sum += w[static_cast<std::size_t>(s)];
  }
  if (!(sum > 0.0))
    throw ZeroLikelihood("first observation " + std::to_string(o1) + " impossible");
  return BeliefVector::normalized(std::move(w));
}

double expected_cost(const PomdpModel& m, std::span<const double> b, int a) {
  double c = 0.0;
  for (int s = 0; s < m.num_states; ++s) c += m.c(s, a) * b[static_cast<std::size_t>(s)];
  return c;
}

std::vector<double> obs_predictive(const PomdpModel& m, std::span<const double> b, int a) {
  const std::vector<double> next = predict(m, b, a);
  std::vector<double> p(static_cast<std::size_t>(m.num_obs), 0.0);
  for (int o = 0; o < m.num_obs; ++o) {
    double acc = 0.0;
    for (int sp = 0; sp < m.num_states; ++sp) acc += m.obs(sp, o) * next[static_cast<std::size_t>(sp)];
    p[static_cast<std::size_t>(o)] = acc;
  }
  return p;
}

}  // namespace psrl
