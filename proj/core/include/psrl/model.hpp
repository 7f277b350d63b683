#pragma once

#include <span>
#include <string>
#include <vector>

namespace psrl {

inline constexpr double kConstructionTolerance = 1e-12;
inline constexpr double kArithmeticTolerance = 1e-10;

/// Tabular POMDP (S, A, theta, C, O, eta) with a prior over the first state.
///
/// Storage is dense and row-major:
///   transition[s' + S * (s + S * a)] = theta(s' | s, a)
///   observation[o + O * s]           = eta(o | s)
///   cost[a + A * s]                  = C(s, a)
struct PomdpModel {
  int num_states = 0;
  int num_actions = 0;
  int num_obs = 0;
  std::vector<double> transition;
  std::vector<double> observation;
  std::vector<double> cost;
  std::vector<double> initial_belief;

  double trans(int s, int a, int next) const {
    return transition[static_cast<std::size_t>(next + num_states * (s + num_states * a))];
  }
  double obs(int s, int o) const {
    return observation[static_cast<std::size_t>(o + num_obs * s)];
  }
  double c(int s, int a) const { return cost[static_cast<std::size_t>(a + num_actions * s)]; }

  std::span<const double> transition_row(int s, int a) const {
    return {transition.data() + num_states * (s + num_states * a),
            static_cast<std::size_t>(num_states)};
  }

  /// True when eta is the identity map (O = S, o = s).
  bool perfect_observation() const;
};

struct ValidationReport {
  bool ok = true;
  std::vector<std::string> failures;

  void fail(std::string message) {
    ok = false;
    failures.push_back(std::move(message));
  }
};

ValidationReport validate_model(const PomdpModel& model);

/// A probability vector over states.
class BeliefVector {
 public:
  BeliefVector() = default;

  /// Throws std::invalid_argument unless `probs` is a distribution within
  /// kArithmeticTolerance.
  explicit BeliefVector(std::vector<double> probs);

  /// Normalizes non-negative weights with a positive sum.
  static BeliefVector normalized(std::vector<double> weights);

  static BeliefVector indicator(int num_states, int s);

  std::span<const double> probs() const { return probs_; }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::size_t size() const { return probs_.size(); }

  friend bool operator==(const BeliefVector&, const BeliefVector&) = default;

 private:
  std::vector<double> probs_;
};

/// One unnormalized filtering step: weights(s') = eta(o|s') sum_s theta(s'|s,a) b(s)
/// and their sum, which is the predictive probability P(o | b, a; theta).
struct FilterStep {
  std::vector<double> weights;
  double normalizer = 0.0;
};

FilterStep filter_step(const PomdpModel& model, std::span<const double> b, int action,
                       int observation);

/// h_{t+1} = tau(h_t, a, o; theta). Throws ZeroLikelihood when o is impossible.
BeliefVector belief_update(const PomdpModel& model, const BeliefVector& b, int action,
                           int observation);

/// h_1(s) proportional to eta(o_1|s) h(s). Throws ZeroLikelihood when o_1 is impossible.
BeliefVector initial_belief_update(const PomdpModel& model, int first_observation);

/// c(b, a) = sum_s C(s, a) b(s).
double expected_cost(const PomdpModel& model, std::span<const double> b, int action);

/// P(o | b, a; theta) for every o.
std::vector<double> obs_predictive(const PomdpModel& model, std::span<const double> b,
                                   int action);

}  // namespace psrl
