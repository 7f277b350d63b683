#pragma once

#include <cstdint>
#include <vector>

#include "psrl/model.hpp"
#include "psrl/random.hpp"

namespace psrl {

/// A finite candidate set Theta with prior f. Candidates share dimensions,
/// eta and C; each carries its own transition kernel and may carry its own
/// initial-state prior h(.; theta).
struct FiniteParameterSet {
  std::vector<PomdpModel> models;
  std::vector<double> prior;

  int size() const { return static_cast<int>(models.size()); }
  const PomdpModel& operator[](int i) const { return models[static_cast<std::size_t>(i)]; }
  int num_states() const { return models.front().num_states; }
  int num_actions() const { return models.front().num_actions; }
  int num_obs() const { return models.front().num_obs; }
};

ValidationReport validate_parameter_set(const FiniteParameterSet& params);

/// Joint posterior (f_t, {h_t(.; theta)}). The parameter posterior is carried
/// as unnormalized log weights so that long products of likelihoods never
/// underflow; `f` is the normalized view. Parameters whose likelihood hit zero
/// are marked dead and keep their last belief as a placeholder.
struct JointPosterior {
  std::vector<double> log_weights;
  std::vector<double> f;
  std::vector<BeliefVector> beliefs;
  std::vector<bool> alive;
  int t = 0;

  /// 1 - f(index), summed over the other parameters to keep precision.
  double mass_excluding(int index) const;
};

JointPosterior joint_init(const FiniteParameterSet& params, int first_observation);

JointPosterior joint_update(JointPosterior post, const FiniteParameterSet& params, int action,
                            int next_observation);

int sample_parameter(const JointPosterior& post, Rng& rng);
int sample_parameter(const JointPosterior& post, std::uint64_t seed);

/// argmax f; ties go to the lowest index.
int map_estimate(const JointPosterior& post);

/// Conjugate posterior over a tabular kernel: one Dirichlet per (s, a) row.
/// counts use the transition layout [s' + S * (s + S * a)].
struct DirichletPosterior {
  int num_states = 0;
  int num_actions = 0;
  std::vector<double> counts;
  double prior_strength = 1.0;

  static DirichletPosterior uniform(int num_states, int num_actions,
                                    double prior_strength = 1.0);

  double count(int s, int a, int next) const {
    return counts[static_cast<std::size_t>(next + num_states * (s + num_states * a))];
  }
};

DirichletPosterior dirichlet_update(DirichletPosterior post, int s, int a, int next);

/// Posterior mean kernel counts[s,a,.] / sum counts[s,a,.].
std::vector<double> dirichlet_mean(const DirichletPosterior& post);

/// Draws every row theta(.|s,a) independently from Dirichlet(counts[s,a,.]).
std::vector<double> dirichlet_sample(const DirichletPosterior& post, Rng& rng);
std::vector<double> dirichlet_sample(const DirichletPosterior& post, std::uint64_t seed);

}  // namespace psrl
