#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "psrl/model.hpp"
#include "psrl/model_io.hpp"
#include "psrl/posterior.hpp"
#include "psrl/random.hpp"

#ifndef PSRL_FIXTURE_DIR
#error "PSRL_FIXTURE_DIR must be defined"
#endif
#ifndef PSRL_ORACLE_DIR
#error "PSRL_ORACLE_DIR must be defined"
#endif

namespace support {

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(PSRL_FIXTURE_DIR) / name;
}

inline const nlohmann::json& frozen() {
  static const nlohmann::json values =
      psrl::read_json_file(std::filesystem::path(PSRL_ORACLE_DIR) / "frozen_values.json");
  return values;
}

/// Random probability vector with every entry >= floor / n before normalizing.
inline std::vector<double> random_simplex(psrl::Rng& rng, int n, double floor = 0.0) {
  std::vector<double> v(static_cast<std::size_t>(n));
  double z = 0.0;
  for (double& x : v) {
    x = floor + rng.uniform();
    z += x;
  }
  for (double& x : v) x /= z;
  return v;
}

/// Random valid model. floor > 0 keeps every transition strictly positive.
inline psrl::PomdpModel random_model(psrl::Rng& rng, int S, int A, int O, double floor = 0.05) {
  psrl::PomdpModel m;
  m.num_states = S;
  m.num_actions = A;
  m.num_obs = O;
  m.transition.resize(static_cast<std::size_t>(S * S * A));
  for (int a = 0; a < A; ++a)
    for (int s = 0; s < S; ++s) {
      const auto row = random_simplex(rng, S, floor);
      for (int n = 0; n < S; ++n)
        m.transition[static_cast<std::size_t>(n + S * (s + S * a))] = row[static_cast<std::size_t>(n)];
    }
  for (int s = 0; s < S; ++s) {
    const auto row = random_simplex(rng, O, floor);
    m.observation.insert(m.observation.end(), row.begin(), row.end());
  }
  for (int i = 0; i < S * A; ++i) m.cost.push_back(rng.uniform());
  m.initial_belief = random_simplex(rng, S, floor);
  return m;
}

inline psrl::PomdpModel perfect_observation_model(psrl::Rng& rng, int S, int A, double floor = 0.05) {
  psrl::PomdpModel m = random_model(rng, S, A, S, floor);
  m.observation.assign(static_cast<std::size_t>(S * S), 0.0);
  for (int s = 0; s < S; ++s) m.observation[static_cast<std::size_t>(s + S * s)] = 1.0;
  return m;
}

/// Candidate set sharing eta, C and h, with independent random kernels.
inline psrl::FiniteParameterSet random_parameter_set(psrl::Rng& rng, int count, int S, int A,
                                                     int O) {
  psrl::FiniteParameterSet params;
  const psrl::PomdpModel base = random_model(rng, S, A, O);
  for (int i = 0; i < count; ++i) {
    psrl::PomdpModel m = random_model(rng, S, A, O);
    m.observation = base.observation;
    m.cost = base.cost;
    m.initial_belief = base.initial_belief;
    params.models.push_back(std::move(m));
  }
  params.prior = random_simplex(rng, count, 0.1);
  return params;
}

}  // namespace support
