#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "psrl/model.hpp"
#include "psrl/posterior.hpp"

namespace psrl {

// Model file layout:
//   num_states, num_actions, num_obs   positive integers
//   transition       [a][s][s']
//   observation      [s][o]
//   cost             [s][a]
//   initial_belief   [s]
//
// Parameter-set files carry the shared fields above (without `transition`)
// plus `transitions` (a list of [a][s][s'] tensors), `prior`, and optionally
// `initial_beliefs` (one [s] vector per candidate).
//
// Loaders throw ConfigError on shape mismatches or failed validation.

PomdpModel model_from_json(const nlohmann::json& j);
nlohmann::json model_to_json(const PomdpModel& model);
PomdpModel load_model(const std::filesystem::path& path);

FiniteParameterSet parameter_set_from_json(const nlohmann::json& j);
nlohmann::json parameter_set_to_json(const FiniteParameterSet& params);
FiniteParameterSet load_parameter_set(const std::filesystem::path& path);

/// Reads and parses a JSON document; ConfigError when missing or malformed.
nlohmann::json read_json_file(const std::filesystem::path& path);

/// Nested [a][s][s'] array to the flat transition layout.
std::vector<double> transition_from_json(const nlohmann::json& j, int num_states,
                                         int num_actions);
nlohmann::json transition_to_json(const std::vector<double>& transition, int num_states,
                                  int num_actions);

}  // namespace psrl
