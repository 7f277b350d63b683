#include "psrl/model_io.hpp"

#include <fstream>
#include <sstream>

#include "psrl/errors.hpp"

namespace psrl {
namespace {

using nlohmann::json;

int positive_int(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number_integer())
    throw ConfigError(std::string("missing integer field '") + key + "'");
  const int v = j.at(key).get<int>();
  if (v <= 0) throw ConfigError(std::string("field '") + key + "' must be positive");
  return v;
}

const json& array_field(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array())
    throw ConfigError(std::string("missing array field '") + key + "'");
  return j.at(key);
}

std::vector<double> vector_of(const json& j, std::size_t n, const std::string& what) {
  if (!j.is_array() || j.size() != n)
    throw ConfigError(what + ": expected array of length " + std::to_string(n));
  std::vector<double> out;
  out.reserve(n);
  for (const auto& x : j) {
    if (!x.is_number()) throw ConfigError(what + ": non-numeric entry");
    out.push_back(x.get<double>());
  }
  return out;
}

std::vector<double> matrix_of(const json& j, std::size_t rows, std::size_t cols,
                              const std::string& what) {
  if (!j.is_array() || j.size() != rows)
    throw ConfigError(what + ": expected " + std::to_string(rows) + " rows");
  std::vector<double> out;
  out.reserve(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    auto row = vector_of(j[r], cols, what + " row " + std::to_string(r));
    out.insert(out.end(), row.begin(), row.end());
  }
  return out;
}

json matrix_to_json(const std::vector<double>& flat, std::size_t rows, std::size_t cols) {
  json out = json::array();
  for (std::size_t r = 0; r < rows; ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < cols; ++c) row.push_back(flat[r * cols + c]);
    out.push_back(std::move(row));
  }
  return out;
}

void check(const ValidationReport& report, const std::string& what) {
  if (report.ok) return;
  std::string msg = what + " failed validation:";
  for (const auto& f : report.failures) msg += " " + f + ";";
  throw ConfigError(msg);
}

}  // namespace

std::vector<double> transition_from_json(const json& j, int S, int A) {
  if (!j.is_array() || j.size() != static_cast<std::size_t>(A))
    throw ConfigError("transition: expected " + std::to_string(A) + " action slices");
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(S * S * A));
  for (int a = 0; a < A; ++a) {
    auto slice = matrix_of(j[static_cast<std::size_t>(a)], static_cast<std::size_t>(S),
                           static_cast<std::size_t>(S), "transition[" + std::to_string(a) + "]");
    flat.insert(flat.end(), slice.begin(), slice.end());
  }
  return flat;
}

json transition_to_json(const std::vector<double>& transition, int S, int A) {
  json out = json::array();
  const auto s2 = static_cast<std::size_t>(S * S);
  for (int a = 0; a < A; ++a) {
    std::vector<double> slice(transition.begin() + static_cast<std::ptrdiff_t>(s2 * static_cast<std::size_t>(a)),
                              transition.begin() + static_cast<std::ptrdiff_t>(s2 * static_cast<std::size_t>(a + 1)));
    out.push_back(matrix_to_json(slice, static_cast<std::size_t>(S), static_cast<std::size_t>(S)));
  }
  return out;
}

PomdpModel model_from_json(const json& j) {
  PomdpModel m;
  m.num_states = positive_int(j, "num_states");
  m.num_actions = positive_int(j, "num_actions");
  m.num_obs = positive_int(j, "num_obs");
  const auto S = static_cast<std::size_t>(m.num_states);
  m.transition = transition_from_json(array_field(j, "transition"), m.num_states, m.num_actions);
  m.observation = matrix_of(array_field(j, "observation"), S,
                            static_cast<std::size_t>(m.num_obs), "observation");
  m.cost = matrix_of(array_field(j, "cost"), S, static_cast<std::size_t>(m.num_actions), "cost");
  m.initial_belief = vector_of(array_field(j, "initial_belief"), S, "initial_belief");
  check(validate_model(m), "model");
  return m;
}

json model_to_json(const PomdpModel& m) {
  json j;
  j["num_states"] = m.num_states;
  j["num_actions"] = m.num_actions;
  j["num_obs"] = m.num_obs;
  j["transition"] = transition_to_json(m.transition, m.num_states, m.num_actions);
  j["observation"] = matrix_to_json(m.observation, static_cast<std::size_t>(m.num_states),
                                    static_cast<std::size_t>(m.num_obs));
  j["cost"] = matrix_to_json(m.cost, static_cast<std::size_t>(m.num_states),
                             static_cast<std::size_t>(m.num_actions));
  j["initial_belief"] = m.initial_belief;
  return j;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open file: " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

PomdpModel load_model(const std::filesystem::path& path) {
  try {
    return model_from_json(read_json_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

FiniteParameterSet parameter_set_from_json(const json& j) {
  PomdpModel shared;
  shared.num_states = positive_int(j, "num_states");
  shared.num_actions = positive_int(j, "num_actions");
  shared.num_obs = positive_int(j, "num_obs");
  const auto S = static_cast<std::size_t>(shared.num_states);
  shared.observation = matrix_of(array_field(j, "observation"), S,
                                 static_cast<std::size_t>(shared.num_obs), "observation");
  shared.cost = matrix_of(array_field(j, "cost"), S,
                          static_cast<std::size_t>(shared.num_actions), "cost");
  shared.initial_belief = vector_of(array_field(j, "initial_belief"), S, "initial_belief");

  const json& kernels = array_field(j, "transitions");
  if (kernels.empty()) throw ConfigError("transitions: empty parameter list");
  FiniteParameterSet params;
  params.prior = vector_of(array_field(j, "prior"), kernels.size(), "prior");
  std::vector<std::vector<double>> beliefs;
  if (j.contains("initial_beliefs")) {
    const json& hb = array_field(j, "initial_beliefs");
    if (hb.size() != kernels.size()) throw ConfigError("initial_beliefs: wrong length");
    for (std::size_t i = 0; i < hb.size(); ++i)
      beliefs.push_back(vector_of(hb[i], S, "initial_beliefs[" + std::to_string(i) + "]"));
  }
  for (std::size_t i = 0; i < kernels.size(); ++i) {
    PomdpModel m = shared;
    m.transition = transition_from_json(kernels[i], m.num_states, m.num_actions);
    if (!beliefs.empty()) m.initial_belief = beliefs[i];
    params.models.push_back(std::move(m));
  }
  check(validate_parameter_set(params), "parameter set");
  return params;
}

json parameter_set_to_json(const FiniteParameterSet& params) {
  const PomdpModel& ref = params.models.front();
  json j = model_to_json(ref);
  j.erase("transition");
  j["transitions"] = json::array();
  json beliefs = json::array();
  bool shared_belief = true;
  for (const auto& m : params.models) {
    j["transitions"].push_back(transition_to_json(m.transition, m.num_states, m.num_actions));
    beliefs.push_back(m.initial_belief);
    if (m.initial_belief != ref.initial_belief) shared_belief = false;
  }
  if (!shared_belief) j["initial_beliefs"] = beliefs;
  j["prior"] = params.prior;
  return j;
}

FiniteParameterSet load_parameter_set(const std::filesystem::path& path) {
  try {
    return parameter_set_from_json(read_json_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace psrl
