#include "psrl_cli/config.hpp"

#include <cstdlib>
#include <set>

#include "psrl/errors.hpp"
#include "psrl/model_io.hpp"

namespace psrl::cli {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::set<std::string> kTopKeys{
    "regime",          "model",          "true_parameter", "sample_true_kernel",
    "prior_strength",  "schedule",       "horizon",        "seeds",
    "grid_resolution", "tolerance",      "max_iterations", "smoothing_stride",
    "output_dir",      "jobs",           "diagnostics",    "verify"};

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : j.items())
    if (!allowed.contains(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("field '") + key + "' has the wrong type");
  }
}

/// Accepts "finite" / "general" presets or {"rule", "pseudo_count"} and
/// returns the object form.
json normalize_schedule(const json& s) {
  if (s.is_string()) {
    const auto name = s.get<std::string>();
    if (name == "finite") return {{"rule", "doubling"}, {"pseudo_count", "time"}};
    if (name == "general") return {{"rule", "linear"}, {"pseudo_count", "max_ceil"}};
    throw ConfigError("unknown schedule preset '" + name + "'");
  }
  if (!s.is_object()) throw ConfigError("schedule must be a preset name or an object");
  return s;
}

json normalize_seeds(const json& s) {
  if (s.is_number_integer()) return {{"count", s}};
  if (!s.is_object()) throw ConfigError("seeds must be a count or {count, base}");
  return s;
}

/// Brings a raw config document into canonical shape so that overrides merge
/// field by field.
json normalize(json j, const fs::path& base_dir) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  if (j.contains("schedule")) j["schedule"] = normalize_schedule(j["schedule"]);
  if (j.contains("seeds")) j["seeds"] = normalize_seeds(j["seeds"]);
  if (j.contains("model") && j["model"].is_string()) {
    fs::path p = j["model"].get<std::string>();
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    j["model"] = p.lexically_normal().string();
  }
  return j;
}

}  // namespace

ExperimentConfig config_from_json(const json& raw, const fs::path& base_dir) {
  const json j = normalize(raw, base_dir);
  reject_unknown(j, kTopKeys, "config");
  ExperimentConfig c;
  c.regime = regime_from_string(get_or<std::string>(j, "regime", "finite"));
  c.model = get_or<std::string>(j, "model", "");
  c.true_parameter = get_or(j, "true_parameter", c.true_parameter);
  c.sample_true_kernel = get_or(j, "sample_true_kernel", c.sample_true_kernel);
  c.prior_strength = get_or(j, "prior_strength", c.prior_strength);

  c.schedule = c.regime == Regime::Finite ? ScheduleConfig::finite_preset()
                                          : ScheduleConfig::general_preset();
  if (j.contains("schedule")) {
    const json& s = j["schedule"];
    reject_unknown(s, {"rule", "pseudo_count"}, "schedule");
    try {
      if (s.contains("rule")) c.schedule.rule = schedule_rule_from_string(s["rule"].get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    if (s.contains("pseudo_count"))
      c.schedule.pseudo = pseudo_count_policy_from_string(s["pseudo_count"].get<std::string>());
  }

  c.horizon = get_or(j, "horizon", c.horizon);
  if (j.contains("seeds")) {
    const json& s = j["seeds"];
    reject_unknown(s, {"count", "base"}, "seeds");
    c.seeds = get_or(s, "count", c.seeds);
    c.base_seed = get_or(s, "base", c.base_seed);
  }
  c.grid_resolution = get_or(j, "grid_resolution", c.grid_resolution);
  c.tolerance = get_or(j, "tolerance", c.tolerance);
  c.max_iterations = get_or(j, "max_iterations", c.max_iterations);
  c.smoothing_stride = get_or(j, "smoothing_stride", c.smoothing_stride);
  c.output_dir = get_or<std::string>(j, "output_dir", "");
  c.jobs = get_or(j, "jobs", c.jobs);

  if (j.contains("diagnostics")) {
    const json& d = j["diagnostics"];
    reject_unknown(d,
                   {"record_beliefs", "record_posterior_mass", "control_variate_regret",
                    "count_checkpoints"},
                   "diagnostics");
    c.record_beliefs = get_or(d, "record_beliefs", c.record_beliefs);
    c.record_posterior_mass = get_or(d, "record_posterior_mass", c.record_posterior_mass);
    c.control_variate_regret = get_or(d, "control_variate_regret", c.control_variate_regret);
    c.count_checkpoints = get_or(d, "count_checkpoints", c.count_checkpoints);
  }
  if (j.contains("verify")) {
    const json& v = j["verify"];
    reject_unknown(v, {"separation_depth", "lemma3_alphas"}, "verify");
    c.separation_depth = get_or(v, "separation_depth", c.separation_depth);
    c.lemma3_alphas = get_or(v, "lemma3_alphas", c.lemma3_alphas);
  }
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  return {
      {"regime", to_string(c.regime)},
      {"model", c.model.string()},
      {"true_parameter", c.true_parameter},
      {"sample_true_kernel", c.sample_true_kernel},
      {"prior_strength", c.prior_strength},
      {"schedule",
       {{"rule", to_string(c.schedule.rule)}, {"pseudo_count", to_string(c.schedule.pseudo)}}},
      {"horizon", c.horizon},
      {"seeds", {{"count", c.seeds}, {"base", c.base_seed}}},
      {"grid_resolution", c.grid_resolution},
      {"tolerance", c.tolerance},
      {"max_iterations", c.max_iterations},
      {"smoothing_stride", c.smoothing_stride},
      {"output_dir", c.output_dir.string()},
      {"jobs", c.jobs},
      {"diagnostics",
       {{"record_beliefs", c.record_beliefs},
        {"record_posterior_mass", c.record_posterior_mass},
        {"control_variate_regret", c.control_variate_regret},
        {"count_checkpoints", c.count_checkpoints}}},
      {"verify", {{"separation_depth", c.separation_depth}, {"lemma3_alphas", c.lemma3_alphas}}},
  };
}

ExperimentConfig resolve_config(const fs::path& config_file, const json& overrides) {
  json doc = json::object();
  if (!config_file.empty()) doc = normalize(read_json_file(config_file), config_file.parent_path());
  if (!overrides.is_null()) doc.merge_patch(normalize(overrides, {}));
  ExperimentConfig c = config_from_json(doc, {});
  if (c.output_dir.empty()) {
    const char* env = std::getenv("PSRL_OUTPUT_DIR");
    c.output_dir = env != nullptr && *env != '\0' ? fs::path(env) : fs::path("psrl_out");
  }
  validate_config(c);
  return c;
}

void validate_config(const ExperimentConfig& c) {
  if (c.model.empty()) throw ConfigError("no model file given");
  if (c.horizon < 1) throw ConfigError("horizon must be >= 1");
  if (c.seeds < 1) throw ConfigError("seed count must be >= 1");
  if (c.grid_resolution < 1) throw ConfigError("grid resolution must be >= 1");
  if (c.jobs < 1) throw ConfigError("jobs must be >= 1");
  if (!(c.tolerance > 0.0)) throw ConfigError("tolerance must be positive");
  if (c.max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
  if (c.smoothing_stride < 1) throw ConfigError("smoothing_stride must be >= 1");
  if (c.separation_depth < 1) throw ConfigError("separation depth must be >= 1");
  for (long t : c.count_checkpoints)
    if (t < 1 || t > c.horizon) throw ConfigError("count checkpoint outside [1, horizon]");
}

ExperimentSpec build_spec(const ExperimentConfig& c) {
  ExperimentSpec spec;
  spec.regime = c.regime;
  if (c.regime == Regime::Finite) {
    spec.params = load_parameter_set(c.model);
  } else {
    spec.mdp = load_model(c.model);
  }
  spec.true_parameter = c.true_parameter;
  spec.sample_true_kernel = c.sample_true_kernel;
  spec.prior_strength = c.prior_strength;
  spec.schedule = c.schedule;
  spec.horizon = c.horizon;
  spec.grid_resolution = c.grid_resolution;
  spec.planner.tolerance = c.tolerance;
  spec.planner.max_iterations = c.max_iterations;
  spec.smoothing_stride = c.smoothing_stride;
  spec.record_beliefs = c.record_beliefs;
  spec.record_posterior_mass = c.record_posterior_mass;
  spec.control_variate_regret = c.control_variate_regret;
  spec.count_checkpoints = c.count_checkpoints;
  validate_experiment(spec);
  return spec;
}

std::string experiment_hash(const ExperimentConfig& c) {
  json j = config_to_json(c);
  j.erase("output_dir");
  j.erase("jobs");
  j.erase("model");
  j["model_contents"] = config_hash(read_json_file(c.model));
  return config_hash(j);
}

}  // namespace psrl::cli
