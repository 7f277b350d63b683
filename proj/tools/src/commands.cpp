#include "psrl_cli/commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "psrl/errors.hpp"
#include "psrl/model_io.hpp"
#include "psrl/verify.hpp"
#include "psrl_cli/artifacts.hpp"

namespace psrl::cli {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string seed_stem(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "seed_%04zu", index);
  return buf;
}

int states_of(const ExperimentSpec& spec) {
  return spec.regime == Regime::Finite ? spec.params.num_states() : spec.mdp.num_states;
}
int actions_of(const ExperimentSpec& spec) {
  return spec.regime == Regime::Finite ? spec.params.num_actions() : spec.mdp.num_actions;
}

int effective_grid(const ExperimentConfig& c) {
  return c.regime == Regime::Finite ? c.grid_resolution : 1;
}

json decomposition_json(const RegretDecomposition& d) {
  return {{"span_h", d.span_h}, {"h_kt", d.h_kt}, {"r1", d.r1},
          {"r2", d.r2},         {"r3", d.r3},     {"remainder", d.remainder}};
}

std::vector<SeedResult> run_config(const ExperimentConfig& c, const ExperimentSpec& spec) {
  const PreparedExperiment exp(spec);
  const auto seeds = derive_seeds(c.base_seed, c.seeds);
  return run_seeds(exp, seeds, c.jobs);
}

}  // namespace

RunOutcome execute_run(const ExperimentConfig& c, std::ostream& log) {
  const ExperimentSpec spec = build_spec(c);
  RunOutcome out;
  out.config_hash = experiment_hash(c);
  const ArtifactMeta meta = make_meta(out.config_hash, effective_grid(c));
  ensure_directory(c.output_dir);

  out.results = run_config(c, spec);
  std::vector<double> totals, j_stars, cv_totals;
  for (std::size_t i = 0; i < out.results.size(); ++i) {
    const SeedResult& r = out.results[i];
    const std::string stem = seed_stem(i);

    std::ostringstream regret_csv;
    regret_csv << csv_meta_line(meta);
    write_regret_csv(regret_csv, r.regret);
    write_file(c.output_dir / (stem + "_regret.csv"), regret_csv.str());

    std::ostringstream episode_csv;
    episode_csv << csv_meta_line(meta);
    write_episode_csv(episode_csv, r.log);
    write_file(c.output_dir / (stem + "_episodes.csv"), episode_csv.str());

    const EpisodeBoundReport bounds =
        episode_bound_check(r.log, states_of(spec), actions_of(spec), c.horizon);
    out.episode_bounds_ok = out.episode_bounds_ok && bounds.ok();

    json summary = {{"meta", to_json(meta)},
                    {"seed", r.seed},
                    {"seed_index", i},
                    {"true_parameter", r.true_parameter},
                    {"horizon", c.horizon},
                    {"j_star", r.regret.j_star},
                    {"span_h", r.span_h},
                    {"regret_total", r.regret.total},
                    {"episodes", r.log.num_episodes()},
                    {"episode_bounds", psrl::to_json(bounds)}};
    if (r.regret.decomposition) summary["decomposition"] = decomposition_json(*r.regret.decomposition);
    if (!r.regret.control_variate_curve.empty()) {
      summary["regret_total_control_variate"] = r.regret.control_variate_curve.back();
      cv_totals.push_back(r.regret.control_variate_curve.back());
    }
    write_json(c.output_dir / (stem + ".json"), summary);

    totals.push_back(r.regret.total);
    j_stars.push_back(r.regret.j_star);
  }

  const AggregateCurve agg = aggregate_regret(out.results);
  std::ostringstream agg_csv;
  agg_csv << csv_meta_line(meta) << "t,cum_regret,lower,upper\n";
  agg_csv.precision(17);
  for (std::size_t t = 0; t < agg.mean.size(); ++t)
    agg_csv << t + 1 << ',' << agg.mean[t] << ',' << agg.lower[t] << ',' << agg.upper[t] << '\n';
  write_file(c.output_dir / "aggregate_regret.csv", agg_csv.str());

  if (c.record_posterior_mass && spec.regime == Regime::Finite) {
    const auto mass = mean_posterior_mass(out.results);
    std::ostringstream mass_csv;
    mass_csv << csv_meta_line(meta) << "t,posterior_mass_off_truth\n";
    mass_csv.precision(17);
    for (std::size_t t = 0; t < mass.size(); ++t) mass_csv << t + 1 << ',' << mass[t] << '\n';
    write_file(c.output_dir / "posterior_mass.csv", mass_csv.str());
  }

  out.regret = mean_and_se(totals);
  out.mean_j_star = mean_and_se(j_stars).mean;
  json summary = {{"meta", to_json(meta)},
                  {"config", config_to_json(c)},
                  {"seeds", out.results.size()},
                  {"mean_regret", out.regret.mean},
                  {"se_regret", out.regret.se},
                  {"mean_j_star", out.mean_j_star},
                  {"episode_bounds_ok", out.episode_bounds_ok}};
  if (!cv_totals.empty()) {
    out.control_variate_regret = mean_and_se(cv_totals);
    summary["mean_regret_control_variate"] = out.control_variate_regret.mean;
    summary["se_regret_control_variate"] = out.control_variate_regret.se;
  }
  write_json(c.output_dir / "summary.json", summary);
  log << "run " << out.config_hash << ": " << out.results.size() << " seeds, mean R_T "
      << out.regret.mean << " (se " << out.regret.se << ") -> " << c.output_dir.string() << "\n";
  return out;
}

int cmd_run(const ExperimentConfig& c, std::ostream& log) {
  execute_run(c, log);
  return kOk;
}

int cmd_verify(const ExperimentConfig& base, std::string_view which, std::ostream& log) {
  ExperimentConfig c = base;
  const std::string hash = experiment_hash(c);
  const ArtifactMeta meta = make_meta(hash, effective_grid(c));
  ensure_directory(c.output_dir);
  json report = {{"meta", to_json(meta)}, {"check", std::string(which)}};
  bool passed = true;

  if (which == "separation") {
    if (c.regime != Regime::Finite) throw ConfigError("separation needs the finite regime");
    const auto params = load_parameter_set(c.model);
    SeparationOptions opts;
    opts.depth = c.separation_depth;
    opts.seed = c.base_seed;
    const SeparationReport rep = check_separation(params, opts);
    report["report"] = psrl::to_json(rep);
    log << "separation: epsilon_hat = " << rep.epsilon_hat << " at depth " << rep.depth << " ("
        << to_string(rep.method) << ")\n";
  } else if (which == "concentration") {
    if (c.regime != Regime::Finite) throw ConfigError("concentration needs the finite regime");
    c.record_posterior_mass = true;
    const auto results = run_config(c, build_spec(c));
    const auto mass = mean_posterior_mass(results);
    try {
      const ConcentrationEstimate est = fit_concentration(mass);
      report["report"] = psrl::to_json(est);
      passed = est.beta_hat > 0.0 && !est.no_learning;
      log << "concentration: alpha_hat = " << est.alpha_hat << ", beta_hat = " << est.beta_hat
          << ", r^2 = " << est.r_squared << "\n";
    } catch (const DegenerateFit& e) {
      report["report"] = {{"degenerate", e.what()}};
      passed = false;
      log << "concentration: degenerate fit: " << e.what() << "\n";
    }
  } else if (which == "lemma3") {
    if (c.count_checkpoints.empty()) {
      for (long t : {50L, 200L})
        if (t <= c.horizon) c.count_checkpoints.push_back(t);
      if (c.count_checkpoints.empty()) c.count_checkpoints.push_back(c.horizon);
    }
    const ExperimentSpec spec = build_spec(c);
    const PreparedExperiment exp(spec);
    const auto seeds = derive_seeds(c.base_seed, c.seeds);
    const auto rows = lemma3_montecarlo(exp, c.lemma3_alphas, seeds, c.jobs);
    json table = json::array();
    std::ostringstream csv;
    csv << csv_meta_line(meta) << "alpha,t,s,a,frequency,se,runs,pass\n";
    for (const auto& row : rows) {
      table.push_back(psrl::to_json(row));
      csv << row.alpha << ',' << row.t << ',' << row.s << ',' << row.a << ',' << row.frequency
          << ',' << row.se << ',' << row.runs << ',' << (row.pass ? 1 : 0) << '\n';
      passed = passed && row.pass;
    }
    write_file(c.output_dir / "verify_lemma3.csv", csv.str());
    report["rows"] = table;
    log << "lemma3: " << rows.size() << " rows, " << (passed ? "all pass" : "FAILURES") << "\n";
  } else if (which == "episode-bounds") {
    const ExperimentSpec spec = build_spec(c);
    const auto results = run_config(c, spec);
    json runs = json::array();
    int failures = 0;
    for (const auto& r : results) {
      const auto b = episode_bound_check(r.log, states_of(spec), actions_of(spec), c.horizon);
      json row = psrl::to_json(b);
      row["seed"] = r.seed;
      runs.push_back(row);
      failures += b.ok() ? 0 : 1;
    }
    passed = failures == 0;
    report["runs"] = runs;
    report["failures"] = failures;
    log << "episode-bounds: " << results.size() << " runs, " << failures << " failures\n";
  } else {
    throw ConfigError("unknown verifier '" + std::string(which) +
                      "' (separation | concentration | lemma3 | episode-bounds)");
  }

  report["passed"] = passed;
  std::string name(which);
  for (char& ch : name)
    if (ch == '-') ch = '_';
  write_json(c.output_dir / ("verify_" + name + ".json"), report);
  return passed ? kOk : kCheckFailed;
}

int cmd_sweep(const ExperimentConfig& base, std::string_view axis, const std::vector<double>& values,
              std::ostream& log) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  if (axis != "T" && axis != "grid" && axis != "seeds")
    throw ConfigError("unknown sweep axis '" + std::string(axis) + "' (T | grid | seeds)");
  for (double v : values)
    if (!(v >= 1.0) || v != std::floor(v)) throw ConfigError("sweep values must be positive integers");

  const std::string base_hash = experiment_hash(base);
  const ArtifactMeta meta =
      make_meta(config_hash(json{{"base", base_hash}, {"axis", axis}, {"values", values}}),
                effective_grid(base));
  ensure_directory(base.output_dir);

  std::ostringstream csv;
  csv << csv_meta_line(meta) << "value,mean_regret,se_regret,j_star,seeds,config_hash\n";
  csv.precision(17);
  json rows = json::array();
  std::vector<double> xs, ys;
  for (double v : values) {
    ExperimentConfig c = base;
    const long value = static_cast<long>(v);
    if (axis == "T") c.horizon = value;
    if (axis == "grid") c.grid_resolution = static_cast<int>(value);
    if (axis == "seeds") c.seeds = static_cast<int>(value);
    c.output_dir = base.output_dir / ("sweep_" + std::string(axis)) / std::to_string(value);
    validate_config(c);
    const RunOutcome run = execute_run(c, log);
    csv << value << ',' << run.regret.mean << ',' << run.regret.se << ',' << run.mean_j_star << ','
        << run.results.size() << ',' << run.config_hash << '\n';
    json row = {{"value", value},
                {"mean_regret", run.regret.mean},
                {"se_regret", run.regret.se},
                {"j_star", run.mean_j_star},
                {"seeds", run.results.size()},
                {"config_hash", run.config_hash}};
    // The slope is fitted to the lower-variance estimate when it is available.
    double fit_value = run.regret.mean;
    if (c.control_variate_regret) {
      row["mean_regret_control_variate"] = run.control_variate_regret.mean;
      row["se_regret_control_variate"] = run.control_variate_regret.se;
      fit_value = run.control_variate_regret.mean;
    }
    rows.push_back(row);
    if (fit_value > 0.0) {
      xs.push_back(std::log(static_cast<double>(value)));
      ys.push_back(std::log(fit_value));
    }
  }
  const std::string stem = "sweep_" + std::string(axis);
  write_file(base.output_dir / (stem + ".csv"), csv.str());

  json doc = {{"meta", to_json(meta)}, {"axis", axis}, {"rows", rows}};
  if (axis == "T") {
    if (xs.size() >= 2 && xs.size() == values.size()) {
      double mx = 0, my = 0;
      for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i], my += ys[i];
      mx /= static_cast<double>(xs.size());
      my /= static_cast<double>(xs.size());
      double sxy = 0, sxx = 0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
      }
      doc["loglog_slope"] = sxx > 0 ? json(sxy / sxx) : json(nullptr);
    } else {
      doc["loglog_slope"] = nullptr;
    }
    log << "sweep T: log-log slope " << doc["loglog_slope"].dump() << "\n";
  }
  write_json(base.output_dir / (stem + ".json"), doc);
  return kOk;
}

int cmd_plan(const PlanRequest& req, std::ostream& log) {
  const json doc = read_json_file(req.model);
  PomdpModel model;
  if (doc.contains("transitions")) {
    const auto params = parameter_set_from_json(doc);
    if (req.index < 0 || req.index >= params.size())
      throw ConfigError("candidate index out of range");
    model = params[req.index];
  } else {
    model = model_from_json(doc);
  }
  if (req.grid_resolution < 1) throw ConfigError("grid resolution must be >= 1");
  PlannerOptions opts;
  opts.tolerance = req.tolerance;
  opts.max_iterations = req.max_iterations;
  const BeliefGrid grid(model.num_states, req.grid_resolution);
  const PlannerSolution sol = solve_belief_mdp(model, grid, opts);

  const std::string hash = config_hash(json{{"model", config_hash(doc)},
                                            {"index", req.index},
                                            {"grid_resolution", req.grid_resolution},
                                            {"tolerance", req.tolerance},
                                            {"max_iterations", req.max_iterations}});
  const ArtifactMeta meta = make_meta(hash, req.grid_resolution);
  ensure_directory(req.output_dir);
  std::ostringstream csv;
  csv << csv_meta_line(meta);
  write_solution_csv(csv, grid, sol);
  write_file(req.output_dir / "plan_solution.csv", csv.str());
  write_json(req.output_dir / "plan.json", {{"meta", to_json(meta)},
                                            {"gain", sol.gain},
                                            {"span", sol.span},
                                            {"residual", sol.residual},
                                            {"iterations", sol.iterations},
                                            {"grid_points", grid.size()}});
  log << "plan: J = " << sol.gain << ", span = " << sol.span << ", residual = " << sol.residual
      << " after " << sol.iterations << " sweeps on " << grid.size() << " grid points\n";
  return kOk;
}

int cmd_inspect(const std::vector<fs::path>& files, const std::optional<fs::path>& merge_out,
                std::ostream& log) {
  if (files.empty()) throw ConfigError("inspect needs at least one file");
  if (merge_out) {
    const json merged = merge_seed_summaries(files);
    write_json(*merge_out, merged);
    log << "merged " << merged["runs"] << " runs: mean R_T " << merged["mean_regret"] << "\n";
    return kOk;
  }
  for (const auto& f : files) {
    if (!fs::exists(f)) throw IoError("no such file: " + f.string());
    log << "== " << f.string() << "\n";
    if (f.extension() == ".json") {
      log << read_json_file(f).dump(2) << "\n";
      continue;
    }
    std::ifstream in(f);
    if (!in) throw IoError("cannot open " + f.string());
    std::string line, header;
    std::size_t rows = 0;
    std::vector<std::string> tail;
    while (std::getline(in, line)) {
      if (line.starts_with("#")) {
        log << line << "\n";
      } else if (header.empty()) {
        header = line;
      } else {
        ++rows;
        tail.push_back(line);
        if (tail.size() > 3) tail.erase(tail.begin());
      }
    }
    log << "columns: " << header << "\nrows: " << rows << "\n";
    for (const auto& l : tail) log << "  " << l << "\n";
  }
  return kOk;
}

}  // namespace psrl::cli
