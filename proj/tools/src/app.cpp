#include "psrl_cli/app.hpp"

#include <CLI11.hpp>

#include <functional>

#include "psrl/errors.hpp"
#include "psrl/version.hpp"
#include "psrl_cli/artifacts.hpp"
#include "psrl_cli/commands.hpp"

namespace psrl::cli {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

/// Experiment flags shared by run / verify / sweep. Only flags actually given
/// end up in the override document, so file values survive otherwise.
struct ExperimentFlags {
  std::string config;
  std::string regime, model, output, rule, pseudo;
  int true_parameter = 0, seeds = 0, grid = 0, jobs = 0, stride = 0, depth = 0;
  long horizon = 0, max_iterations = 0;
  std::uint64_t base_seed = 0;
  double tolerance = 0.0;
  bool beliefs = false, posterior_mass = false, control_variate = false;
  std::vector<long> checkpoints;
  std::vector<double> alphas;

  void attach(CLI::App& app) {
    app.add_option("-c,--config", config, "JSON config file");
    app.add_option("--regime", regime, "finite | dirichlet_mdp");
    app.add_option("--model", model, "parameter-set or model file");
    app.add_option("--true-parameter", true_parameter, "index of the true candidate, -1 draws it");
    app.add_option("--horizon", horizon, "number of steps T");
    app.add_option("--seeds", seeds, "number of seeds");
    app.add_option("--base-seed", base_seed, "base seed");
    app.add_option("--grid", grid, "belief grid resolution");
    app.add_option("--tolerance", tolerance, "planner tolerance");
    app.add_option("--max-iterations", max_iterations, "planner sweep cap");
    app.add_option("--schedule-rule", rule, "doubling | linear");
    app.add_option("--pseudo-count", pseudo, "time | max_ceil | true_count");
    app.add_option("--smoothing-stride", stride, "steps between full smoothing passes");
    app.add_option("-o,--output", output, "output directory");
    app.add_option("-j,--jobs", jobs, "worker threads");
    app.add_flag("--record-beliefs", beliefs, "record the dual-belief decomposition");
    app.add_flag("--record-posterior-mass", posterior_mass, "record 1 - f_t(theta*)");
    app.add_flag("--control-variate", control_variate, "also report the control-variate regret");
    app.add_option("--checkpoints", checkpoints, "steps for count snapshots");
    app.add_option("--separation-depth", depth, "history depth for the separation search");
    app.add_option("--alphas", alphas, "alphas for the pseudo-count check");
  }

  json overrides(const CLI::App& app) const {
    json j = json::object();
    auto given = [&](const char* name) { return app.count(name) > 0; };
    if (given("--regime")) j["regime"] = regime;
    if (given("--model")) j["model"] = fs::absolute(model).lexically_normal().string();
    if (given("--true-parameter")) j["true_parameter"] = true_parameter;
    if (given("--horizon")) j["horizon"] = horizon;
    if (given("--seeds")) j["seeds"]["count"] = seeds;
    if (given("--base-seed")) j["seeds"]["base"] = base_seed;
    if (given("--grid")) j["grid_resolution"] = grid;
    if (given("--tolerance")) j["tolerance"] = tolerance;
    if (given("--max-iterations")) j["max_iterations"] = max_iterations;
    if (given("--schedule-rule")) j["schedule"]["rule"] = rule;
    if (given("--pseudo-count")) j["schedule"]["pseudo_count"] = pseudo;
    if (given("--smoothing-stride")) j["smoothing_stride"] = stride;
    if (given("--output")) j["output_dir"] = output;
    if (given("--jobs")) j["jobs"] = jobs;
    if (given("--record-beliefs")) j["diagnostics"]["record_beliefs"] = beliefs;
    if (given("--record-posterior-mass")) j["diagnostics"]["record_posterior_mass"] = posterior_mass;
    if (given("--control-variate")) j["diagnostics"]["control_variate_regret"] = control_variate;
    if (given("--checkpoints")) j["diagnostics"]["count_checkpoints"] = checkpoints;
    if (given("--separation-depth")) j["verify"]["separation_depth"] = depth;
    if (given("--alphas")) j["verify"]["lemma3_alphas"] = alphas;
    return j;
  }

  ExperimentConfig resolve(const CLI::App& app) const { return resolve_config(config, overrides(app)); }
};

int guarded(const std::function<int()>& body, std::ostream& err) {
  try {
    return body();
  } catch (const NoConvergence& e) {
    err << "error: " << e.what() << "\n";
    return kNoConvergence;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Posterior sampling for POMDPs with unknown transition kernels"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  ExperimentFlags run_flags, verify_flags, sweep_flags;
  auto* run = app.add_subcommand("run", "run seeds and write regret artifacts");
  run_flags.attach(*run);

  auto* verify = app.add_subcommand("verify", "run one of the verifiers");
  std::string which;
  verify->add_option("check", which, "separation | concentration | lemma3 | episode-bounds")
      ->required();
  verify_flags.attach(*verify);

  auto* sweep = app.add_subcommand("sweep", "repeat runs along one axis");
  std::string axis;
  std::vector<double> values;
  sweep->add_option("--axis", axis, "T | grid | seeds")->required();
  sweep->add_option("--values", values, "axis values")->required();
  sweep_flags.attach(*sweep);

  auto* plan = app.add_subcommand("plan", "solve one model and dump the grid solution");
  PlanRequest plan_req;
  std::string plan_model, plan_output;
  plan->add_option("--model", plan_model, "model or parameter-set file")->required();
  plan->add_option("--index", plan_req.index, "candidate index in a parameter set");
  plan->add_option("--grid", plan_req.grid_resolution, "belief grid resolution");
  plan->add_option("--tolerance", plan_req.tolerance, "planner tolerance");
  plan->add_option("--max-iterations", plan_req.max_iterations, "planner sweep cap");
  plan->add_option("-o,--output", plan_output, "output directory");

  auto* inspect = app.add_subcommand("inspect", "pretty-print or merge artifacts");
  std::vector<std::string> files;
  std::string merge_out;
  inspect->add_option("files", files, "artifact files")->required();
  inspect->add_option("--merge", merge_out, "merge per-seed summaries into this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }

  if (run->parsed()) return guarded([&] { return cmd_run(run_flags.resolve(*run), out); }, err);
  if (verify->parsed())
    return guarded([&] { return cmd_verify(verify_flags.resolve(*verify), which, out); }, err);
  if (sweep->parsed())
    return guarded([&] { return cmd_sweep(sweep_flags.resolve(*sweep), axis, values, out); }, err);
  if (plan->parsed()) {
    return guarded(
        [&] {
          plan_req.model = plan_model;
          if (!plan_output.empty()) {
            plan_req.output_dir = plan_output;
          } else {
            const char* env = std::getenv("PSRL_OUTPUT_DIR");
            plan_req.output_dir = env != nullptr && *env != '\0' ? fs::path(env) : "psrl_out";
          }
          return cmd_plan(plan_req, out);
        },
        err);
  }
  return guarded(
      [&] {
        std::vector<fs::path> paths(files.begin(), files.end());
        std::optional<fs::path> target;
        if (!merge_out.empty()) target = merge_out;
        return cmd_inspect(paths, target, out);
      },
      err);
}

}  // namespace psrl::cli
