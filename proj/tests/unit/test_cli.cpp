#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "psrl/errors.hpp"
#include "psrl/model_io.hpp"
#include "psrl_cli/app.hpp"
#include "psrl_cli/artifacts.hpp"
#include "psrl_cli/config.hpp"
#include "support.hpp"

using namespace psrl;
using namespace psrl::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() /
                       ("psrl_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

struct Invocation {
  int code;
  std::string out, err;
};

Invocation invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "psrl");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t data_rows(const fs::path& csv) {
  std::ifstream in(csv);
  std::string line;
  std::size_t n = 0;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.starts_with("#")) continue;
    if (!header) {
      header = true;
      continue;
    }
    ++n;
  }
  return n;
}

std::string pair_path() { return support::fixture("separated_pair.json").string(); }

}  // namespace

TEST_CASE("flag > file > default") {
  const fs::path dir = scratch("precedence");
  const fs::path cfg = dir / "cfg.json";
  std::ofstream(cfg) << R"({"model": ")" << pair_path()
                     << R"(", "horizon": 77, "seeds": 5, "schedule": "general"})";
  nlohmann::json overrides = {{"horizon", 12}, {"output_dir", (dir / "o").string()}};
  const ExperimentConfig c = resolve_config(cfg, overrides);
  CHECK(c.horizon == 12);
  CHECK(c.seeds == 5);
  CHECK(c.grid_resolution == 20);
  CHECK(c.schedule.rule == ScheduleRule::Linear);
  CHECK(c.schedule.pseudo == PseudoCountPolicy::MaxCeil);

  std::ofstream(dir / "relative.json") << R"({"model": "pair.json"})";
  fs::copy_file(pair_path(), dir / "pair.json");
  CHECK(resolve_config(dir / "relative.json", {}).model == (dir / "pair.json").lexically_normal());

  std::ofstream(dir / "bad.json") << R"({"model": "x", "horizn": 3})";
  CHECK_THROWS_AS(resolve_config(dir / "bad.json", {}), ConfigError);
}

TEST_CASE("PSRL_OUTPUT_DIR supplies the default output directory") {
  const fs::path dir = scratch("env");
  ::setenv("PSRL_OUTPUT_DIR", (dir / "from_env").c_str(), 1);
  const ExperimentConfig c = resolve_config({}, {{"model", pair_path()}});
  ::unsetenv("PSRL_OUTPUT_DIR");
  CHECK(c.output_dir == dir / "from_env");
}

TEST_CASE("run: row counts, metadata stamps, byte-identical reruns") {
  const fs::path dir = scratch("run");
  const auto r = invoke({"run", "--model", pair_path(), "--horizon", "1023", "--seeds", "100", "--grid",
                      "10", "-o", (dir / "a").string(), "--jobs", "2"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(data_rows(dir / "a" / "aggregate_regret.csv") == 1023);
  CHECK(data_rows(dir / "a" / "seed_0000_regret.csv") == 1023);

  const auto again = invoke({"run", "--model", pair_path(), "--horizon", "1023", "--seeds", "100",
                          "--grid", "10", "-o", (dir / "b").string()});
  REQUIRE(again.code == 0);
  for (const char* f : {"seed_0000_regret.csv", "seed_0002_episodes.csv", "seed_0001.json"})
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));

  const ArtifactMeta meta = read_meta(dir / "a" / "summary.json");
  CHECK(meta.config_hash.size() == 16);
  CHECK(meta.grid_resolution == 10);
  for (const auto& entry : fs::directory_iterator(dir / "a")) {
    const ArtifactMeta m = read_meta(entry.path());
    CHECK(m.config_hash == meta.config_hash);
    CHECK(m.grid_resolution == 10);
    CHECK(m.version == meta.version);
  }
}

TEST_CASE("exit codes") {
  const fs::path dir = scratch("codes");
  const auto missing = invoke({"run", "--model", (dir / "nope.json").string(), "-o", dir.string()});
  CHECK(missing.code == 1);
  CHECK(missing.err.find("nope.json") != std::string::npos);

  const auto diverge = invoke({"plan", "--model", support::fixture("pomdp/tiger.json").string(),
                            "--max-iterations", "2", "-o", dir.string()});
  CHECK(diverge.code == 2);

  std::ofstream(dir / "blocker") << "x";
  const auto io = invoke({"run", "--model", pair_path(), "--horizon", "5", "--seeds", "1", "-o",
                       (dir / "blocker" / "sub").string()});
  CHECK(io.code == 3);

  CHECK(invoke({"run", "--horizon", "0", "--model", pair_path()}).code == 1);
  CHECK(invoke({"frobnicate"}).code == 1);
}

TEST_CASE("verify subcommands") {
  const fs::path dir = scratch("verify");
  const auto sep = invoke({"verify", "separation", "--model",
                        support::fixture("duplicate_pair.json").string(), "--separation-depth",
                        "3", "-o", dir.string()});
  REQUIRE(sep.code == 0);
  const auto rep = read_json_file(dir / "verify_separation.json");
  CHECK(rep["report"]["epsilon_hat"].get<double>() == 0.0);

  const auto l3 = invoke({"verify", "lemma3", "--regime", "dirichlet_mdp", "--model",
                       support::fixture("mdp3x3.json").string(), "--pseudo-count", "true_count",
                       "--horizon", "200", "--seeds", "20", "-o", dir.string()});
  REQUIRE_MESSAGE(l3.code == 0, l3.err);
  for (const auto& row : read_json_file(dir / "verify_lemma3.json")["rows"])
    CHECK(row["frequency"].get<double>() == 0.0);

  const auto eb = invoke({"verify", "episode-bounds", "--model", pair_path(), "--horizon", "300",
                       "--seeds", "5", "--grid", "10", "-o", dir.string()});
  CHECK(eb.code == 0);

  CHECK(invoke({"verify", "nonsense", "--model", pair_path(), "-o", dir.string()}).code == 1);
}

TEST_CASE("sweeps") {
  const fs::path dir = scratch("sweep");
  const auto one = invoke({"sweep", "--axis", "T", "--values", "64", "--model", pair_path(), "--seeds",
                        "2", "--grid", "10", "-o", dir.string()});
  REQUIRE(one.code == 0);
  CHECK(data_rows(dir / "sweep_T.csv") == 1);
  CHECK(fs::exists(dir / "sweep_T" / "64" / "aggregate_regret.csv"));

  const auto grid = invoke({"sweep", "--axis", "grid", "--values", "10", "20", "40", "--model",
                         pair_path(), "--seeds", "1", "--horizon", "10", "-o", dir.string()});
  REQUIRE(grid.code == 0);
  const auto rows = read_json_file(dir / "sweep_grid.json")["rows"];
  const double j10 = rows[0]["j_star"], j20 = rows[1]["j_star"], j40 = rows[2]["j_star"];
  CHECK(std::abs(j40 - j20) <= std::abs(j20 - j10));

  const auto tsweep = invoke({"sweep", "--axis", "T", "--values", "200", "800", "--regime",
                             "dirichlet_mdp", "--model", support::fixture("mdp3x3.json").string(),
                             "--seeds", "10", "--control-variate", "-o", (dir / "t").string()});
  REQUIRE_MESSAGE(tsweep.code == 0, tsweep.err);
  const auto tdoc = read_json_file(dir / "t" / "sweep_T.json");
  CHECK(tdoc["rows"].size() == 2);
  CHECK(tdoc["rows"][0].contains("mean_regret_control_variate"));
  CHECK(tdoc["loglog_slope"].is_number());

  CHECK(invoke({"sweep", "--axis", "colour", "--values", "1", "--model", pair_path()}).code == 1);
}

TEST_CASE("inspect merges matching summaries and refuses mismatched hashes") {
  const fs::path dir = scratch("inspect");
  REQUIRE(invoke({"run", "--model", pair_path(), "--horizon", "20", "--seeds", "2", "--grid", "5",
               "-o", (dir / "x").string()})
              .code == 0);
  REQUIRE(invoke({"run", "--model", pair_path(), "--horizon", "21", "--seeds", "2", "--grid", "5",
               "-o", (dir / "y").string()})
              .code == 0);
  const auto ok = invoke({"inspect", (dir / "x" / "seed_0000.json").string(),
                       (dir / "x" / "seed_0001.json").string(), "--merge",
                       (dir / "merged.json").string()});
  CHECK(ok.code == 0);
  CHECK(read_json_file(dir / "merged.json")["runs"] == 2);

  const auto bad = invoke({"inspect", (dir / "x" / "seed_0000.json").string(),
                        (dir / "y" / "seed_0000.json").string(), "--merge",
                        (dir / "merged2.json").string()});
  CHECK(bad.code == 1);
  CHECK(bad.err.find("refusing") != std::string::npos);

  const auto show = invoke({"inspect", (dir / "x" / "aggregate_regret.csv").string()});
  CHECK(show.code == 0);
  CHECK(show.out.find("rows: 20") != std::string::npos);
}

TEST_CASE("shipped example configs resolve and validate") {
  for (const char* name : {"finite_doubling.json", "finite_diagnostics.json", "dirichlet_mdp.json"}) {
    const ExperimentConfig c = resolve_config(support::fixture(std::string("configs/") + name), {});
    CHECK(fs::exists(c.model));
    CHECK_NOTHROW(build_spec(c));
  }
}
