#include <doctest.h>

#include <cmath>

#include "psrl/experiment.hpp"
#include "psrl/model_io.hpp"
#include "support.hpp"

using namespace psrl;

namespace {

ExperimentSpec diagnostic_spec(const char* fixture, long horizon) {
  ExperimentSpec spec;
  spec.params = load_parameter_set(support::fixture(fixture));
  spec.true_parameter = 0;
  spec.horizon = horizon;
  spec.grid_resolution = 60;
  spec.record_beliefs = true;
  spec.record_posterior_mass = true;
  return spec;
}

}  // namespace

TEST_CASE("identical seeds reproduce results bit for bit; threads do not change them") {
  const PreparedExperiment exp(diagnostic_spec("separated_pair.json", 255));
  const auto seeds = derive_seeds(77, 6);
  const auto serial = run_seeds(exp, seeds, 1);
  const auto parallel = run_seeds(exp, seeds, 3);
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    CHECK(serial[i].seed == seeds[i]);
    CHECK(serial[i].regret.curve == parallel[i].regret.curve);
    CHECK(serial[i].posterior_mass == parallel[i].posterior_mass);
    CHECK(serial[i].regret.decomposition->r2 == parallel[i].regret.decomposition->r2);
    CHECK(episode_log_to_json(serial[i].log) == episode_log_to_json(parallel[i].log));
  }
  CHECK(seeds[0] != seeds[1]);
}

TEST_CASE("singleton set: R1 = R2 = R3 = 0 exactly") {
  const PreparedExperiment exp(diagnostic_spec("singleton.json", 500));
  for (std::uint64_t seed : derive_seeds(1, 3)) {
    const auto r = exp.run(seed);
    REQUIRE(r.regret.decomposition.has_value());
    const auto& d = *r.regret.decomposition;
    CHECK(d.r1 == 0.0);
    CHECK(d.r2 == 0.0);
    CHECK(d.r3 == 0.0);
    CHECK(d.remainder == doctest::Approx(r.regret.total - d.h_kt));
  }
}

TEST_CASE("decomposition envelopes and the frequency-weighted R1 identity") {
  const PreparedExperiment exp(diagnostic_spec("separated_pair.json", 511));
  const auto results = run_seeds(exp, derive_seeds(5, 40), 1);
  const double j1 = exp.solutions()[0].gain, j2 = exp.solutions()[1].gain;
  const double H = exp.span_bound();
  std::vector<double> r1s;
  std::vector<double> per_episode_freq(9, 0.0);
  std::vector<double> lengths(9, 0.0);
  for (const auto& r : results) {
    const auto& d = *r.regret.decomposition;
    for (double x : d.r2_per_step) CHECK(x <= 4.0 * H + 1e-12);
    for (double x : d.r3_per_step) CHECK(std::abs(x) <= 1.0);
    for (std::size_t k = 0; k < d.r1_per_episode.size(); ++k) {
      CHECK(d.r1_per_episode[k] <= static_cast<double>(r.log.episodes[k].length));
      per_episode_freq[k] += r.log.episodes[k].param_id == 1;
      lengths[k] = static_cast<double>(r.log.episodes[k].length);
    }
    r1s.push_back(d.r1);
  }
  double expected = 0.0;
  for (std::size_t k = 0; k < 9; ++k)
    expected += lengths[k] * (j2 - j1) * per_episode_freq[k] / static_cast<double>(results.size());
  const MeanStat st = mean_and_se(r1s);
  CHECK(st.mean == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("aggregate curves, posterior mass and visit counts") {
  const PreparedExperiment exp(diagnostic_spec("separated_pair.json", 63));
  const auto results = run_seeds(exp, derive_seeds(2, 4), 2);
  const auto agg = aggregate_regret(results);
  CHECK(agg.mean.size() == 63);
  for (std::size_t t = 0; t < 63; ++t) {
    CHECK(agg.lower[t] <= agg.mean[t]);
    CHECK(agg.mean[t] <= agg.upper[t]);
  }
  const auto mass = mean_posterior_mass(results);
  CHECK(mass.size() == 63);
  CHECK(mass[0] == doctest::Approx(0.5));

  Trajectory tr;
  tr.states = {0, 1, 1, 0};
  tr.actions = {1, 0, 0};
  const auto n = visit_counts(tr, 3, 2, 2);
  CHECK(n == std::vector<long long>{0, 1, 1, 0});
}

TEST_CASE("config hash ignores key order and sees value changes") {
  const nlohmann::json a = nlohmann::json::parse(R"({"horizon": 10, "seeds": 3})");
  const nlohmann::json b = nlohmann::json::parse(R"({"seeds": 3, "horizon": 10})");
  const nlohmann::json c = nlohmann::json::parse(R"({"seeds": 4, "horizon": 10})");
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a) != config_hash(c));
  CHECK(config_hash(a).size() == 16);
}

TEST_CASE("experiment validation") {
  ExperimentSpec spec = diagnostic_spec("separated_pair.json", 0);
  CHECK_THROWS(PreparedExperiment(spec));
  spec.horizon = 10;
  spec.true_parameter = 5;
  CHECK_THROWS(PreparedExperiment(spec));
  ExperimentSpec dir;
  dir.regime = Regime::DirichletMdp;
  dir.mdp = load_model(support::fixture("pomdp/tiger.json"));
  CHECK_THROWS(PreparedExperiment(dir));
}
