#include "psrl/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "psrl/errors.hpp"

namespace psrl {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  double kl = 0.0;
  for (std::size_t o = 0; o < p.size(); ++o) {
    if (p[o] <= 0.0) continue;
    if (q[o] <= 0.0) return kInf;
    kl += p[o] * std::log(p[o] / q[o]);
  }
  // Rounding can leave a tiny negative total when p == q up to ulps.
  return std::max(kl, 0.0);
}

namespace {

// Filtered belief after o_1..o_t and a_1..a_{t-1}; empty when impossible.
std::vector<double> filtered_belief(const PomdpModel& m, std::span<const int> observations,
                                    std::span<const int> actions) {
  FilterStep step;
  step.weights.resize(static_cast<std::size_t>(m.num_states));
  step.normalizer = 0.0;
  for (int s = 0; s < m.num_states; ++s) {
    const double w = m.obs(s, observations[0]) * m.initial_belief[static_cast<std::size_t>(s)];
    step.weights[static_cast<std::size_t>(s)] = w;
    step.normalizer += w;
  }
  for (std::size_t i = 1;; ++i) {
    if (!(step.normalizer > 0.0)) return {};
    for (double& w : step.weights) w /= step.normalizer;
    if (i >= observations.size()) break;
    step = filter_step(m, step.weights, actions[i - 1], observations[i]);
  }
  return step.weights;
}

}  // namespace

double kl_step(const FiniteParameterSet& params, int theta, int gamma,
               std::span<const int> observations, std::span<const int> actions) {
  if (observations.empty() || actions.size() != observations.size())
    throw std::invalid_argument("kl_step: need o_1..o_t and a_1..a_t with t >= 1");
  const int a = actions.back();
  const std::vector<double> hb = filtered_belief(params[theta], observations, actions);
  if (hb.empty()) throw InvalidHistory("history has zero likelihood under the first candidate");
  const std::vector<double> hg = filtered_belief(params[gamma], observations, actions);
  if (hg.empty()) return kInf;
  const auto nu_theta = obs_predictive(params[theta], hb, a);
  const auto nu_gamma = obs_predictive(params[gamma], hg, a);
  return kl_divergence(nu_theta, nu_gamma);
}

std::string_view to_string(SeparationMethod method) {
  return method == SeparationMethod::Exhaustive ? "EXHAUSTIVE" : "SAMPLED";
}

double separation_tree_size(const FiniteParameterSet& params, int depth) {
  const double A = params.num_actions();
  const double O = params.num_obs();
  double total = 0.0;
  double level = O * A;
  for (int t = 1; t <= depth; ++t) {
    total += level;
    level *= A * O;
  }
  return total * params.size();
}

namespace {

class SeparationSearch {
 public:
  SeparationSearch(const FiniteParameterSet& params, SeparationReport& report)
      : params_(params), report_(report), n_(params.size()) {}

  // Evaluates every ordered pair (theta, gamma) at the current node for
  // action a. beliefs[i] is empty for candidates already ruled out.
  void evaluate(int theta, const std::vector<std::vector<double>>& beliefs, int a,
                std::vector<std::vector<double>>& nu) {
    for (int i = 0; i < n_; ++i) {
      const auto& b = beliefs[static_cast<std::size_t>(i)];
      nu[static_cast<std::size_t>(i)] = b.empty() ? std::vector<double>{}
                                                  : obs_predictive(params_[i], b, a);
    }
    ++report_.histories;
    const auto& p = nu[static_cast<std::size_t>(theta)];
    for (int g = 0; g < n_; ++g) {
      if (g == theta) continue;
      const auto& q = nu[static_cast<std::size_t>(g)];
      const double kl = q.empty() ? kInf : kl_divergence(p, q);
      if (std::isinf(kl)) {
        ++report_.infinite_pairs;
        continue;
      }
      if (kl < report_.epsilon_hat) {
        report_.epsilon_hat = kl;
        report_.theta = theta;
        report_.gamma = g;
        report_.argmin_observations = observations_;
        report_.argmin_actions = actions_;
        report_.argmin_actions.push_back(a);
      }
    }
  }

  std::vector<std::vector<double>> advance(const std::vector<std::vector<double>>& beliefs,
                                           int a, int o) const {
    std::vector<std::vector<double>> next(beliefs.size());
    for (int i = 0; i < n_; ++i) {
      const auto& b = beliefs[static_cast<std::size_t>(i)];
      if (b.empty()) continue;
      FilterStep step = filter_step(params_[i], b, a, o);
      if (!(step.normalizer > 0.0)) continue;
      for (double& w : step.weights) w /= step.normalizer;
      next[static_cast<std::size_t>(i)] = std::move(step.weights);
    }
    return next;
  }

  std::vector<std::vector<double>> initial(int o) const {
    std::vector<std::vector<double>> beliefs(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i) {
      const int oo[] = {o};
      beliefs[static_cast<std::size_t>(i)] = filtered_belief(params_[i], oo, {});
    }
    return beliefs;
  }

  void exhaustive(int theta, const std::vector<std::vector<double>>& beliefs, int t, int depth) {
    std::vector<std::vector<double>> nu(static_cast<std::size_t>(n_));
    for (int a = 0; a < params_.num_actions(); ++a) {
      evaluate(theta, beliefs, a, nu);
      if (t >= depth) continue;
      const auto p = nu[static_cast<std::size_t>(theta)];
      actions_.push_back(a);
      for (int o = 0; o < params_.num_obs(); ++o) {
        if (!(p[static_cast<std::size_t>(o)] > 0.0)) continue;
        observations_.push_back(o);
        exhaustive(theta, advance(beliefs, a, o), t + 1, depth);
        observations_.pop_back();
      }
      actions_.pop_back();
    }
  }

  void run_exhaustive(int depth) {
    for (int theta = 0; theta < n_; ++theta) {
      const PomdpModel& m = params_[theta];
      for (int o = 0; o < params_.num_obs(); ++o) {
        double p = 0.0;
        for (int s = 0; s < m.num_states; ++s)
          p += m.obs(s, o) * m.initial_belief[static_cast<std::size_t>(s)];
        if (!(p > 0.0)) continue;
        observations_.assign(1, o);
        actions_.clear();
        exhaustive(theta, initial(o), 1, depth);
      }
    }
  }

  void run_sampled(int depth, int samples, std::uint64_t seed) {
    std::vector<std::vector<double>> nu(static_cast<std::size_t>(n_));
    for (int theta = 0; theta < n_; ++theta) {
      const PomdpModel& m = params_[theta];
      Rng rng(mix_seed(seed, static_cast<std::uint64_t>(theta)));
      std::vector<double> uniform(static_cast<std::size_t>(params_.num_actions()), 1.0);
      for (int n = 0; n < samples; ++n) {
        int s = rng.categorical(m.initial_belief);
        int o = rng.categorical(std::span<const double>(
            m.observation.data() + static_cast<std::size_t>(m.num_obs * s),
            static_cast<std::size_t>(m.num_obs)));
        observations_.assign(1, o);
        actions_.clear();
        auto beliefs = initial(o);
        for (int t = 1; t <= depth; ++t) {
          const int a = rng.categorical(uniform);
          evaluate(theta, beliefs, a, nu);
          if (t == depth) break;
          s = rng.categorical(m.transition_row(s, a));
          o = rng.categorical(std::span<const double>(
              m.observation.data() + static_cast<std::size_t>(m.num_obs * s),
              static_cast<std::size_t>(m.num_obs)));
          beliefs = advance(beliefs, a, o);
          actions_.push_back(a);
          observations_.push_back(o);
        }
      }
    }
  }

 private:
  const FiniteParameterSet& params_;
  SeparationReport& report_;
  int n_;
  std::vector<int> observations_;
  std::vector<int> actions_;
};

}  // namespace

SeparationReport check_separation(const FiniteParameterSet& params,
                                  const SeparationOptions& options) {
  if (params.size() < 2) throw std::invalid_argument("check_separation needs |Theta| >= 2");
  if (options.depth < 1) throw std::invalid_argument("check_separation: depth must be >= 1");
  SeparationReport report;
  report.epsilon_hat = kInf;
  report.depth = options.depth;
  SeparationSearch search(params, report);
  if (separation_tree_size(params, options.depth) <= static_cast<double>(options.cap)) {
    report.method = SeparationMethod::Exhaustive;
    search.run_exhaustive(options.depth);
  } else {
    report.method = SeparationMethod::Sampled;
    search.run_sampled(options.depth, options.samples, options.seed);
  }
  return report;
}

ConcentrationEstimate fit_concentration(std::span<const double> times,
                                        std::span<const double> mass,
                                        const ConcentrationOptions& options) {
  if (times.size() != mass.size())
    throw std::invalid_argument("fit_concentration: times and mass differ in length");
  if (mass.size() < 20) throw std::invalid_argument("fit_concentration: need >= 20 points");
  if (std::all_of(mass.begin(), mass.end(), [](double m) { return m == 0.0; }))
    throw DegenerateFit("concentration immediate: posterior mass is zero at every point");

  ConcentrationEstimate est;
  est.times.assign(times.begin(), times.end());
  est.mass.assign(mass.begin(), mass.end());
  est.burn_in = static_cast<std::size_t>(std::floor(options.burn_in_fraction *
                                                    static_cast<double>(mass.size())));
  std::vector<double> xs, ys;
  for (std::size_t i = est.burn_in; i < mass.size(); ++i) {
    if (!(mass[i] > 0.0)) continue;
    xs.push_back(times[i]);
    ys.push_back(std::log(mass[i]));
  }
  est.points_used = xs.size();
  if (xs.size() < 2) {
    throw DegenerateFit("concentration immediate: fewer than two positive points after burn-in");
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
  const double intercept = my - slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (intercept + slope * xs[i]);
    ss_res += r * r;
  }
  est.alpha_hat = std::exp(intercept);
  est.beta_hat = -slope;
  est.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  est.no_learning = est.beta_hat <= options.flat_threshold;
  est.envelope_ok = true;
  for (std::size_t i = est.burn_in; i < mass.size(); ++i) {
    const double env = est.alpha_hat * std::exp(-est.beta_hat * times[i]) * (1.0 + options.slack);
    if (mass[i] > env) est.envelope_ok = false;
  }
  return est;
}

ConcentrationEstimate fit_concentration(std::span<const double> mass,
                                        const ConcentrationOptions& options) {
  std::vector<double> times(mass.size());
  for (std::size_t i = 0; i < times.size(); ++i) times[i] = static_cast<double>(i + 1);
  return fit_concentration(times, mass, options);
}

double concentration_alpha_from_prior(std::span<const double> prior) {
  double worst = 0.0;
  for (double f : prior) {
    if (f <= 0.0) return kInf;
    worst = std::max(worst, (1.0 - f) / f);
  }
  return 2.0 * std::max(worst, 2.0 * (static_cast<double>(prior.size()) - 1.0));
}

std::vector<Lemma3Row> lemma3_table(const std::vector<SeedResult>& results,
                                    std::span<const double> alphas, int num_states,
                                    int num_actions) {
  std::vector<Lemma3Row> rows;
  if (results.empty()) return rows;
  std::vector<long> times;
  for (const auto& r : results)
    for (const auto& c : r.checkpoints) times.push_back(c.t);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());

  for (double alpha : alphas) {
    for (long t : times) {
      for (int s = 0; s < num_states; ++s) {
        for (int a = 0; a < num_actions; ++a) {
          const auto i = static_cast<std::size_t>(a + num_actions * s);
          std::size_t runs = 0, hits = 0;
          for (const auto& r : results) {
            for (const auto& c : r.checkpoints) {
              if (c.t != t) continue;
              ++runs;
              if (static_cast<double>(c.pseudo[i]) < alpha * static_cast<double>(c.visits[i]))
                ++hits;
            }
          }
          Lemma3Row row;
          row.alpha = alpha;
          row.t = t;
          row.s = s;
          row.a = a;
          row.runs = runs;
          if (runs > 0) {
            row.frequency = static_cast<double>(hits) / static_cast<double>(runs);
            row.se = std::sqrt(row.frequency * (1.0 - row.frequency) / static_cast<double>(runs));
          }
          row.pass = row.frequency <= alpha + 2.0 * row.se;
          rows.push_back(row);
        }
      }
    }
  }
  return rows;
}

std::vector<Lemma3Row> lemma3_montecarlo(const PreparedExperiment& experiment,
                                         std::span<const double> alphas,
                                         std::span<const std::uint64_t> seeds, int jobs) {
  const auto& spec = experiment.spec();
  if (spec.schedule.pseudo == PseudoCountPolicy::Time)
    throw std::invalid_argument("lemma3_montecarlo needs max_ceil or true_count pseudo-counts");
  const auto results = run_seeds(experiment, seeds, jobs);
  const int S = spec.regime == Regime::Finite ? spec.params.num_states() : spec.mdp.num_states;
  const int A = spec.regime == Regime::Finite ? spec.params.num_actions() : spec.mdp.num_actions;
  return lemma3_table(results, alphas, S, A);
}

double finite_regret_bound(double span_h, double beta, double horizon) {
  if (!(beta > 0.0) || span_h < 0.0 || horizon < 1.0)
    throw DomainError("finite_regret_bound needs beta > 0, H >= 0, T >= 1");
  const double gap = std::exp(-beta) - 1.0;
  return span_h * std::log(horizon) + 4.0 * (span_h + 1.0) / (gap * gap);
}

EpisodeBoundReport episode_bound_check(const EpisodeLog& log, int num_states, int num_actions,
                                       long horizon) {
  EpisodeBoundReport r;
  const double T = static_cast<double>(horizon);
  const double sa = static_cast<double>(num_states) * num_actions;
  const double inner = 1.0 + sa * std::log(T + 1.0);
  r.episodes = log.num_episodes();
  r.episode_bound = std::sqrt(2.0 * T * inner);
  for (const auto& e : log.episodes)
    r.length_sum += static_cast<double>(e.executed) / std::sqrt(static_cast<double>(e.start));
  r.length_sum_bound = 7.0 * std::sqrt(2.0 * T) * inner * std::log(std::sqrt(2.0 * T));
  r.episodes_ok = r.episodes <= r.episode_bound;
  r.length_sum_ok = r.length_sum <= r.length_sum_bound;
  return r;
}

double k2_finite_formula(double beta, double alpha, double delta) {
  if (!(beta > 0.0) || !(delta > 0.0) || !(delta < 2.0 * alpha))
    throw DomainError("k2_finite_formula needs beta > 0 and 0 < delta < 2 alpha");
  return 2.0 * std::sqrt((-1.0 / beta) * std::log(delta / (2.0 * alpha)));
}

nlohmann::json to_json(const SeparationReport& r) {
  nlohmann::json j{{"epsilon_hat", std::isinf(r.epsilon_hat) ? nlohmann::json("inf")
                                                             : nlohmann::json(r.epsilon_hat)},
                   {"theta", r.theta},
                   {"gamma", r.gamma},
                   {"argmin_observations", r.argmin_observations},
                   {"argmin_actions", r.argmin_actions},
                   {"depth", r.depth},
                   {"method", std::string(to_string(r.method))},
                   {"histories", r.histories},
                   {"infinite_pairs", r.infinite_pairs}};
  j["note"] = "lower-bound certificate for histories up to the searched depth only";
  return j;
}

nlohmann::json to_json(const ConcentrationEstimate& e) {
  return {{"alpha_hat", e.alpha_hat},   {"beta_hat", e.beta_hat},
          {"r_squared", e.r_squared},   {"burn_in", e.burn_in},
          {"points_used", e.points_used}, {"no_learning", e.no_learning},
          {"envelope_ok", e.envelope_ok}, {"times", e.times},
          {"mass", e.mass}};
}

nlohmann::json to_json(const EpisodeBoundReport& r) {
  return {{"K_T", r.episodes},
          {"K_T_bound", r.episode_bound},
          {"length_sum", r.length_sum},
          {"length_sum_bound", r.length_sum_bound},
          {"K_T_ok", r.episodes_ok},
          {"length_sum_ok", r.length_sum_ok}};
}

nlohmann::json to_json(const Lemma3Row& r) {
  return {{"alpha", r.alpha}, {"t", r.t},   {"s", r.s},       {"a", r.a},
          {"frequency", r.frequency}, {"se", r.se}, {"runs", r.runs}, {"pass", r.pass}};
}

nlohmann::json to_json(const BoundParams& p) {
  return {{"H", p.span_h}, {"K1", p.k1}, {"K2", p.k2}, {"delta", p.delta}, {"iota", p.iota}};
}

}  // namespace psrl
