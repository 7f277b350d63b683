#pragma once

#include <iosfwd>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "psrl/smoothing.hpp"

namespace psrl {

/// SCHED(t_k, T_{k-1}) variants.
enum class ScheduleRule {
  Doubling,  ///< 2 t_k
  Linear,    ///< t_k + T_{k-1}
};

std::string_view to_string(ScheduleRule rule);
ScheduleRule schedule_rule_from_string(std::string_view name);

struct ScheduleConfig {
  ScheduleRule rule = ScheduleRule::Doubling;
  PseudoCountPolicy pseudo = PseudoCountPolicy::Time;

  /// Deterministic doubling schedule used with a finite parameter set.
  static ScheduleConfig finite_preset() { return {ScheduleRule::Doubling, PseudoCountPolicy::Time}; }
  static ScheduleConfig general_preset(PseudoCountPolicy pseudo = PseudoCountPolicy::MaxCeil) {
    return {ScheduleRule::Linear, pseudo};
  }

  long sched(long start, long previous_length) const {
    return rule == ScheduleRule::Doubling ? 2 * start : start + previous_length;
  }
};

enum class EpisodeTrigger { Sched, CountDoubling, HorizonEnd };

std::string_view to_string(EpisodeTrigger trigger);

struct EpisodeRecord {
  int k = 0;
  /// t_k: first step acted in this episode (t_1 = 1).
  long start = 0;
  /// T_k. For the horizon-truncated final episode this is the length the
  /// schedule rule allowed, so T_k = 2^k holds under the doubling preset.
  long length = 0;
  /// Steps actually executed (differs from `length` only for the final episode).
  long executed = 0;
  int param_id = 0;
  EpisodeTrigger trigger = EpisodeTrigger::Sched;
};

struct EpisodeLog {
  std::vector<EpisodeRecord> episodes;

  int num_episodes() const { return static_cast<int>(episodes.size()); }
};

/// CSV schema `k,t_k,T_k,trigger,param_id`.
void write_episode_csv(std::ostream& out, const EpisodeLog& log);
nlohmann::json episode_log_to_json(const EpisodeLog& log);

}  // namespace psrl
