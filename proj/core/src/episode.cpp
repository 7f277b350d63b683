#include "psrl/episode.hpp"

#include <ostream>
#include <stdexcept>
#include <string>

namespace psrl {

std::string_view to_string(ScheduleRule rule) {
  return rule == ScheduleRule::Doubling ? "doubling" : "linear";
}

ScheduleRule schedule_rule_from_string(std::string_view name) {
  if (name == "doubling") return ScheduleRule::Doubling;
  if (name == "linear") return ScheduleRule::Linear;
  throw std::invalid_argument("unknown schedule rule: " + std::string(name));
}

std::string_view to_string(EpisodeTrigger trigger) {
  switch (trigger) {
    case EpisodeTrigger::Sched: return "SCHED";
    case EpisodeTrigger::CountDoubling: return "COUNT_DOUBLING";
    case EpisodeTrigger::HorizonEnd: return "HORIZON_END";
  }
  return "?";
}

void write_episode_csv(std::ostream& out, const EpisodeLog& log) {
  out << "k,t_k,T_k,trigger,param_id\n";
  for (const auto& e : log.episodes) {
    out << e.k << ',' << e.start << ',' << e.length << ',' << to_string(e.trigger) << ','
        << e.param_id << '\n';
  }
}

nlohmann::json episode_log_to_json(const EpisodeLog& log) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& e : log.episodes) {
    rows.push_back({{"k", e.k},
                    {"t_k", e.start},
                    {"T_k", e.length},
                    {"executed", e.executed},
                    {"param_id", e.param_id},
                    {"trigger", std::string(to_string(e.trigger))}});
  }
  return {{"K_T", log.num_episodes()}, {"episodes", std::move(rows)}};
}

}  // namespace psrl
