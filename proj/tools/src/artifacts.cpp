#include "psrl_cli/artifacts.hpp"

#include <fstream>
#include <sstream>

#include "psrl/errors.hpp"
#include "psrl/experiment.hpp"
#include "psrl/model_io.hpp"
#include "psrl/version.hpp"
#include "psrl_cli/config.hpp"

namespace psrl::cli {

using json = nlohmann::json;
namespace fs = std::filesystem;

ArtifactMeta make_meta(std::string config_hash, int grid_resolution) {
  return {std::move(config_hash), grid_resolution, kVersion};
}

json to_json(const ArtifactMeta& meta) {
  return {{"config_hash", meta.config_hash},
          {"grid_resolution", meta.grid_resolution},
          {"version", meta.version}};
}

std::string csv_meta_line(const ArtifactMeta& meta) {
  return "# config_hash=" + meta.config_hash +
         " grid_resolution=" + std::to_string(meta.grid_resolution) +
         " version=" + meta.version + "\n";
}

ArtifactMeta read_meta(const fs::path& path) {
  if (path.extension() == ".json") {
    const json doc = read_json_file(path);
    if (!doc.contains("meta")) throw ConfigError(path.string() + ": no meta block");
    const json& m = doc["meta"];
    return {m.at("config_hash").get<std::string>(), m.at("grid_resolution").get<int>(),
            m.at("version").get<std::string>()};
  }
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  ArtifactMeta meta;
  std::istringstream fields(line);
  std::string token;
  fields >> token;
  if (token != "#") throw ConfigError(path.string() + ": no meta line");
  while (fields >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = token.substr(0, eq), value = token.substr(eq + 1);
    if (key == "config_hash") meta.config_hash = value;
    if (key == "grid_resolution") meta.grid_resolution = std::stoi(value);
    if (key == "version") meta.version = value;
  }
  return meta;
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
}

void write_file(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << contents;
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

void write_json(const fs::path& path, const json& doc) { write_file(path, doc.dump(2) + "\n"); }

json merge_seed_summaries(const std::vector<fs::path>& paths) {
  if (paths.empty()) throw ConfigError("nothing to merge");
  const ArtifactMeta first = read_meta(paths.front());
  std::vector<double> totals;
  json seeds = json::array();
  for (const auto& p : paths) {
    const ArtifactMeta m = read_meta(p);
    if (m.config_hash != first.config_hash)
      throw ConfigError("refusing to merge " + p.string() + ": config hash " + m.config_hash +
                        " != " + first.config_hash);
    if (m.grid_resolution != first.grid_resolution || m.version != first.version)
      throw ConfigError("refusing to merge " + p.string() + ": grid resolution or version differs");
    const json doc = read_json_file(p);
    if (!doc.contains("regret_total")) throw ConfigError(p.string() + ": not a per-seed summary");
    totals.push_back(doc["regret_total"].get<double>());
    seeds.push_back(doc.value("seed", std::uint64_t{0}));
  }
  const MeanStat st = mean_and_se(totals);
  return {{"meta", to_json(first)},
          {"runs", st.n},
          {"mean_regret", st.mean},
          {"se_regret", st.se},
          {"seeds", seeds}};
}

}  // namespace psrl::cli
