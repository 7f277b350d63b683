#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace psrl::cli {

/// Provenance stamped into every artifact.
struct ArtifactMeta {
  std::string config_hash;
  int grid_resolution = 0;
  std::string version;
};

ArtifactMeta make_meta(std::string config_hash, int grid_resolution);
nlohmann::json to_json(const ArtifactMeta& meta);

/// First line of every CSV artifact; the column header follows it.
std::string csv_meta_line(const ArtifactMeta& meta);

/// Reads the stamp back from a JSON ("meta" object) or CSV (first line) artifact.
ArtifactMeta read_meta(const std::filesystem::path& path);

void ensure_directory(const std::filesystem::path& dir);
/// Writes the whole file or throws IoError.
void write_file(const std::filesystem::path& path, const std::string& contents);
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

/// Combines per-seed run summaries into one aggregate. Throws ConfigError when
/// the inputs disagree on config hash, grid resolution or version.
nlohmann::json merge_seed_summaries(const std::vector<std::filesystem::path>& paths);

}  // namespace psrl::cli
