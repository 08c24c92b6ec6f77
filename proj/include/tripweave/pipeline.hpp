#pragma once

#include <filesystem>
#include <json.hpp>
#include <string>
#include <vector>

namespace tripweave {

// Declarative run configuration: one JSON file describes a reproducible run;
// CLI overrides patch individual keys before hashing.
struct RunConfig {
  nlohmann::ordered_json effective;
  std::filesystem::path base_dir;  // relative paths resolve against the config file
  uint64_t seed = 0;
  uint64_t config_hash = 0;  // over the effective config, excluding output_dir
  std::string run_id;        // hex prefix of config_hash; artifact directory name

  static RunConfig load(const std::filesystem::path& config_path,
                        const std::vector<std::string>& overrides);

  std::filesystem::path resolve(const std::string& rel) const;
  std::filesystem::path output_dir() const;
  std::filesystem::path run_dir() const { return output_dir() / run_id; }
};

inline constexpr const char* kSubcommands[] = {"ingest", "monthly",  "regional", "simulate", "features",
                                               "cluster", "report",  "synth",    "evaluate", "pipeline"};

struct RunResult {
  std::filesystem::path run_dir;
  std::vector<std::string> artifacts;  // file names inside run_dir
};

// Executes one subcommand; throws ConfigError / DataError / std::logic_error.
// Artifacts land atomically under run_dir; the manifest is written last.
RunResult run_subcommand(const std::string& name, const RunConfig& config);

}  // namespace tripweave
