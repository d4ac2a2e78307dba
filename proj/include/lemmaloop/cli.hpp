#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lemmaloop/engine.hpp"
#include "lemmaloop/llm.hpp"
#include "lemmaloop/solver.hpp"

namespace lemmaloop {

/// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitNotProved = 1;
inline constexpr int kExitUsage = 2;

/// Everything a command needs, merged from defaults, a config file, the
/// environment and flags (later sources win).
struct CliConfig {
  EngineConfig engine;
  ModelConfig model;
  std::vector<SolverConfig> portfolio = default_portfolio();
  SolverConfig filter_solver = filter_preset();
};

/// Apply a TOML-style file with [engine], [model] and [solvers] sections.
/// Solver entries may be preset names or [solvers.NAME] tables. Keys that
/// look like secrets are rejected. Throws ConfigError.
void apply_config_file(const std::filesystem::path& path, CliConfig& cfg);

/// LEMMALOOP_MODE, LEMMALOOP_MODEL, LEMMALOOP_ENDPOINT, LEMMALOOP_TRANSCRIPTS.
void apply_environment(CliConfig& cfg);

/// Effective configuration with the API key reduced to set/unset.
nlohmann::json describe(const CliConfig& cfg);
nlohmann::json to_json(const EngineConfig& cfg);

/// Run the tool with `args` (without the program name).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lemmaloop
