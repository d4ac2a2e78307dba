#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lemmaloop/engine.hpp"

namespace lemmaloop {

struct TaskRecord {
  /// Path relative to the benchmark root (or as listed in a task-list file).
  std::string task_path;
  std::string group;
  /// Proved, NotProved, BudgetExhausted or Error.
  std::string outcome;
  std::string root_status;
  double wall_seconds = 0.0;
  bool solved_under_360s = false;
  bool solved_under_1200s = false;
  TokenUsage tokens;
  int llm_queries = 0;
  int attempts = 0;
  int tree_nodes = 0;
  int tree_depth = 0;
  /// Relative to the output directory; empty unless proved.
  std::string certificate_path;
  std::string error;
};

struct GroupSummary {
  std::string group;
  int total = 0;
  int solved_1200 = 0;
  int solved_360 = 0;
  /// Averages over solved tasks only; nullopt when none solved.
  std::optional<double> avg_time_1200;
  std::optional<double> avg_time_360;
  std::int64_t tokens = 0;

  friend bool operator==(const GroupSummary&, const GroupSummary&) = default;
};

struct RunReport {
  std::vector<TaskRecord> records;
  std::vector<GroupSummary> summary;  // one per group, then "Total" last
  nlohmann::json metadata = nlohmann::json::object();
};

/// Whether a proved task counts as solved under `threshold` seconds. A run
/// whose own task limit is at most the threshold counts every proof.
bool solved_under(bool proved, double wall_seconds, double task_limit, double threshold);

/// Group name from the path: a known suite name (StandardDT, StandardDTLIA,
/// AutoProofBM, IndBen) among the directory components, else the parent
/// directory name, else "default".
std::string infer_group(const std::filesystem::path& relative_path);

/// Aggregate records per group plus a final "Total" row.
std::vector<GroupSummary> aggregate(const std::vector<TaskRecord>& records);

struct BenchOptions {
  /// Directory searched recursively for .smt2 files, or a task-list file
  /// with one path per line (relative to the list's directory).
  std::filesystem::path input;
  std::filesystem::path output_dir;
  int task_parallelism = 1;
  /// Force every task into this group.
  std::optional<std::string> group_override;
  /// Written under report metadata.
  nlohmann::json metadata = nlohmann::json::object();
};

struct BenchEnvironment {
  EngineConfig engine;
  Prover& backend;
  Prover& filter;
  LanguageModel* llm;
  TraceSink* trace = nullptr;
};

/// Paths of the tasks a bench run would visit, in run order.
std::vector<std::filesystem::path> collect_tasks(const std::filesystem::path& input);

/// Prove every task and write report.json, report.csv, summary.txt and one
/// certificate per proved task under options.output_dir. Per-task failures
/// become Error records.
RunReport run_bench(const BenchOptions& options, const BenchEnvironment& env);

/// Markdown table: one row per group, a Total row, an average-time row and
/// a token row (millions).
std::string summarize(const RunReport& report);

inline const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols = {
      "task_path",     "group",         "outcome",          "root_status", "wall_seconds",
      "solved_under_360s", "solved_under_1200s", "prompt_tokens", "completion_tokens", "total_tokens",
      "llm_queries",   "attempts",      "tree_nodes",       "tree_depth",  "certificate_path",
      "error"};
  return cols;
}

std::string report_csv(const RunReport& report);
nlohmann::json report_json(const RunReport& report);

class ReportMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Read report.json, recompute the summary from the records and throw
/// ReportMismatch if it differs from the stored one.
RunReport load_report(const std::filesystem::path& path);

}  // namespace lemmaloop
