#pragma once

#include <atomic>
#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <stop_token>
#include <string>
#include <vector>

#include "lemmaloop/conjecture.hpp"
#include "lemmaloop/filter.hpp"
#include "lemmaloop/llm.hpp"
#include "lemmaloop/solver.hpp"
#include "lemmaloop/task.hpp"

namespace lemmaloop {

struct EngineConfig {
  int max_depth = 3;
  int max_iterations = 3;
  std::vector<PromptStrategy> prompt_pool = {PromptStrategy::Strategy1, PromptStrategy::Strategy2};
  double task_time_limit = 1200.0;
  double initial_check_timeout = 60.0;
  double verify_timeout = 60.0;
  double filter_timeout = 1.0;
  int subgoal_parallelism = 4;
  std::size_t conjecture_cap = 3;
  FilterMode filter_mode = FilterMode::Strict;
  /// Only run the initial check, with the whole task limit as its budget.
  bool engine_off = false;
  /// Share proofs of alpha-equal sub-goals within one root task.
  bool memoize = true;
  /// Reject verified conjectures that restate a goal on the path to the root.
  bool ancestor_check = true;
};

/// Throws std::invalid_argument on non-positive limits.
void validate(const EngineConfig& cfg);

enum class NodeStatus { ProvedDirect, ProvedWithLemmas, Failed, BudgetExhausted };
std::string to_string(NodeStatus s);
std::optional<NodeStatus> node_status_from_string(std::string_view s);
inline bool is_proved(NodeStatus s) { return s == NodeStatus::ProvedDirect || s == NodeStatus::ProvedWithLemmas; }

struct AttemptRecord {
  PromptStrategy strategy = PromptStrategy::Strategy1;
  int iteration = 0;
  std::string prompt_hash;
  TokenUsage tokens;
  /// Empty when the query succeeded.
  std::string llm_error;
  std::vector<std::string> conjectures;
  std::vector<ExtractionDiagnostic> diagnostics;
  std::vector<FilterVerdict> filter_verdicts;
  bool batch_rejected = false;
  std::optional<std::size_t> rejected_index;
  FilterReason rejected_reason = FilterReason::None;
  std::optional<Outcome> verify_outcome;
  std::string verify_solver;
  /// Set when verification succeeded but a conjecture restated an ancestor goal.
  bool circular = false;
  /// Set when sub-goals were attempted: whether they all closed.
  std::optional<bool> subgoals_proved;
  bool budget_exhausted = false;
  double elapsed = 0.0;

  bool succeeded() const { return subgoals_proved.value_or(false); }
};

struct NodeTiming {
  double initial_check = 0.0;
  double query = 0.0;
  double filter = 0.0;
  double verify = 0.0;
  double subgoal = 0.0;
};

struct ProofNode {
  Task task;
  NodeStatus status = NodeStatus::Failed;
  int depth = 0;
  /// Conjectures that verified as useful; one child per conjecture.
  std::vector<Conjecture> conjectures;
  std::vector<std::shared_ptr<const ProofNode>> children;
  std::vector<AttemptRecord> attempts;
  NodeTiming timing;
  /// Solver configuration whose Unsat closed this node.
  std::string closed_by;
  double elapsed = 0.0;
  /// Tokens spent on this node's own queries.
  TokenUsage tokens;
  /// Copied from an earlier proof of an alpha-equal goal.
  bool memo_hit = false;
};

struct ProofOutcome {
  bool proved = false;
  std::shared_ptr<const ProofNode> root;
  double wall_time = 0.0;
  TokenUsage tokens;
  int llm_queries = 0;
};

/// Line-delimited JSON progress events.
class TraceSink {
 public:
  explicit TraceSink(std::ostream& os) : os_(os) {}
  void emit(const std::string& json_line);

 private:
  std::ostream& os_;
  std::mutex mu_;
};

/// Runs the recursive lemma-driven proof search for one root task at a
/// time. The backend decides initial checks and verification; the filter
/// prover runs the consistency check. `llm` may be null in engine-off mode.
class Engine {
 public:
  Engine(EngineConfig cfg, Prover& backend, Prover& filter_prover, LanguageModel* llm, TraceSink* trace = nullptr);

  /// Prove `task` under a fresh global deadline of task_time_limit.
  /// ReplayMiss propagates: a replay run with a missing transcript aborts.
  ProofOutcome prove_task(const Task& task);

  /// Unsat of axioms plus the negated goal.
  bool initial_check(const Task& task, double timeout_seconds, std::stop_token stop = {},
                     SolverVerdict* verdict = nullptr);
  /// Unsat of axioms, conjectures and the negated goal.
  bool verify(const Task& task, const std::vector<Conjecture>& conjectures, double timeout_seconds,
              std::stop_token stop = {}, SolverVerdict* verdict = nullptr);

  const EngineConfig& config() const { return cfg_; }

  struct Run;

 private:
  struct Context {
    std::chrono::steady_clock::time_point deadline;
    std::stop_token stop;
    std::vector<std::string> ancestors;  // alpha keys of goals above this node
  };

  std::shared_ptr<const ProofNode> prove_run(const Task& task, int depth, const Context& ctx, Run& run);
  bool prove(const Task& task, PromptStrategy strategy, int iteration, int depth, const Context& ctx, Run& run,
             ProofNode& node, AttemptRecord& attempt, std::vector<Conjecture>& out);
  void discharge(const std::vector<Conjecture>& conjectures, int depth, const Context& ctx, Run& run,
                 const Task& parent, std::vector<std::shared_ptr<const ProofNode>>& children, bool& all_proved,
                 bool& budget_hit);
  void trace(const std::string& line);

  EngineConfig cfg_;
  Prover& backend_;
  Prover& filter_prover_;
  LanguageModel* llm_;
  TraceSink* trace_;
};

/// Number of nodes and maximum depth of a proof tree.
struct TreeShape {
  int nodes = 0;
  int max_depth = 0;
};
TreeShape tree_shape(const ProofNode& root);

}  // namespace lemmaloop
