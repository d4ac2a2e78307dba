#pragma once

#include <optional>
#include <stop_token>
#include <string>
#include <string_view>
#include <vector>

#include "lemmaloop/conjecture.hpp"
#include "lemmaloop/solver.hpp"
#include "lemmaloop/task.hpp"

namespace lemmaloop {

enum class FilterDecision { Pass, Filtered };
enum class FilterReason { None, SyntaxError, IdenticalToGoal, InconsistentWithAxioms };

std::string to_string(FilterDecision d);
std::string to_string(FilterReason r);

struct FilterVerdict {
  FilterDecision decision = FilterDecision::Pass;
  FilterReason reason = FilterReason::None;
  double elapsed = 0.0;
  /// Parse error text, or a note when the solver could not be used.
  std::string detail;
  std::optional<SolverVerdict> consistency;

  bool filtered() const { return decision == FilterDecision::Filtered; }
};

/// The three rejection checks, in order: does not parse or sort-check,
/// alpha-equivalent to the goal, or contradicts the axioms within
/// `timeout_seconds`. A solver that cannot run lets the conjecture pass.
FilterVerdict is_filtered(const Conjecture& c, const Task& task, Prover& prover, double timeout_seconds,
                          std::stop_token stop = {});
FilterVerdict is_filtered(std::string_view text, const Task& task, Prover& prover, double timeout_seconds,
                          std::stop_token stop = {});

enum class FilterMode {
  /// The first filtered conjecture rejects the whole batch.
  Strict,
  /// Filtered conjectures are dropped and the rest kept.
  DropBad,
};

std::string to_string(FilterMode m);
std::optional<FilterMode> filter_mode_from_string(std::string_view s);

struct BatchResult {
  bool rejected = false;
  /// Index of the conjecture that rejected the batch (strict mode).
  std::optional<std::size_t> rejected_index;
  FilterReason reason = FilterReason::None;
  /// One verdict per conjecture examined, in order.
  std::vector<FilterVerdict> verdicts;
  /// Conjectures that go on to verification.
  std::vector<Conjecture> kept;
};

BatchResult filter_batch(const std::vector<Conjecture>& batch, const Task& task, Prover& prover,
                         double timeout_seconds, FilterMode mode = FilterMode::Strict, std::stop_token stop = {});

}  // namespace lemmaloop
