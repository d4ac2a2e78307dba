#include "lemmaloop/filter.hpp"

#include <chrono>

#include "lemmaloop/obligations.hpp"
#include "lemmaloop/smtlib.hpp"

namespace lemmaloop {

std::string to_string(FilterDecision d) { return d == FilterDecision::Pass ? "Pass" : "Filtered"; }

std::string to_string(FilterReason r) {
  switch (r) {
    case FilterReason::None: return "None";
    case FilterReason::SyntaxError: return "SyntaxError";
    case FilterReason::IdenticalToGoal: return "IdenticalToGoal";
    case FilterReason::InconsistentWithAxioms: return "InconsistentWithAxioms";
  }
  return "None";
}

std::string to_string(FilterMode m) { return m == FilterMode::Strict ? "strict" : "drop-bad"; }

std::optional<FilterMode> filter_mode_from_string(std::string_view s) {
  if (s == "strict") return FilterMode::Strict;
  if (s == "drop-bad") return FilterMode::DropBad;
  return std::nullopt;
}

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

FilterVerdict rejected(FilterReason r, std::string detail, Clock::time_point start) {
  FilterVerdict v;
  v.decision = FilterDecision::Filtered;
  v.reason = r;
  v.detail = std::move(detail);
  v.elapsed = since(start);
  return v;
}

FilterVerdict check_formula(const Term& f, const Task& task, Prover& prover, double timeout, std::stop_token stop,
                            Clock::time_point start) {
  std::string script;
  try {
    script = build_consistency_obligation(task, f);
  } catch (const IllSortedConjecture& e) {
    return rejected(FilterReason::SyntaxError, e.what(), start);
  }
  if (task.goal.valid() && alpha_equivalent(f, task.goal)) {
    return rejected(FilterReason::IdenticalToGoal, "", start);
  }
  FilterVerdict v;
  try {
    SolverVerdict sv = prover.check(script, timeout, stop);
    v.consistency = sv;
    if (sv.outcome == Outcome::Unsat) {
      v.decision = FilterDecision::Filtered;
      v.reason = FilterReason::InconsistentWithAxioms;
    } else if (sv.outcome == Outcome::SolverError) {
      v.detail = "consistency check failed to run (" + sv.config_name + "); passing";
    }
  } catch (const std::exception& e) {
    v.detail = std::string("consistency check unavailable: ") + e.what() + "; passing";
  }
  v.elapsed = since(start);
  return v;
}

}  // namespace

FilterVerdict is_filtered(const Conjecture& c, const Task& task, Prover& prover, double timeout_seconds,
                          std::stop_token stop) {
  return check_formula(c.formula, task, prover, timeout_seconds, stop, Clock::now());
}

FilterVerdict is_filtered(std::string_view text, const Task& task, Prover& prover, double timeout_seconds,
                          std::stop_token stop) {
  const auto start = Clock::now();
  Term f;
  try {
    f = parse_formula(text, task);
  } catch (const ParseError& e) {
    return rejected(FilterReason::SyntaxError, e.what(), start);
  }
  return check_formula(f, task, prover, timeout_seconds, stop, start);
}

BatchResult filter_batch(const std::vector<Conjecture>& batch, const Task& task, Prover& prover,
                         double timeout_seconds, FilterMode mode, std::stop_token stop) {
  BatchResult out;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    FilterVerdict v = is_filtered(batch[i], task, prover, timeout_seconds, stop);
    const bool bad = v.filtered();
    out.verdicts.push_back(std::move(v));
    if (!bad) {
      out.kept.push_back(batch[i]);
      continue;
    }
    if (mode == FilterMode::Strict) {
      out.rejected = true;
      out.rejected_index = i;
      out.reason = out.verdicts.back().reason;
      out.kept.clear();
      return out;
    }
  }
  return out;
}

}  // namespace lemmaloop
