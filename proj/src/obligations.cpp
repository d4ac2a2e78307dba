#include "lemmaloop/obligations.hpp"

#include <sstream>

#include "lemmaloop/smtlib.hpp"

namespace lemmaloop {

void check_conjecture(const Task& task, const Term& c) {
  if (!c.valid()) throw IllSortedConjecture("empty conjecture");
  if (!c.sort().is_bool()) throw IllSortedConjecture("conjecture is not a Bool formula");
  if (!is_closed(c)) throw IllSortedConjecture("conjecture has free variables");
  Signature sig(task);
  try {
    sig.check(c);
  } catch (const SortError& e) {
    throw IllSortedConjecture(e.what());
  }
}

namespace {

std::string obligation(const Task& task, const std::vector<Term>& extra, bool with_goal) {
  for (const auto& c : extra) check_conjecture(task, c);
  std::ostringstream os;
  os << render_preamble(task) << render_declarations(task);
  for (const auto& a : task.axioms) os << "(assert " << render_term(a, task) << ")\n";
  for (const auto& c : extra) os << "(assert " << render_term(c, task) << ")\n";
  if (with_goal) os << "(assert (not " << render_term(task.goal, task) << "))\n";
  os << "(check-sat)\n";
  return os.str();
}

std::vector<Term> formulas(const std::vector<Conjecture>& cs) {
  std::vector<Term> out;
  out.reserve(cs.size());
  for (const auto& c : cs) out.push_back(c.formula);
  return out;
}

}  // namespace

std::string build_proof_obligation(const Task& task, const std::vector<Term>& conjectures) {
  return obligation(task, conjectures, true);
}

std::string build_proof_obligation(const Task& task, const std::vector<Conjecture>& conjectures) {
  return obligation(task, formulas(conjectures), true);
}

std::string build_consistency_obligation(const Task& task, const Term& c) {
  return obligation(task, {c}, false);
}

std::string build_consistency_obligation(const Task& task, const Conjecture& c) {
  return build_consistency_obligation(task, c.formula);
}

Task build_subgoal_task(const Task& task, const Term& c) {
  check_conjecture(task, c);
  return task.with_goal(c);
}

Task build_subgoal_task(const Task& task, const Conjecture& c) { return build_subgoal_task(task, c.formula); }

}  // namespace lemmaloop
