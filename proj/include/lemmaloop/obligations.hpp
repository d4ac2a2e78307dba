#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "lemmaloop/conjecture.hpp"
#include "lemmaloop/task.hpp"

namespace lemmaloop {

class IllSortedConjecture : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Throws IllSortedConjecture unless `c` is a closed, well-sorted Bool
/// formula over `task`'s signature.
void check_conjecture(const Task& task, const Term& c);

/// Axioms, then each conjecture, then `(not goal)`, then `(check-sat)`.
/// Unsat means the conjectures (possibly none) suffice for the goal.
std::string build_proof_obligation(const Task& task, const std::vector<Conjecture>& conjectures);
std::string build_proof_obligation(const Task& task, const std::vector<Term>& conjectures);

/// Axioms plus `c` asserted positively; the goal is left out.
/// Unsat means `c` contradicts the axioms.
std::string build_consistency_obligation(const Task& task, const Conjecture& c);
std::string build_consistency_obligation(const Task& task, const Term& c);

/// Same declarations and axioms, goal replaced by `c`.
Task build_subgoal_task(const Task& task, const Conjecture& c);
Task build_subgoal_task(const Task& task, const Term& c);

}  // namespace lemmaloop
