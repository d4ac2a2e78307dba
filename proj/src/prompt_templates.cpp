#include "lemmaloop/llm.hpp"

namespace lemmaloop {

namespace {

// Templates are kept byte-for-byte, trailing spaces included.
constexpr std::string_view kStrategy1 = R"PROMPT([Task Description]

You are an expert in constraint solving, inductive reasoning, and functional program verification. 
You are good at extracting information from SMTLIB2 files, reasoning about them, and generating necessary conjectures as auxiliary lemmas to help SMT solvers complete automatic proofs.
- Input format:
The input is an SMTLIB2 file. It contains: datatypes, function definitions, and the proof goal, each marked with ";" comments.
  
[Chain-of-Thought]

Please generate auxiliary lemmas using inductive equational reasoning step by step:
1) Identify the proof goal and list relevant axioms.
2) Assume the SMT solver already knows the induction scheme; you need to generate auxiliary lemmas to help the inductive reasoning.
3) Inductive proof setup:
   - Determine whether the base case requires auxiliary lemmas.
   - Derive the inductive case using equational reasoning.
4) Equational reasoning:
   - Transform the left-hand side of the property step by step, annotating axiom/hypothesis usage.
   - When a step cannot be derived, generate it as a conjecture, annotated as "unknown conjecture", which will be checked by SMT solvers to ensure it is an auxiliary lemma.

[Output Format]

- Please output all the "unknown conjectures" you discover through equational reasoning, but do not generate too many conjectures (at most 3 is recommended).
- Do not generate conjectures that are identical to the original property.
- Output each "unknown conjecture" in SMTLIB2 format on a single line.

[Input file]

{ Input SMTLIB2 file })PROMPT";

constexpr std::string_view kStrategy2 = R"PROMPT([Task Description]

You are an expert in constraint solving, inductive reasoning, and functional program verification. 
You are good at extracting information from SMTLIB2 files, reasoning about them, and generating necessary conjectures as auxiliary lemmas to help SMT solvers complete automatic proofs.
- Input format:
The input is an SMTLIB2 file. It contains: datatypes, function definitions, and the proof goal, each marked with ";" comments.
  
[Chain-of-Thought]

Please generate auxiliary lemmas using the following ideas:
1) Generate basic axioms to help the SMT solver simplify the proof goal.
2) Strengthen the proof goal, e.g., to prove the proof goal P under axioms A, find a stronger conclusion Q, such that A => Q and Q => P hold, and both are easier to prove than A => P.
3) Based on term rewriting to simplify the proof goal:
   - Try to find the pattern term of the proof goal, and rewrite it to a simpler form.
   - If no common term exists, try to rewrite terms in the proof goal using axioms to have a common term.
   - If you think the auxiliary lemma derived from the term rewriting is not sufficient, generate a new auxiliary lemma that bridges it to the proof goal. 
4) Identify the conjectures from the above chain of thought, annotated as "unknown conjectures", which will be checked by SMT solvers to ensure they are auxiliary lemmas.
  
[Output Format]

- Please output all the "unknown conjectures" you discovered through reasoning, but do not generate too many conjectures (at most 3 is recommended).
- Do not generate conjectures that are identical to the proof goal.
- Output each "unknown conjecture" in SMTLIB2 format on a single line.

[Input file]

{ Input SMTLIB2 file })PROMPT";

constexpr std::string_view kNaive = R"PROMPT(You are an expert in constraint solving, inductive reasoning, and functional program verification. 
Please generate auxiliary lemmas in SMTLIB2 format to add to the following file, which can help the solver verify the property.

  { Input SMTLIB2 file })PROMPT";

}  // namespace

std::string_view prompt_template(PromptStrategy s) {
  switch (s) {
    case PromptStrategy::Strategy1: return kStrategy1;
    case PromptStrategy::Strategy2: return kStrategy2;
    case PromptStrategy::Naive: return kNaive;
  }
  return kNaive;
}

}  // namespace lemmaloop
