#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "lemmaloop/sexpr.hpp"
#include "lemmaloop/task.hpp"

namespace lemmaloop {

enum class ParseErrorKind {
  Syntax,
  Unsupported,
  UnknownSymbol,
  SortMismatch,
  NoGoalFound,
  MultipleGoals,
};

std::string to_string(ParseErrorKind kind);

class ParseError : public std::runtime_error {
 public:
  ParseError(ParseErrorKind kind, const std::string& message, SourceLoc loc = {});

  ParseErrorKind kind() const { return kind_; }
  SourceLoc loc() const { return loc_; }

 private:
  ParseErrorKind kind_;
  SourceLoc loc_;
};

/// Parse an SMT-LIB2 script in the benchmark fragment into a Task.
///
/// The goal is the single assert preceded by a `; proof goal` comment when
/// present (taken as written); otherwise the last assert, which must have
/// the form `(not G)`, contributes G. All other asserts are axioms. `match`
/// and `let` are desugared; `define-sort` aliases are expanded.
Task parse_script(std::string_view text, std::optional<std::string> source_path = std::nullopt);

/// Read and parse a file. Throws std::runtime_error if unreadable.
Task parse_file(const std::string& path);

/// Parse one closed Bool formula against `task`'s signature. An outer
/// `(assert ...)` wrapper is stripped.
Term parse_formula(std::string_view text, const Task& task);
Term parse_formula(const SExpr& expr, const Signature& sig);

std::string render_sort(const Sort& s);
/// Without a context, constructor applications of parametric datatypes are
/// always qualified with `(as C S)`; with one, only when the arguments leave
/// a type parameter undetermined.
std::string render_term(const Term& t);
std::string render_term(const Term& t, const Task& context);

/// Standard SMT-LIB2 text: declarations, one assert per axiom in order,
/// `(assert (not goal))`, `(check-sat)`.
std::string render_script(const Task& task);

/// Task text split into the three labeled sections shown to the model.
struct LabeledScript {
  std::string datatype_section;
  std::string function_section;
  std::string goal_section;
  std::string full_text;
};

inline constexpr std::string_view kDatatypeLabel = "; datatype definitions";
inline constexpr std::string_view kFunctionLabel = "; function definitions";
inline constexpr std::string_view kGoalLabel = "; proof goal";

/// Datatypes, then functions with their axioms, then the goal stated
/// positively under the goal label.
LabeledScript preprocess_label(const Task& task);

// Rendering helpers shared by the obligation builders.
std::string render_preamble(const Task& task);
std::string render_declarations(const Task& task);
std::string render_datatype_group(const DatatypeGroup& g);

}  // namespace lemmaloop
