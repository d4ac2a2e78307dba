#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lemmaloop/sexpr.hpp"
#include "lemmaloop/term.hpp"

namespace lemmaloop {

struct SortDecl {
  std::string name;
  int arity = 0;
};

struct Selector {
  std::string name;
  Sort sort;
};

struct Constructor {
  std::string name;
  std::vector<Selector> selectors;
};

struct DatatypeDecl {
  std::string name;
  /// Type parameters of a parametric datatype (`par (T) ...`).
  std::vector<std::string> params;
  std::vector<Constructor> constructors;

  Sort sort_with_params() const;
};

/// Datatypes declared together (mutually recursive, or a single one).
struct DatatypeGroup {
  std::vector<DatatypeDecl> decls;
};

enum class DefinitionForm {
  Uninterpreted,  ///< declare-fun with no defining axioms
  AxiomSet,       ///< declare-fun defined by quantified axioms in the task
  Defined,        ///< define-fun
  Recursive,      ///< define-fun-rec / define-funs-rec
};

struct FunctionDef {
  std::string name;
  /// Parameter names are empty for declare-fun.
  std::vector<Binding> params;
  Sort result;
  DefinitionForm form = DefinitionForm::Uninterpreted;
  std::optional<Term> body;
  /// Indices into Task::axioms of the axioms that define this symbol.
  std::vector<std::size_t> defining_axioms;
  /// Functions sharing a non-negative id were declared in one define-funs-rec.
  int rec_group = -1;

  std::vector<Sort> param_sorts() const;
};

/// A proof task: axioms A plus one goal P, to be shown by refuting A and not P.
struct Task {
  std::optional<std::string> logic;
  /// Raw `(set-option ...)` commands, kept for printing.
  std::vector<std::string> options;
  std::vector<SortDecl> sorts;
  std::vector<DatatypeGroup> datatypes;
  std::vector<FunctionDef> functions;
  std::vector<Term> axioms;
  Term goal;
  std::optional<std::string> source_path;

  /// Copy of this task with a different goal (axioms and declarations kept).
  Task with_goal(Term new_goal) const;
};

/// Structural equality up to alpha-renaming (source path, logic and options
/// are ignored).
bool alpha_equivalent(const Task& a, const Task& b);

class SortError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Symbol table for one task: declared sorts, datatypes with their
/// constructors/selectors/testers, and function signatures.
class Signature {
 public:
  struct ConstructorInfo {
    const DatatypeDecl* datatype;
    const Constructor* ctor;
  };
  struct SelectorInfo {
    const DatatypeDecl* datatype;
    const Constructor* ctor;
    std::size_t index;
  };
  struct FunctionInfo {
    std::vector<Sort> params;
    Sort result;
  };

  Signature() = default;
  explicit Signature(const Task& task);
  Signature(const Signature&) = delete;
  Signature& operator=(const Signature&) = delete;

  void add_sort(const SortDecl& s);
  void add_datatypes(const DatatypeGroup& g);
  void add_function(const std::string& name, FunctionInfo info);

  /// Arity of a sort constructor, or nullopt when undeclared.
  std::optional<int> sort_arity(const std::string& name) const;
  bool is_sort_declared(const Sort& s, const std::vector<std::string>& type_params = {}) const;

  const ConstructorInfo* constructor(const std::string& name) const;
  const SelectorInfo* selector(const std::string& name) const;
  const FunctionInfo* function(const std::string& name) const;
  const DatatypeDecl* datatype(const std::string& name) const;
  bool has_symbol(const std::string& name) const;

  /// Re-derive sorts bottom-up and compare with the annotations in `t`.
  /// Throws SortError on any unknown symbol or mismatch.
  void check(const Term& t) const;

 private:
  // Datatype groups are stored in nodes so the pointers above stay valid.
  std::vector<std::unique_ptr<DatatypeGroup>> groups_;
  std::map<std::string, int> sorts_;
  std::map<std::string, const DatatypeDecl*> datatypes_;
  std::map<std::string, ConstructorInfo> constructors_;
  std::map<std::string, SelectorInfo> selectors_;
  std::map<std::string, FunctionInfo> functions_;
};

/// Try to bind type parameters so that `pattern` equals `actual`.
bool unify_sort(const Sort& pattern, const Sort& actual, const std::vector<std::string>& params,
                std::map<std::string, Sort>& binding);

}  // namespace lemmaloop
