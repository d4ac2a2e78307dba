#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace lemmaloop {

/// A sort expression: `Int`, `Bool`, a declared sort, a datatype, or an
/// instance of a parametric datatype such as `(List Int)`. Datatype type
/// parameters appear as plain names inside declarations.
struct Sort {
  std::string name;
  std::vector<Sort> args;

  static Sort boolean() { return {"Bool", {}}; }
  static Sort integer() { return {"Int", {}}; }

  bool is_bool() const { return name == "Bool" && args.empty(); }
  bool is_int() const { return name == "Int" && args.empty(); }

  std::string to_string() const;

  friend bool operator==(const Sort&, const Sort&) = default;
  friend auto operator<=>(const Sort&, const Sort&) = default;
};

/// Replace parameter names in `s` according to `subst`.
Sort substitute_sort(const Sort& s, const std::map<std::string, Sort>& subst);

enum class TermKind { Var, IntLit, BoolLit, App, Forall, Exists };

/// What an application head refers to. Builtins cover the Core and Ints
/// operators (`not`, `and`, `=`, `ite`, `+`, `<=`, ...).
enum class AppKind { Builtin, Constructor, Selector, Tester, Function };

struct Binding {
  std::string name;
  Sort sort;

  friend bool operator==(const Binding&, const Binding&) = default;
};

class Term;

namespace detail {
struct TermNode;
}

/// Immutable, shareable formula/term tree. Copies are cheap.
class Term {
 public:
  Term() = default;

  static Term var(std::string name, Sort sort);
  static Term int_lit(std::string digits);
  static Term bool_lit(bool value);
  /// Generic application. `sort` is the result sort.
  static Term app(AppKind kind, std::string symbol, std::vector<Term> args, Sort sort);
  static Term quantifier(TermKind kind, std::vector<Binding> bound, Term body);
  static Term forall(std::vector<Binding> bound, Term body) {
    return quantifier(TermKind::Forall, std::move(bound), std::move(body));
  }
  static Term exists(std::vector<Binding> bound, Term body) {
    return quantifier(TermKind::Exists, std::move(bound), std::move(body));
  }

  // Boolean connective helpers.
  static Term not_(Term t);
  static Term eq(Term a, Term b);

  bool valid() const { return node_ != nullptr; }
  TermKind kind() const;
  AppKind app_kind() const;
  /// Variable name, literal spelling, or application symbol.
  const std::string& name() const;
  const Sort& sort() const;
  const std::vector<Term>& args() const;
  const std::vector<Binding>& bound() const;
  /// Quantifier body.
  const Term& body() const;

  bool is_quantifier() const {
    return valid() && (kind() == TermKind::Forall || kind() == TermKind::Exists);
  }
  bool is_app(std::string_view symbol) const;

  /// Exact structural equality (bound names must match too).
  friend bool operator==(const Term& a, const Term& b);

  std::size_t size() const;

 private:
  explicit Term(std::shared_ptr<const detail::TermNode> n) : node_(std::move(n)) {}
  std::shared_ptr<const detail::TermNode> node_;
};

namespace detail {
struct TermNode {
  TermKind kind = TermKind::App;
  AppKind app_kind = AppKind::Builtin;
  std::string name;
  Sort sort;
  std::vector<Term> args;
  std::vector<Binding> bound;
};
}  // namespace detail

/// Names of variables occurring free in `t`.
std::set<std::string> free_variables(const Term& t);

inline bool is_closed(const Term& t) { return free_variables(t).empty(); }

/// Capture-avoiding simultaneous substitution of free variables.
Term substitute(const Term& t, const std::map<std::string, Term>& subst);

/// Canonical form up to renaming of bound variables: binders are renamed
/// positionally (first bound variable met in a pre-order walk gets index 0,
/// and so on) and directly nested quantifiers of the same kind are merged.
/// No AC normalization is performed.
Term alpha_normalize(const Term& t);

bool alpha_equivalent(const Term& a, const Term& b);

/// Stable textual key for the alpha class of `t` (used for dedup and memo).
std::string alpha_key(const Term& t);

}  // namespace lemmaloop
