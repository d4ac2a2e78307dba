#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "lemmaloop/builtins.hpp"
#include "lemmaloop/smtlib.hpp"

namespace lemmaloop {

std::string to_string(ParseErrorKind kind) {
  switch (kind) {
    case ParseErrorKind::Syntax: return "Syntax";
    case ParseErrorKind::Unsupported: return "Unsupported";
    case ParseErrorKind::UnknownSymbol: return "UnknownSymbol";
    case ParseErrorKind::SortMismatch: return "SortMismatch";
    case ParseErrorKind::NoGoalFound: return "NoGoalFound";
    case ParseErrorKind::MultipleGoals: return "MultipleGoals";
  }
  return "Unknown";
}

ParseError::ParseError(ParseErrorKind kind, const std::string& message, SourceLoc loc)
    : std::runtime_error(to_string(kind) + " at " + std::to_string(loc.line) + ":" +
                         std::to_string(loc.column) + ": " + message),
      kind_(kind),
      loc_(loc) {}

namespace {

// Raised when a term's sort can only be fixed by its context, e.g. a bare
// nullary constructor of a parametric datatype.
struct NeedsContext {
  std::string symbol;
  SourceLoc loc;
};

[[noreturn]] void fail(ParseErrorKind kind, const std::string& msg, const SExpr& at) {
  throw ParseError(kind, msg, at.loc);
}

const std::string& symbol_text(const SExpr& e, const char* what) {
  if (!e.is_symbol()) fail(ParseErrorKind::Syntax, std::string("expected ") + what, e);
  return e.text;
}

struct SortAlias {
  std::vector<std::string> params;
  SExpr body;
};

class Elaborator {
 public:
  Elaborator(const Signature& sig, const std::map<std::string, SortAlias>& aliases)
      : sig_(sig), aliases_(aliases) {}

  Sort sort(const SExpr& e, const std::vector<std::string>& type_params = {}) const {
    if (e.is_symbol()) {
      if (std::find(type_params.begin(), type_params.end(), e.text) != type_params.end()) {
        return Sort{e.text, {}};
      }
      if (auto it = aliases_.find(e.text); it != aliases_.end()) {
        if (!it->second.params.empty()) fail(ParseErrorKind::SortMismatch, "sort alias needs arguments", e);
        return sort(it->second.body, type_params);
      }
      auto arity = sig_.sort_arity(e.text);
      if (!arity) fail(ParseErrorKind::UnknownSymbol, "unknown sort '" + e.text + "'", e);
      if (*arity != 0) fail(ParseErrorKind::SortMismatch, "sort '" + e.text + "' needs arguments", e);
      return Sort{e.text, {}};
    }
    if (!e.is_list() || e.size() < 2) fail(ParseErrorKind::Syntax, "malformed sort", e);
    const std::string& name = symbol_text(e[0], "sort name");
    std::vector<Sort> args;
    for (std::size_t i = 1; i < e.size(); ++i) args.push_back(sort(e[i], type_params));
    if (auto it = aliases_.find(name); it != aliases_.end()) {
      if (it->second.params.size() != args.size()) {
        fail(ParseErrorKind::SortMismatch, "wrong number of sort alias arguments", e);
      }
      std::map<std::string, Sort> subst;
      for (std::size_t i = 0; i < args.size(); ++i) subst[it->second.params[i]] = args[i];
      return substitute_sort(sort(it->second.body, it->second.params), subst);
    }
    auto arity = sig_.sort_arity(name);
    if (!arity) fail(ParseErrorKind::UnknownSymbol, "unknown sort '" + name + "'", e[0]);
    if (*arity != static_cast<int>(args.size())) {
      fail(ParseErrorKind::SortMismatch, "wrong number of arguments for sort '" + name + "'", e);
    }
    return Sort{name, std::move(args)};
  }

  void push(const std::string& name, const Sort& s) { scope_[name].push_back(s); }
  void pop(const std::string& name) { scope_[name].pop_back(); }

  /// Elaborate a formula that must be Bool; context-dependent sorts that
  /// cannot be resolved become SortMismatch errors.
  Term formula(const SExpr& e) {
    Term t = resolved(e, Sort::boolean());
    if (!t.sort().is_bool()) fail(ParseErrorKind::SortMismatch, "expected a Bool formula", e);
    return t;
  }

  Term resolved(const SExpr& e, const std::optional<Sort>& expected) {
    try {
      return term(e, expected);
    } catch (const NeedsContext& nc) {
      throw ParseError(ParseErrorKind::SortMismatch,
                       "cannot infer the sort of '" + nc.symbol + "'; qualify it with (as ...)", nc.loc);
    }
  }

  Term term(const SExpr& e, const std::optional<Sort>& expected) {
    switch (e.kind) {
      case SExpr::Kind::Numeral:
        return Term::int_lit(e.text);
      case SExpr::Kind::Symbol:
        return symbol(e, expected);
      case SExpr::Kind::List:
        return list(e, expected);
      default:
        fail(ParseErrorKind::Unsupported, "unexpected literal '" + e.to_string() + "'", e);
    }
  }

 private:
  Term symbol(const SExpr& e, const std::optional<Sort>& expected) {
    const std::string& name = e.text;
    if (auto it = scope_.find(name); it != scope_.end() && !it->second.empty()) {
      return Term::var(name, it->second.back());
    }
    if (name == "true") return Term::bool_lit(true);
    if (name == "false") return Term::bool_lit(false);
    if (const auto* c = sig_.constructor(name)) {
      if (!c->ctor->selectors.empty()) {
        fail(ParseErrorKind::SortMismatch, "constructor '" + name + "' expects arguments", e);
      }
      return nullary_constructor(*c, e, expected);
    }
    if (const auto* f = sig_.function(name)) {
      if (!f->params.empty()) {
        fail(ParseErrorKind::SortMismatch, "function '" + name + "' expects arguments", e);
      }
      return Term::app(AppKind::Function, name, {}, f->result);
    }
    fail(ParseErrorKind::UnknownSymbol, "unknown symbol '" + name + "'", e);
  }

  Term nullary_constructor(const Signature::ConstructorInfo& c, const SExpr& at,
                           const std::optional<Sort>& expected) {
    const DatatypeDecl& dt = *c.datatype;
    if (dt.params.empty()) return Term::app(AppKind::Constructor, c.ctor->name, {}, Sort{dt.name, {}});
    if (expected && expected->name == dt.name && expected->args.size() == dt.params.size()) {
      return Term::app(AppKind::Constructor, c.ctor->name, {}, *expected);
    }
    if (expected) {
      fail(ParseErrorKind::SortMismatch,
           "constructor '" + c.ctor->name + "' cannot have sort " + expected->to_string(), at);
    }
    throw NeedsContext{c.ctor->name, at.loc};
  }

  // Elaborate `args` in up to two passes so that context-dependent arguments
  // can use sorts learned from their siblings.
  std::vector<Term> elaborate_args(const std::vector<const SExpr*>& args,
                                   const std::function<std::optional<Sort>(std::size_t)>& expected_for,
                                   const std::function<void(std::size_t, const Term&)>& on_done) {
    std::vector<std::optional<Term>> out(args.size());
    for (int pass = 0; pass < 2; ++pass) {
      bool pending = false;
      for (std::size_t i = 0; i < args.size(); ++i) {
        if (out[i]) continue;
        try {
          out[i] = term(*args[i], expected_for(i));
          on_done(i, *out[i]);
        } catch (const NeedsContext&) {
          if (pass == 1) throw;
          pending = true;
        }
      }
      if (!pending) break;
    }
    std::vector<Term> result;
    result.reserve(out.size());
    for (auto& t : out) result.push_back(std::move(*t));
    return result;
  }

  static std::vector<const SExpr*> tail(const SExpr& e, std::size_t from = 1) {
    std::vector<const SExpr*> out;
    for (std::size_t i = from; i < e.size(); ++i) out.push_back(&e[i]);
    return out;
  }

  Term list(const SExpr& e, const std::optional<Sort>& expected) {
    if (e.size() == 0) fail(ParseErrorKind::Syntax, "empty application", e);
    const SExpr& head = e[0];
    if (head.is_list()) {
      if (head.has_head("_") && head.size() == 3 && head[1].is_symbol("is")) {
        return tester(symbol_text(head[2], "constructor name"), e, head[2]);
      }
      if (head.has_head("as") && head.size() == 3) {
        Sort qualified = sort(head[2]);
        Term t = application(symbol_text(head[1], "function symbol"), e, qualified);
        if (!(t.sort() == qualified)) fail(ParseErrorKind::SortMismatch, "qualified sort mismatch", e);
        return t;
      }
      fail(ParseErrorKind::Unsupported, "unsupported application head", head);
    }
    const std::string& name = symbol_text(head, "operator");
    if (name == "forall" || name == "exists") return quantifier(e);
    if (name == "let") return let(e, expected);
    if (name == "match") return match(e, expected);
    if (name == "!") {
      if (e.size() < 2) fail(ParseErrorKind::Syntax, "malformed annotation", e);
      return term(e[1], expected);
    }
    if (name == "as") {
      if (e.size() != 3) fail(ParseErrorKind::Syntax, "malformed (as ...)", e);
      Sort qualified = sort(e[2]);
      Term t = term(e[1], qualified);
      if (!(t.sort() == qualified)) fail(ParseErrorKind::SortMismatch, "qualified sort mismatch", e);
      return t;
    }
    if (scope_.count(name) && !scope_[name].empty()) {
      fail(ParseErrorKind::SortMismatch, "variable '" + name + "' applied to arguments", head);
    }
    if (is_builtin_operator(name) && !sig_.has_symbol(name)) return builtin(name, e, expected);
    if (!sig_.has_symbol(name) && name.rfind("is-", 0) == 0 && e.size() == 2 &&
        sig_.constructor(name.substr(3))) {
      return tester(name.substr(3), e, head);
    }
    return application(name, e, expected);
  }

  Term tester(const std::string& ctor, const SExpr& e, const SExpr& at) {
    const auto* c = sig_.constructor(ctor);
    if (!c) fail(ParseErrorKind::UnknownSymbol, "unknown constructor '" + ctor + "'", at);
    if (e.size() != 2) fail(ParseErrorKind::SortMismatch, "testers take one argument", e);
    Term arg = term(e[1], std::nullopt);
    std::map<std::string, Sort> binding;
    if (!unify_sort(c->datatype->sort_with_params(), arg.sort(), c->datatype->params, binding)) {
      fail(ParseErrorKind::SortMismatch, "tester argument is not of sort " + c->datatype->name, e[1]);
    }
    return Term::app(AppKind::Tester, ctor, {std::move(arg)}, Sort::boolean());
  }

  Term application(const std::string& name, const SExpr& e, const std::optional<Sort>& expected) {
    const std::size_t nargs = e.size() - 1;
    if (const auto* c = sig_.constructor(name)) {
      const DatatypeDecl& dt = *c->datatype;
      if (nargs == 0) return nullary_constructor(*c, e, expected);
      if (c->ctor->selectors.size() != nargs) {
        fail(ParseErrorKind::SortMismatch, "constructor '" + name + "' expects " +
                                               std::to_string(c->ctor->selectors.size()) + " arguments", e);
      }
      std::map<std::string, Sort> binding;
      if (expected && !unify_sort(dt.sort_with_params(), *expected, dt.params, binding)) {
        fail(ParseErrorKind::SortMismatch,
             "constructor '" + name + "' cannot produce sort " + expected->to_string(), e);
      }
      auto args = elaborate_args(
          tail(e),
          [&](std::size_t i) -> std::optional<Sort> {
            Sort s = substitute_sort(c->ctor->selectors[i].sort, binding);
            if (is_ground(s, dt.params)) return s;
            return std::nullopt;
          },
          [&](std::size_t i, const Term& t) {
            if (!unify_sort(c->ctor->selectors[i].sort, t.sort(), dt.params, binding)) {
              fail(ParseErrorKind::SortMismatch,
                   "argument " + std::to_string(i + 1) + " of '" + name + "' has sort " + t.sort().to_string(),
                   e[i + 1]);
            }
          });
      Sort result = substitute_sort(dt.sort_with_params(), binding);
      if (!is_ground(result, dt.params)) throw NeedsContext{name, e.loc};
      return Term::app(AppKind::Constructor, name, std::move(args), std::move(result));
    }
    if (const auto* s = sig_.selector(name)) {
      if (nargs != 1) fail(ParseErrorKind::SortMismatch, "selector '" + name + "' takes one argument", e);
      const DatatypeDecl& dt = *s->datatype;
      std::optional<Sort> arg_expected;
      if (dt.params.empty()) arg_expected = Sort{dt.name, {}};
      Term arg = term(e[1], arg_expected);
      std::map<std::string, Sort> binding;
      if (!unify_sort(dt.sort_with_params(), arg.sort(), dt.params, binding)) {
        fail(ParseErrorKind::SortMismatch,
             "selector '" + name + "' applied to sort " + arg.sort().to_string(), e[1]);
      }
      Sort result = substitute_sort(s->ctor->selectors[s->index].sort, binding);
      return Term::app(AppKind::Selector, name, {std::move(arg)}, std::move(result));
    }
    if (const auto* f = sig_.function(name)) {
      if (f->params.size() != nargs) {
        fail(ParseErrorKind::SortMismatch,
             "function '" + name + "' expects " + std::to_string(f->params.size()) + " arguments", e);
      }
      auto args = elaborate_args(
          tail(e), [&](std::size_t i) -> std::optional<Sort> { return f->params[i]; },
          [&](std::size_t i, const Term& t) {
            if (!(t.sort() == f->params[i])) {
              fail(ParseErrorKind::SortMismatch,
                   "argument " + std::to_string(i + 1) + " of '" + name + "' has sort " + t.sort().to_string() +
                       ", expected " + f->params[i].to_string(),
                   e[i + 1]);
            }
          });
      return Term::app(AppKind::Function, name, std::move(args), f->result);
    }
    fail(ParseErrorKind::UnknownSymbol, "unknown symbol '" + name + "'", e[0]);
  }

  static bool is_ground(const Sort& s, const std::vector<std::string>& params) {
    if (s.args.empty()) return std::find(params.begin(), params.end(), s.name) == params.end();
    return std::all_of(s.args.begin(), s.args.end(), [&](const Sort& a) { return is_ground(a, params); });
  }

  Term builtin(const std::string& op, const SExpr& e, const std::optional<Sort>& expected) {
    std::optional<Sort> common;
    std::function<std::optional<Sort>(std::size_t)> expect;
    std::function<void(std::size_t, const Term&)> done = [](std::size_t, const Term&) {};
    if (op == "=" || op == "distinct") {
      expect = [&](std::size_t) { return common; };
      done = [&](std::size_t, const Term& t) {
        if (!common) common = t.sort();
      };
    } else if (op == "ite") {
      expect = [&](std::size_t i) -> std::optional<Sort> {
        if (i == 0) return Sort::boolean();
        return common ? common : expected;
      };
      done = [&](std::size_t i, const Term& t) {
        if (i > 0 && !common) common = t.sort();
      };
    } else if (op == "not" || op == "and" || op == "or" || op == "xor" || op == "=>") {
      expect = [](std::size_t) { return std::optional<Sort>(Sort::boolean()); };
    } else {
      expect = [](std::size_t) { return std::optional<Sort>(Sort::integer()); };
    }
    auto args = elaborate_args(tail(e), expect, done);
    std::vector<Sort> sorts;
    for (const auto& a : args) sorts.push_back(a.sort());
    std::string err;
    auto result = builtin_result_sort(op, sorts, err);
    if (!result) fail(ParseErrorKind::SortMismatch, "'" + op + "' " + err, e);
    return Term::app(AppKind::Builtin, op, std::move(args), *result);
  }

  std::vector<Binding> bindings(const SExpr& list) {
    if (!list.is_list() || list.size() == 0) fail(ParseErrorKind::Syntax, "expected a binder list", list);
    std::vector<Binding> out;
    for (const auto& b : list.items) {
      if (!b.is_list() || b.size() != 2) fail(ParseErrorKind::Syntax, "malformed binder", b);
      out.push_back({symbol_text(b[0], "variable name"), sort(b[1])});
    }
    return out;
  }

  Term quantifier(const SExpr& e) {
    if (e.size() != 3) fail(ParseErrorKind::Syntax, "malformed quantifier", e);
    auto bound = bindings(e[1]);
    for (const auto& b : bound) push(b.name, b.sort);
    Term body = resolved(e[2], Sort::boolean());
    for (const auto& b : bound) pop(b.name);
    if (!body.sort().is_bool()) fail(ParseErrorKind::SortMismatch, "quantifier body must be Bool", e[2]);
    TermKind kind = e[0].text == "forall" ? TermKind::Forall : TermKind::Exists;
    return Term::quantifier(kind, std::move(bound), std::move(body));
  }

  Term let(const SExpr& e, const std::optional<Sort>& expected) {
    if (e.size() != 3 || !e[1].is_list()) fail(ParseErrorKind::Syntax, "malformed let", e);
    std::map<std::string, Term> values;
    std::vector<Binding> bound;
    for (const auto& b : e[1].items) {
      if (!b.is_list() || b.size() != 2) fail(ParseErrorKind::Syntax, "malformed let binding", b);
      Term v = term(b[1], std::nullopt);
      bound.push_back({symbol_text(b[0], "variable name"), v.sort()});
      values.insert_or_assign(bound.back().name, std::move(v));
    }
    for (const auto& b : bound) push(b.name, b.sort);
    Term body = term(e[2], expected);
    for (const auto& b : bound) pop(b.name);
    return substitute(body, values);
  }

  Term match(const SExpr& e, const std::optional<Sort>& expected) {
    if (e.size() != 3 || !e[2].is_list() || e[2].size() == 0) fail(ParseErrorKind::Syntax, "malformed match", e);
    Term scrutinee = term(e[1], std::nullopt);
    const DatatypeDecl* dt = sig_.datatype(scrutinee.sort().name);
    if (!dt) fail(ParseErrorKind::SortMismatch, "match on a non-datatype term", e[1]);
    std::map<std::string, Sort> binding;
    unify_sort(dt->sort_with_params(), scrutinee.sort(), dt->params, binding);

    struct Case {
      std::optional<std::string> ctor;  // nullopt: catch-all
      Term body;
    };
    std::vector<Case> cases;
    std::optional<Sort> result_sort = expected;
    for (const auto& c : e[2].items) {
      if (!c.is_list() || c.size() != 2) fail(ParseErrorKind::Syntax, "malformed match case", c);
      const SExpr& pat = c[0];
      std::map<std::string, Term> subst;
      std::vector<Binding> vars;
      std::optional<std::string> ctor;
      if (pat.is_symbol()) {
        const auto* ci = sig_.constructor(pat.text);
        if (ci && ci->datatype == dt) {
          ctor = pat.text;
        } else if (pat.text != "_") {
          vars.push_back({pat.text, scrutinee.sort()});
          subst.emplace(pat.text, scrutinee);
        }
      } else {
        if (!pat.is_list() || pat.size() == 0) fail(ParseErrorKind::Syntax, "malformed pattern", pat);
        const std::string& cname = symbol_text(pat[0], "constructor");
        const auto* ci = sig_.constructor(cname);
        if (!ci || ci->datatype != dt) fail(ParseErrorKind::UnknownSymbol, "'" + cname + "' is not a constructor of " + dt->name, pat[0]);
        if (ci->ctor->selectors.size() != pat.size() - 1) fail(ParseErrorKind::SortMismatch, "pattern arity mismatch", pat);
        ctor = cname;
        for (std::size_t i = 1; i < pat.size(); ++i) {
          const Selector& sel = ci->ctor->selectors[i - 1];
          Sort s = substitute_sort(sel.sort, binding);
          const std::string& v = symbol_text(pat[i], "pattern variable");
          vars.push_back({v, s});
          subst.insert_or_assign(v, Term::app(AppKind::Selector, sel.name, {scrutinee}, s));
        }
      }
      for (const auto& v : vars) push(v.name, v.sort);
      Term body = term(c[1], result_sort);
      for (const auto& v : vars) pop(v.name);
      if (result_sort && !(body.sort() == *result_sort)) fail(ParseErrorKind::SortMismatch, "match cases have different sorts", c[1]);
      result_sort = body.sort();
      cases.push_back({ctor, substitute(body, subst)});
    }
    // The first catch-all makes later cases unreachable.
    auto end = std::find_if(cases.begin(), cases.end(), [](const Case& c) { return !c.ctor; });
    if (end != cases.end()) ++end;
    std::vector<Case> live(cases.begin(), end);
    Term result = live.back().body;
    for (std::size_t i = live.size() - 1; i-- > 0;) {
      Term test = Term::app(AppKind::Tester, *live[i].ctor, {scrutinee}, Sort::boolean());
      result = Term::app(AppKind::Builtin, "ite", {test, live[i].body, result}, result.sort());
    }
    return result;
  }

  const Signature& sig_;
  const std::map<std::string, SortAlias>& aliases_;
  std::map<std::string, std::vector<Sort>> scope_;
};

std::string normalize_comment(const std::string& c) {
  std::string out;
  bool space = false;
  for (char ch : c) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      space = !out.empty();
      continue;
    }
    if (space) out.push_back(' ');
    space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  }
  return out;
}

bool is_goal_label(const std::vector<std::string>& comments) {
  return std::any_of(comments.begin(), comments.end(),
                     [](const std::string& c) { return normalize_comment(c) == "proof goal"; });
}

class ScriptParser {
 public:
  explicit ScriptParser(std::optional<std::string> source) { task_.source_path = std::move(source); }

  Task run(std::string_view text) {
    std::vector<SExpr> commands;
    try {
      commands = parse_sexprs(text);
    } catch (const SExprError& err) {
      throw ParseError(ParseErrorKind::Syntax, err.what(), err.loc());
    }
    for (const auto& cmd : commands) {
      if (!command(cmd)) break;
    }
    select_goal();
    classify_axioms();
    return std::move(task_);
  }

 private:
  struct PendingAssert {
    Term formula;
    bool labeled;
    SourceLoc loc;
  };

  Elaborator elaborator() { return Elaborator(sig_, aliases_); }

  // Returns false on (exit).
  bool command(const SExpr& cmd) {
    if (!cmd.is_list() || cmd.size() == 0 || !cmd[0].is_symbol()) {
      fail(ParseErrorKind::Syntax, "expected a command", cmd);
    }
    const std::string& name = cmd[0].text;
    if (name == "set-logic") {
      if (cmd.size() != 2) fail(ParseErrorKind::Syntax, "malformed set-logic", cmd);
      task_.logic = symbol_text(cmd[1], "logic name");
    } else if (name == "set-option") {
      task_.options.push_back(cmd.to_string());
    } else if (name == "set-info" || name == "check-sat" || name == "echo" || name.rfind("get-", 0) == 0) {
      // No effect on the task.
    } else if (name == "exit") {
      return false;
    } else if (name == "declare-sort") {
      declare_sort(cmd);
    } else if (name == "define-sort") {
      define_sort(cmd);
    } else if (name == "declare-datatype") {
      if (cmd.size() != 3) fail(ParseErrorKind::Syntax, "malformed declare-datatype", cmd);
      const std::string& dt = symbol_text(cmd[1], "datatype name");
      int arity = cmd[2].has_head("par") && cmd[2].size() == 3 ? static_cast<int>(cmd[2][1].size()) : 0;
      datatypes({{dt, arity}}, {&cmd[2]}, cmd, /*legacy_params=*/nullptr);
    } else if (name == "declare-datatypes") {
      declare_datatypes(cmd);
    } else if (name == "declare-fun") {
      declare_fun(cmd);
    } else if (name == "declare-const") {
      if (cmd.size() != 3) fail(ParseErrorKind::Syntax, "malformed declare-const", cmd);
      FunctionDef f;
      f.name = fresh_symbol(cmd[1]);
      f.result = elaborator().sort(cmd[2]);
      add_function(std::move(f));
    } else if (name == "define-fun" || name == "define-fun-rec") {
      define_fun(cmd, name == "define-fun-rec");
    } else if (name == "define-funs-rec") {
      define_funs_rec(cmd);
    } else if (name == "assert") {
      if (cmd.size() != 2) fail(ParseErrorKind::Syntax, "malformed assert", cmd);
      Elaborator el = elaborator();
      asserts_.push_back({el.formula(cmd[1]), is_goal_label(cmd.leading_comments), cmd.loc});
    } else {
      fail(ParseErrorKind::Unsupported, "unsupported command '" + name + "'", cmd);
    }
    return true;
  }

  std::string fresh_symbol(const SExpr& e) {
    const std::string& name = symbol_text(e, "symbol");
    if (sig_.has_symbol(name) || is_builtin_operator(name) || name == "true" || name == "false") {
      fail(ParseErrorKind::Syntax, "symbol '" + name + "' is already declared", e);
    }
    return name;
  }

  void add_function(FunctionDef f) {
    sig_.add_function(f.name, {f.param_sorts(), f.result});
    task_.functions.push_back(std::move(f));
  }

  void declare_sort(const SExpr& cmd) {
    if (cmd.size() < 2 || cmd.size() > 3) fail(ParseErrorKind::Syntax, "malformed declare-sort", cmd);
    SortDecl s{symbol_text(cmd[1], "sort name"), 0};
    if (sig_.sort_arity(s.name)) fail(ParseErrorKind::Syntax, "sort '" + s.name + "' already declared", cmd[1]);
    if (cmd.size() == 3) {
      if (!cmd[2].is_numeral()) fail(ParseErrorKind::Syntax, "expected sort arity", cmd[2]);
      s.arity = std::stoi(cmd[2].text);
    }
    sig_.add_sort(s);
    task_.sorts.push_back(std::move(s));
  }

  void define_sort(const SExpr& cmd) {
    if (cmd.size() != 4 || !cmd[2].is_list()) fail(ParseErrorKind::Syntax, "malformed define-sort", cmd);
    SortAlias alias;
    for (const auto& p : cmd[2].items) alias.params.push_back(symbol_text(p, "sort parameter"));
    alias.body = cmd[3];
    elaborator().sort(alias.body, alias.params);  // validate now
    aliases_[symbol_text(cmd[1], "sort name")] = std::move(alias);
  }

  void declare_datatypes(const SExpr& cmd) {
    if (cmd.size() != 3 || !cmd[1].is_list() || !cmd[2].is_list()) {
      fail(ParseErrorKind::Syntax, "malformed declare-datatypes", cmd);
    }
    const SExpr& heads = cmd[1];
    bool modern = heads.size() > 0 && std::all_of(heads.items.begin(), heads.items.end(),
                                                  [](const SExpr& h) { return h.is_list(); });
    if (modern) {
      if (heads.size() != cmd[2].size()) fail(ParseErrorKind::Syntax, "datatype count mismatch", cmd);
      std::vector<std::pair<std::string, int>> names;
      std::vector<const SExpr*> bodies;
      for (std::size_t i = 0; i < heads.size(); ++i) {
        const SExpr& h = heads[i];
        if (h.size() != 2 || !h[1].is_numeral()) fail(ParseErrorKind::Syntax, "malformed datatype head", h);
        names.emplace_back(symbol_text(h[0], "datatype name"), std::stoi(h[1].text));
        bodies.push_back(&cmd[2][i]);
      }
      datatypes(names, bodies, cmd, nullptr);
      return;
    }
    // SMT-LIB 2.5: (declare-datatypes (T ...) ((Name ctor ...) ...))
    std::vector<std::string> params;
    for (const auto& p : heads.items) params.push_back(symbol_text(p, "type parameter"));
    std::vector<std::pair<std::string, int>> names;
    std::vector<const SExpr*> bodies;
    for (const auto& d : cmd[2].items) {
      if (!d.is_list() || d.size() < 2) fail(ParseErrorKind::Syntax, "malformed datatype declaration", d);
      names.emplace_back(symbol_text(d[0], "datatype name"), static_cast<int>(params.size()));
      bodies.push_back(&d);
    }
    datatypes(names, bodies, cmd, &params);
  }

  // `bodies[i]` is a constructor list, a `(par ...)` form, or (legacy) a
  // `(Name ctor ...)` list whose constructors start at index 1.
  void datatypes(const std::vector<std::pair<std::string, int>>& names, const std::vector<const SExpr*>& bodies,
                 const SExpr& cmd, const std::vector<std::string>* legacy_params) {
    for (const auto& [n, arity] : names) {
      if (sig_.sort_arity(n)) fail(ParseErrorKind::Syntax, "sort '" + n + "' already declared", cmd);
      sig_.add_sort({n, arity});
    }
    DatatypeGroup group;
    std::set<std::string> seen;
    Elaborator el = elaborator();
    for (std::size_t i = 0; i < names.size(); ++i) {
      DatatypeDecl dt;
      dt.name = names[i].first;
      const SExpr* ctors = bodies[i];
      std::size_t first = 0;
      if (legacy_params) {
        dt.params = *legacy_params;
        first = 1;
      } else if (ctors->has_head("par")) {
        if (ctors->size() != 3 || !(*ctors)[1].is_list()) fail(ParseErrorKind::Syntax, "malformed par", *ctors);
        for (const auto& p : (*ctors)[1].items) dt.params.push_back(symbol_text(p, "type parameter"));
        ctors = &(*ctors)[2];
      }
      if (static_cast<int>(dt.params.size()) != names[i].second) {
        fail(ParseErrorKind::SortMismatch, "datatype '" + dt.name + "' arity mismatch", *bodies[i]);
      }
      if (!ctors->is_list()) fail(ParseErrorKind::Syntax, "expected constructor list", *ctors);
      for (std::size_t k = first; k < ctors->size(); ++k) {
        const SExpr& c = (*ctors)[k];
        Constructor ctor;
        if (c.is_symbol()) {
          ctor.name = c.text;
        } else {
          if (!c.is_list() || c.size() == 0) fail(ParseErrorKind::Syntax, "malformed constructor", c);
          ctor.name = symbol_text(c[0], "constructor name");
          for (std::size_t s = 1; s < c.size(); ++s) {
            const SExpr& sel = c[s];
            if (!sel.is_list() || sel.size() != 2) fail(ParseErrorKind::Syntax, "malformed selector", sel);
            Selector selector{symbol_text(sel[0], "selector name"), el.sort(sel[1], dt.params)};
            if (!seen.insert(selector.name).second || sig_.has_symbol(selector.name)) {
              fail(ParseErrorKind::Syntax, "duplicate symbol '" + selector.name + "'", sel[0]);
            }
            ctor.selectors.push_back(std::move(selector));
          }
        }
        if (!seen.insert(ctor.name).second || sig_.has_symbol(ctor.name)) {
          fail(ParseErrorKind::Syntax, "duplicate symbol '" + ctor.name + "'", c);
        }
        dt.constructors.push_back(std::move(ctor));
      }
      if (dt.constructors.empty()) fail(ParseErrorKind::Syntax, "datatype without constructors", *bodies[i]);
      group.decls.push_back(std::move(dt));
    }
    sig_.add_datatypes(group);
    task_.datatypes.push_back(std::move(group));
  }

  void declare_fun(const SExpr& cmd) {
    if (cmd.size() != 4 || !cmd[2].is_list()) fail(ParseErrorKind::Syntax, "malformed declare-fun", cmd);
    Elaborator el = elaborator();
    FunctionDef f;
    f.name = fresh_symbol(cmd[1]);
    for (const auto& s : cmd[2].items) f.params.push_back({"", el.sort(s)});
    f.result = el.sort(cmd[3]);
    add_function(std::move(f));
  }

  FunctionDef signature_of(const SExpr& name, const SExpr& params, const SExpr& result) {
    if (!params.is_list()) fail(ParseErrorKind::Syntax, "expected parameter list", params);
    Elaborator el = elaborator();
    FunctionDef f;
    f.name = fresh_symbol(name);
    for (const auto& p : params.items) {
      if (!p.is_list() || p.size() != 2) fail(ParseErrorKind::Syntax, "malformed parameter", p);
      f.params.push_back({symbol_text(p[0], "parameter name"), el.sort(p[1])});
    }
    f.result = el.sort(result);
    return f;
  }

  Term body_of(const FunctionDef& f, const SExpr& body) {
    Elaborator el = elaborator();
    for (const auto& p : f.params) el.push(p.name, p.sort);
    Term t = el.resolved(body, f.result);
    if (!(t.sort() == f.result)) {
      fail(ParseErrorKind::SortMismatch,
           "body of '" + f.name + "' has sort " + t.sort().to_string() + ", expected " + f.result.to_string(), body);
    }
    return t;
  }

  void define_fun(const SExpr& cmd, bool recursive) {
    if (cmd.size() != 5) fail(ParseErrorKind::Syntax, "malformed function definition", cmd);
    FunctionDef f = signature_of(cmd[1], cmd[2], cmd[3]);
    f.form = recursive ? DefinitionForm::Recursive : DefinitionForm::Defined;
    if (recursive) sig_.add_function(f.name, {f.param_sorts(), f.result});
    f.body = body_of(f, cmd[4]);
    add_function(std::move(f));
  }

  void define_funs_rec(const SExpr& cmd) {
    if (cmd.size() != 3 || !cmd[1].is_list() || !cmd[2].is_list() || cmd[1].size() != cmd[2].size()) {
      fail(ParseErrorKind::Syntax, "malformed define-funs-rec", cmd);
    }
    std::vector<FunctionDef> fs;
    for (const auto& decl : cmd[1].items) {
      if (!decl.is_list() || decl.size() != 3) fail(ParseErrorKind::Syntax, "malformed function declaration", decl);
      fs.push_back(signature_of(decl[0], decl[1], decl[2]));
      fs.back().form = DefinitionForm::Recursive;
      fs.back().rec_group = next_rec_group_;
      sig_.add_function(fs.back().name, {fs.back().param_sorts(), fs.back().result});
    }
    ++next_rec_group_;
    for (std::size_t i = 0; i < fs.size(); ++i) fs[i].body = body_of(fs[i], cmd[2][i]);
    for (auto& f : fs) task_.functions.push_back(std::move(f));
  }

  void select_goal() {
    std::vector<std::size_t> labeled;
    for (std::size_t i = 0; i < asserts_.size(); ++i) {
      if (asserts_[i].labeled) labeled.push_back(i);
    }
    std::optional<std::size_t> goal;
    if (labeled.size() > 1) {
      throw ParseError(ParseErrorKind::MultipleGoals, "more than one assert is labeled as the proof goal",
                       asserts_[labeled[1]].loc);
    }
    if (labeled.size() == 1) {
      goal = labeled.front();
      task_.goal = asserts_[*goal].formula;
    } else if (!asserts_.empty() && asserts_.back().formula.is_app("not")) {
      goal = asserts_.size() - 1;
      task_.goal = asserts_.back().formula.args().front();
    } else {
      throw ParseError(ParseErrorKind::NoGoalFound,
                       "no negated trailing assert and no '; proof goal' labeled assert",
                       asserts_.empty() ? SourceLoc{} : asserts_.back().loc);
    }
    for (std::size_t i = 0; i < asserts_.size(); ++i) {
      if (i != *goal) task_.axioms.push_back(asserts_[i].formula);
    }
  }

  static std::optional<std::string> defined_symbol(const Term& axiom) {
    const Term* t = &axiom;
    while (t->kind() == TermKind::Forall) t = &t->body();
    if (t->is_app("=>")) t = &t->args().back();
    if (t->is_app("=") && t->args().size() == 2) t = &t->args().front();
    else if (t->is_app("not")) t = &t->args().front();
    if (t->kind() == TermKind::App && t->app_kind() == AppKind::Function) return t->name();
    return std::nullopt;
  }

  void classify_axioms() {
    std::map<std::string, FunctionDef*> declared;
    for (auto& f : task_.functions) {
      if (f.form == DefinitionForm::Uninterpreted) declared[f.name] = &f;
    }
    for (std::size_t i = 0; i < task_.axioms.size(); ++i) {
      auto sym = defined_symbol(task_.axioms[i]);
      if (!sym) continue;
      if (auto it = declared.find(*sym); it != declared.end()) {
        it->second->defining_axioms.push_back(i);
        it->second->form = DefinitionForm::AxiomSet;
      }
    }
  }

  Task task_;
  Signature sig_;
  std::map<std::string, SortAlias> aliases_;
  std::vector<PendingAssert> asserts_;
  int next_rec_group_ = 0;
};

}  // namespace

Task parse_script(std::string_view text, std::optional<std::string> source_path) {
  return ScriptParser(std::move(source_path)).run(text);
}

Task parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_script(buf.str(), path);
}

Term parse_formula(const SExpr& expr, const Signature& sig) {
  const SExpr* e = &expr;
  if (e->has_head("assert")) {
    if (e->size() != 2) fail(ParseErrorKind::Syntax, "malformed assert", *e);
    e = &(*e)[1];
  }
  static const std::map<std::string, SortAlias> no_aliases;
  Elaborator el(sig, no_aliases);
  return el.formula(*e);
}

Term parse_formula(std::string_view text, const Task& task) {
  SExpr e;
  try {
    e = parse_single_sexpr(text);
  } catch (const SExprError& err) {
    throw ParseError(ParseErrorKind::Syntax, err.what(), err.loc());
  }
  Signature sig(task);
  return parse_formula(e, sig);
}

}  // namespace lemmaloop
