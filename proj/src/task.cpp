#include "lemmaloop/task.hpp"

#include <algorithm>
#include <set>

#include "lemmaloop/builtins.hpp"

namespace lemmaloop {

Sort DatatypeDecl::sort_with_params() const {
  Sort s{name, {}};
  for (const auto& p : params) s.args.push_back(Sort{p, {}});
  return s;
}

std::vector<Sort> FunctionDef::param_sorts() const {
  std::vector<Sort> out;
  out.reserve(params.size());
  for (const auto& p : params) out.push_back(p.sort);
  return out;
}

Task Task::with_goal(Term new_goal) const {
  Task t = *this;
  t.goal = std::move(new_goal);
  return t;
}

namespace {

bool same_datatype(const DatatypeDecl& a, const DatatypeDecl& b) {
  if (a.name != b.name || a.params != b.params) return false;
  if (a.constructors.size() != b.constructors.size()) return false;
  for (std::size_t i = 0; i < a.constructors.size(); ++i) {
    const auto& x = a.constructors[i];
    const auto& y = b.constructors[i];
    if (x.name != y.name || x.selectors.size() != y.selectors.size()) return false;
    for (std::size_t j = 0; j < x.selectors.size(); ++j) {
      if (x.selectors[j].name != y.selectors[j].name || !(x.selectors[j].sort == y.selectors[j].sort)) {
        return false;
      }
    }
  }
  return true;
}

// Function bodies are compared by closing them over their parameters.
std::optional<Term> closed_body(const FunctionDef& f) {
  if (!f.body) return std::nullopt;
  if (f.params.empty()) return *f.body;
  return Term::forall(f.params, *f.body);
}

}  // namespace

bool alpha_equivalent(const Task& a, const Task& b) {
  if (a.sorts.size() != b.sorts.size()) return false;
  for (std::size_t i = 0; i < a.sorts.size(); ++i) {
    if (a.sorts[i].name != b.sorts[i].name || a.sorts[i].arity != b.sorts[i].arity) return false;
  }
  if (a.datatypes.size() != b.datatypes.size()) return false;
  for (std::size_t i = 0; i < a.datatypes.size(); ++i) {
    const auto& x = a.datatypes[i].decls;
    const auto& y = b.datatypes[i].decls;
    if (x.size() != y.size()) return false;
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (!same_datatype(x[j], y[j])) return false;
    }
  }
  if (a.functions.size() != b.functions.size()) return false;
  for (std::size_t i = 0; i < a.functions.size(); ++i) {
    const auto& f = a.functions[i];
    const auto& g = b.functions[i];
    if (f.name != g.name || f.form != g.form || !(f.result == g.result)) return false;
    if (f.param_sorts() != g.param_sorts()) return false;
    if ((f.rec_group >= 0) != (g.rec_group >= 0)) return false;
    auto fb = closed_body(f);
    auto gb = closed_body(g);
    if (fb.has_value() != gb.has_value()) return false;
    if (fb && !alpha_equivalent(*fb, *gb)) return false;
  }
  if (a.axioms.size() != b.axioms.size()) return false;
  for (std::size_t i = 0; i < a.axioms.size(); ++i) {
    if (!alpha_equivalent(a.axioms[i], b.axioms[i])) return false;
  }
  if (a.goal.valid() != b.goal.valid()) return false;
  return !a.goal.valid() || alpha_equivalent(a.goal, b.goal);
}

Signature::Signature(const Task& task) {
  for (const auto& s : task.sorts) add_sort(s);
  for (const auto& g : task.datatypes) add_datatypes(g);
  for (const auto& f : task.functions) add_function(f.name, {f.param_sorts(), f.result});
}

void Signature::add_sort(const SortDecl& s) { sorts_[s.name] = s.arity; }

void Signature::add_datatypes(const DatatypeGroup& g) {
  groups_.push_back(std::make_unique<DatatypeGroup>(g));
  const DatatypeGroup& stored = *groups_.back();
  for (const auto& dt : stored.decls) {
    sorts_[dt.name] = static_cast<int>(dt.params.size());
    datatypes_[dt.name] = &dt;
    for (const auto& c : dt.constructors) {
      constructors_[c.name] = {&dt, &c};
      for (std::size_t i = 0; i < c.selectors.size(); ++i) {
        selectors_[c.selectors[i].name] = {&dt, &c, i};
      }
    }
  }
}

void Signature::add_function(const std::string& name, FunctionInfo info) {
  functions_[name] = std::move(info);
}

std::optional<int> Signature::sort_arity(const std::string& name) const {
  if (name == "Int" || name == "Bool") return 0;
  auto it = sorts_.find(name);
  if (it == sorts_.end()) return std::nullopt;
  return it->second;
}

bool Signature::is_sort_declared(const Sort& s, const std::vector<std::string>& type_params) const {
  if (s.args.empty() &&
      std::find(type_params.begin(), type_params.end(), s.name) != type_params.end()) {
    return true;
  }
  auto arity = sort_arity(s.name);
  if (!arity || *arity != static_cast<int>(s.args.size())) return false;
  return std::all_of(s.args.begin(), s.args.end(),
                     [&](const Sort& a) { return is_sort_declared(a, type_params); });
}

const Signature::ConstructorInfo* Signature::constructor(const std::string& name) const {
  auto it = constructors_.find(name);
  return it == constructors_.end() ? nullptr : &it->second;
}

const Signature::SelectorInfo* Signature::selector(const std::string& name) const {
  auto it = selectors_.find(name);
  return it == selectors_.end() ? nullptr : &it->second;
}

const Signature::FunctionInfo* Signature::function(const std::string& name) const {
  auto it = functions_.find(name);
  return it == functions_.end() ? nullptr : &it->second;
}

const DatatypeDecl* Signature::datatype(const std::string& name) const {
  auto it = datatypes_.find(name);
  return it == datatypes_.end() ? nullptr : it->second;
}

bool Signature::has_symbol(const std::string& name) const {
  return constructors_.count(name) || selectors_.count(name) || functions_.count(name);
}

bool unify_sort(const Sort& pattern, const Sort& actual, const std::vector<std::string>& params,
                std::map<std::string, Sort>& binding) {
  if (pattern.args.empty() &&
      std::find(params.begin(), params.end(), pattern.name) != params.end()) {
    auto it = binding.find(pattern.name);
    if (it == binding.end()) {
      binding.emplace(pattern.name, actual);
      return true;
    }
    return it->second == actual;
  }
  if (pattern.name != actual.name || pattern.args.size() != actual.args.size()) return false;
  for (std::size_t i = 0; i < pattern.args.size(); ++i) {
    if (!unify_sort(pattern.args[i], actual.args[i], params, binding)) return false;
  }
  return true;
}

namespace {

void check_rec(const Term& t, const Signature& sig, std::map<std::string, std::vector<Sort>>& scope) {
  switch (t.kind()) {
    case TermKind::IntLit:
      if (!t.sort().is_int()) throw SortError("integer literal with non-Int sort");
      return;
    case TermKind::BoolLit:
      if (!t.sort().is_bool()) throw SortError("Boolean literal with non-Bool sort");
      return;
    case TermKind::Var: {
      auto it = scope.find(t.name());
      if (it == scope.end() || it->second.empty()) {
        throw SortError("free variable '" + t.name() + "'");
      }
      if (!(it->second.back() == t.sort())) {
        throw SortError("variable '" + t.name() + "' used at sort " + t.sort().to_string() +
                        " but bound at " + it->second.back().to_string());
      }
      return;
    }
    case TermKind::Forall:
    case TermKind::Exists: {
      for (const auto& b : t.bound()) {
        if (!sig.is_sort_declared(b.sort)) {
          throw SortError("undeclared sort " + b.sort.to_string());
        }
        scope[b.name].push_back(b.sort);
      }
      check_rec(t.body(), sig, scope);
      for (const auto& b : t.bound()) scope[b.name].pop_back();
      if (!t.body().sort().is_bool()) throw SortError("quantifier body is not Bool");
      return;
    }
    case TermKind::App:
      break;
  }

  std::vector<Sort> arg_sorts;
  for (const auto& a : t.args()) {
    check_rec(a, sig, scope);
    arg_sorts.push_back(a.sort());
  }
  const std::string& sym = t.name();
  auto mismatch = [&](const std::string& why) {
    return SortError("ill-sorted application of '" + sym + "': " + why);
  };

  switch (t.app_kind()) {
    case AppKind::Builtin: {
      std::string err;
      auto res = builtin_result_sort(sym, arg_sorts, err);
      if (!res) throw mismatch(err);
      if (!(*res == t.sort())) throw mismatch("result sort annotation differs");
      return;
    }
    case AppKind::Function: {
      const auto* f = sig.function(sym);
      if (!f) throw SortError("unknown symbol '" + sym + "'");
      if (f->params != arg_sorts) throw mismatch("argument sorts differ from declaration");
      if (!(f->result == t.sort())) throw mismatch("result sort differs from declaration");
      return;
    }
    case AppKind::Constructor: {
      const auto* c = sig.constructor(sym);
      if (!c) throw SortError("unknown constructor '" + sym + "'");
      if (c->ctor->selectors.size() != arg_sorts.size()) throw mismatch("wrong arity");
      std::map<std::string, Sort> binding;
      if (!unify_sort(c->datatype->sort_with_params(), t.sort(), c->datatype->params, binding)) {
        throw mismatch("result sort is not an instance of " + c->datatype->name);
      }
      for (std::size_t i = 0; i < arg_sorts.size(); ++i) {
        if (!(substitute_sort(c->ctor->selectors[i].sort, binding) == arg_sorts[i])) {
          throw mismatch("argument " + std::to_string(i + 1) + " has the wrong sort");
        }
      }
      return;
    }
    case AppKind::Selector: {
      const auto* s = sig.selector(sym);
      if (!s) throw SortError("unknown selector '" + sym + "'");
      if (arg_sorts.size() != 1) throw mismatch("selectors take one argument");
      std::map<std::string, Sort> binding;
      if (!unify_sort(s->datatype->sort_with_params(), arg_sorts[0], s->datatype->params, binding)) {
        throw mismatch("argument is not of sort " + s->datatype->name);
      }
      if (!(substitute_sort(s->ctor->selectors[s->index].sort, binding) == t.sort())) {
        throw mismatch("result sort differs from declaration");
      }
      return;
    }
    case AppKind::Tester: {
      const auto* c = sig.constructor(sym);
      if (!c) throw SortError("unknown constructor '" + sym + "' in tester");
      if (arg_sorts.size() != 1) throw mismatch("testers take one argument");
      std::map<std::string, Sort> binding;
      if (!unify_sort(c->datatype->sort_with_params(), arg_sorts[0], c->datatype->params, binding)) {
        throw mismatch("argument is not of sort " + c->datatype->name);
      }
      if (!t.sort().is_bool()) throw mismatch("tester must be Bool");
      return;
    }
  }
}

}  // namespace

void Signature::check(const Term& t) const {
  std::map<std::string, std::vector<Sort>> scope;
  check_rec(t, *this, scope);
}

}  // namespace lemmaloop
