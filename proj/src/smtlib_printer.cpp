#include <sstream>

#include "lemmaloop/smtlib.hpp"

namespace lemmaloop {

namespace {

void write_sort(const Sort& s, std::ostream& os) {
  if (s.args.empty()) {
    os << quote_symbol(s.name);
    return;
  }
  os << '(' << quote_symbol(s.name);
  for (const auto& a : s.args) {
    os << ' ';
    write_sort(a, os);
  }
  os << ')';
}

const DatatypeDecl* find_datatype(const Task* ctx, const std::string& name) {
  if (!ctx) return nullptr;
  for (const auto& g : ctx->datatypes) {
    for (const auto& d : g.decls) {
      if (d.name == name) return &d;
    }
  }
  return nullptr;
}

// Whether a parametric constructor application needs `(as C S)` because its
// arguments do not pin down every type parameter.
bool needs_qualification(const Term& t, const Task* ctx) {
  const DatatypeDecl* dt = find_datatype(ctx, t.sort().name);
  if (!dt) return true;
  for (const auto& c : dt->constructors) {
    if (c.name != t.name() || c.selectors.size() != t.args().size()) continue;
    std::map<std::string, Sort> binding;
    for (std::size_t i = 0; i < c.selectors.size(); ++i) {
      if (!unify_sort(c.selectors[i].sort, t.args()[i].sort(), dt->params, binding)) return true;
    }
    return binding.size() != dt->params.size();
  }
  return true;
}

void write_term(const Term& t, std::ostream& os, const Task* ctx) {
  switch (t.kind()) {
    case TermKind::Var:
      os << quote_symbol(t.name());
      return;
    case TermKind::IntLit:
    case TermKind::BoolLit:
      os << t.name();
      return;
    case TermKind::Forall:
    case TermKind::Exists:
      os << (t.kind() == TermKind::Forall ? "(forall (" : "(exists (");
      for (std::size_t i = 0; i < t.bound().size(); ++i) {
        if (i) os << ' ';
        os << '(' << quote_symbol(t.bound()[i].name) << ' ';
        write_sort(t.bound()[i].sort, os);
        os << ')';
      }
      os << ") ";
      write_term(t.body(), os, ctx);
      os << ')';
      return;
    case TermKind::App:
      break;
  }
  if (t.app_kind() == AppKind::Tester) {
    os << "((_ is " << quote_symbol(t.name()) << ") ";
    write_term(t.args().front(), os, ctx);
    os << ')';
    return;
  }
  const bool builtin = t.app_kind() == AppKind::Builtin;
  const std::string head = builtin ? t.name() : quote_symbol(t.name());
  if (t.args().empty()) {
    // Nullary constructors of parametric datatypes need their sort spelled out.
    if (t.app_kind() == AppKind::Constructor && !t.sort().args.empty()) {
      os << "(as " << head << ' ';
      write_sort(t.sort(), os);
      os << ')';
    } else {
      os << head;
    }
    return;
  }
  os << '(';
  if (t.app_kind() == AppKind::Constructor && !t.sort().args.empty() && needs_qualification(t, ctx)) {
    os << "(as " << head << ' ';
    write_sort(t.sort(), os);
    os << ')';
  } else {
    os << head;
  }
  for (const auto& a : t.args()) {
    os << ' ';
    write_term(a, os, ctx);
  }
  os << ')';
}

void write_constructors(const DatatypeDecl& dt, std::ostream& os) {
  os << '(';
  for (std::size_t i = 0; i < dt.constructors.size(); ++i) {
    const auto& c = dt.constructors[i];
    if (i) os << ' ';
    os << '(' << quote_symbol(c.name);
    for (const auto& s : c.selectors) {
      os << " (" << quote_symbol(s.name) << ' ';
      write_sort(s.sort, os);
      os << ')';
    }
    os << ')';
  }
  os << ')';
}

void write_datatype_body(const DatatypeDecl& dt, std::ostream& os) {
  if (dt.params.empty()) {
    write_constructors(dt, os);
    return;
  }
  os << "(par (";
  for (std::size_t i = 0; i < dt.params.size(); ++i) {
    if (i) os << ' ';
    os << quote_symbol(dt.params[i]);
  }
  os << ") ";
  write_constructors(dt, os);
  os << ')';
}

void write_params(const FunctionDef& f, std::ostream& os) {
  os << '(';
  for (std::size_t i = 0; i < f.params.size(); ++i) {
    if (i) os << ' ';
    os << '(' << quote_symbol(f.params[i].name) << ' ';
    write_sort(f.params[i].sort, os);
    os << ')';
  }
  os << ')';
}

void write_functions(const Task& task, std::ostream& os) {
  std::vector<bool> done(task.functions.size(), false);
  for (std::size_t i = 0; i < task.functions.size(); ++i) {
    if (done[i]) continue;
    const FunctionDef& f = task.functions[i];
    if (f.rec_group >= 0) {
      std::vector<const FunctionDef*> group;
      for (std::size_t j = i; j < task.functions.size(); ++j) {
        if (task.functions[j].rec_group == f.rec_group) {
          group.push_back(&task.functions[j]);
          done[j] = true;
        }
      }
      os << "(define-funs-rec (";
      for (std::size_t k = 0; k < group.size(); ++k) {
        if (k) os << ' ';
        os << '(' << quote_symbol(group[k]->name) << ' ';
        write_params(*group[k], os);
        os << ' ';
        write_sort(group[k]->result, os);
        os << ')';
      }
      os << ") (";
      for (std::size_t k = 0; k < group.size(); ++k) {
        if (k) os << ' ';
        write_term(*group[k]->body, os, &task);
      }
      os << "))\n";
      continue;
    }
    switch (f.form) {
      case DefinitionForm::Uninterpreted:
      case DefinitionForm::AxiomSet:
        os << "(declare-fun " << quote_symbol(f.name) << " (";
        for (std::size_t k = 0; k < f.params.size(); ++k) {
          if (k) os << ' ';
          write_sort(f.params[k].sort, os);
        }
        os << ") ";
        write_sort(f.result, os);
        os << ")\n";
        break;
      case DefinitionForm::Defined:
      case DefinitionForm::Recursive:
        os << (f.form == DefinitionForm::Defined ? "(define-fun " : "(define-fun-rec ") << quote_symbol(f.name)
           << ' ';
        write_params(f, os);
        os << ' ';
        write_sort(f.result, os);
        os << ' ';
        write_term(*f.body, os, &task);
        os << ")\n";
        break;
    }
  }
}

void write_sorts_and_datatypes(const Task& task, std::ostream& os) {
  for (const auto& s : task.sorts) os << "(declare-sort " << quote_symbol(s.name) << ' ' << s.arity << ")\n";
  for (const auto& g : task.datatypes) os << render_datatype_group(g) << '\n';
}

void write_axioms(const Task& task, std::ostream& os) {
  for (const auto& a : task.axioms) os << "(assert " << render_term(a, task) << ")\n";
}

}  // namespace

std::string render_sort(const Sort& s) {
  std::ostringstream os;
  write_sort(s, os);
  return os.str();
}

std::string render_term(const Term& t) {
  std::ostringstream os;
  write_term(t, os, nullptr);
  return os.str();
}

std::string render_term(const Term& t, const Task& context) {
  std::ostringstream os;
  write_term(t, os, &context);
  return os.str();
}

std::string render_datatype_group(const DatatypeGroup& g) {
  std::ostringstream os;
  if (g.decls.size() == 1) {
    const auto& dt = g.decls.front();
    os << "(declare-datatype " << quote_symbol(dt.name) << ' ';
    write_datatype_body(dt, os);
    os << ')';
    return os.str();
  }
  os << "(declare-datatypes (";
  for (std::size_t i = 0; i < g.decls.size(); ++i) {
    if (i) os << ' ';
    os << '(' << quote_symbol(g.decls[i].name) << ' ' << g.decls[i].params.size() << ')';
  }
  os << ") (";
  for (std::size_t i = 0; i < g.decls.size(); ++i) {
    if (i) os << ' ';
    write_datatype_body(g.decls[i], os);
  }
  os << "))";
  return os.str();
}

std::string render_preamble(const Task& task) {
  std::ostringstream os;
  if (task.logic) os << "(set-logic " << *task.logic << ")\n";
  for (const auto& o : task.options) os << o << '\n';
  return os.str();
}

std::string render_declarations(const Task& task) {
  std::ostringstream os;
  write_sorts_and_datatypes(task, os);
  write_functions(task, os);
  return os.str();
}

std::string render_script(const Task& task) {
  std::ostringstream os;
  os << render_preamble(task) << render_declarations(task);
  write_axioms(task, os);
  os << "(assert (not " << render_term(task.goal, task) << "))\n(check-sat)\n";
  return os.str();
}

LabeledScript preprocess_label(const Task& task) {
  LabeledScript out;
  std::ostringstream dt;
  write_sorts_and_datatypes(task, dt);
  out.datatype_section = dt.str();
  std::ostringstream fn;
  write_functions(task, fn);
  write_axioms(task, fn);
  out.function_section = fn.str();
  out.goal_section = "(assert " + render_term(task.goal, task) + ")\n";

  std::ostringstream full;
  if (task.logic) full << "(set-logic " << *task.logic << ")\n";
  full << kDatatypeLabel << '\n' << out.datatype_section;
  full << kFunctionLabel << '\n' << out.function_section;
  full << kGoalLabel << '\n' << out.goal_section;
  out.full_text = full.str();
  return out;
}

}  // namespace lemmaloop
