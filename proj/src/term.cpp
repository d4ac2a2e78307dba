#include "lemmaloop/term.hpp"

#include <sstream>
#include <stdexcept>

namespace lemmaloop {

std::string Sort::to_string() const {
  if (args.empty()) return name;
  std::string out = "(" + name;
  for (const auto& a : args) out += " " + a.to_string();
  return out + ")";
}

Sort substitute_sort(const Sort& s, const std::map<std::string, Sort>& subst) {
  if (s.args.empty()) {
    auto it = subst.find(s.name);
    if (it != subst.end()) return it->second;
    return s;
  }
  Sort out{s.name, {}};
  out.args.reserve(s.args.size());
  for (const auto& a : s.args) out.args.push_back(substitute_sort(a, subst));
  return out;
}

Term Term::var(std::string name, Sort sort) {
  detail::TermNode n;
  n.kind = TermKind::Var;
  n.name = std::move(name);
  n.sort = std::move(sort);
  return Term(std::make_shared<const detail::TermNode>(std::move(n)));
}

Term Term::int_lit(std::string digits) {
  detail::TermNode n;
  n.kind = TermKind::IntLit;
  n.name = std::move(digits);
  n.sort = Sort::integer();
  return Term(std::make_shared<const detail::TermNode>(std::move(n)));
}

Term Term::bool_lit(bool value) {
  detail::TermNode n;
  n.kind = TermKind::BoolLit;
  n.name = value ? "true" : "false";
  n.sort = Sort::boolean();
  return Term(std::make_shared<const detail::TermNode>(std::move(n)));
}

Term Term::app(AppKind kind, std::string symbol, std::vector<Term> args, Sort sort) {
  detail::TermNode n;
  n.kind = TermKind::App;
  n.app_kind = kind;
  n.name = std::move(symbol);
  n.args = std::move(args);
  n.sort = std::move(sort);
  return Term(std::make_shared<const detail::TermNode>(std::move(n)));
}

Term Term::quantifier(TermKind kind, std::vector<Binding> bound, Term body) {
  if (kind != TermKind::Forall && kind != TermKind::Exists) {
    throw std::invalid_argument("quantifier kind must be Forall or Exists");
  }
  detail::TermNode n;
  n.kind = kind;
  n.bound = std::move(bound);
  n.args.push_back(std::move(body));
  n.sort = Sort::boolean();
  return Term(std::make_shared<const detail::TermNode>(std::move(n)));
}

Term Term::not_(Term t) { return app(AppKind::Builtin, "not", {std::move(t)}, Sort::boolean()); }

Term Term::eq(Term a, Term b) {
  return app(AppKind::Builtin, "=", {std::move(a), std::move(b)}, Sort::boolean());
}

TermKind Term::kind() const { return node_->kind; }
AppKind Term::app_kind() const { return node_->app_kind; }
const std::string& Term::name() const { return node_->name; }
const Sort& Term::sort() const { return node_->sort; }
const std::vector<Term>& Term::args() const { return node_->args; }
const std::vector<Binding>& Term::bound() const { return node_->bound; }
const Term& Term::body() const { return node_->args.front(); }

bool Term::is_app(std::string_view symbol) const {
  return valid() && kind() == TermKind::App && name() == symbol;
}

bool operator==(const Term& a, const Term& b) {
  if (a.node_ == b.node_) return true;
  if (!a.node_ || !b.node_) return false;
  const auto& x = *a.node_;
  const auto& y = *b.node_;
  if (x.kind != y.kind || x.name != y.name || !(x.sort == y.sort)) return false;
  if (x.kind == TermKind::App && x.app_kind != y.app_kind) return false;
  if (x.bound != y.bound) return false;
  if (x.args.size() != y.args.size()) return false;
  for (std::size_t i = 0; i < x.args.size(); ++i) {
    if (!(x.args[i] == y.args[i])) return false;
  }
  return true;
}

std::size_t Term::size() const {
  std::size_t n = 1;
  for (const auto& a : args()) n += a.size();
  return n;
}

namespace {

void collect_free(const Term& t, std::multiset<std::string>& bound, std::set<std::string>& out) {
  switch (t.kind()) {
    case TermKind::Var:
      if (!bound.count(t.name())) out.insert(t.name());
      return;
    case TermKind::IntLit:
    case TermKind::BoolLit:
      return;
    case TermKind::App:
      for (const auto& a : t.args()) collect_free(a, bound, out);
      return;
    case TermKind::Forall:
    case TermKind::Exists: {
      for (const auto& b : t.bound()) bound.insert(b.name);
      collect_free(t.body(), bound, out);
      for (const auto& b : t.bound()) bound.erase(bound.find(b.name));
      return;
    }
  }
}

std::string fresh_name(const std::string& base, const std::set<std::string>& avoid) {
  for (int i = 1;; ++i) {
    std::string candidate = base + "_" + std::to_string(i);
    if (!avoid.count(candidate)) return candidate;
  }
}

Term subst_rec(const Term& t, const std::map<std::string, Term>& subst) {
  switch (t.kind()) {
    case TermKind::Var: {
      auto it = subst.find(t.name());
      return it == subst.end() ? t : it->second;
    }
    case TermKind::IntLit:
    case TermKind::BoolLit:
      return t;
    case TermKind::App: {
      std::vector<Term> args;
      args.reserve(t.args().size());
      bool changed = false;
      for (const auto& a : t.args()) {
        args.push_back(subst_rec(a, subst));
        changed = changed || !(args.back() == a);
      }
      if (!changed) return t;
      return Term::app(t.app_kind(), t.name(), std::move(args), t.sort());
    }
    case TermKind::Forall:
    case TermKind::Exists: {
      std::map<std::string, Term> inner = subst;
      for (const auto& b : t.bound()) inner.erase(b.name);
      if (inner.empty()) return t;
      // Names that the replacement terms would bring into scope.
      std::set<std::string> incoming;
      std::set<std::string> body_free = free_variables(t.body());
      for (const auto& [name, repl] : inner) {
        if (!body_free.count(name)) continue;
        auto fv = free_variables(repl);
        incoming.insert(fv.begin(), fv.end());
      }
      std::vector<Binding> bound = t.bound();
      std::set<std::string> avoid = incoming;
      avoid.insert(body_free.begin(), body_free.end());
      for (const auto& b : bound) avoid.insert(b.name);
      for (auto& b : bound) {
        if (incoming.count(b.name)) {
          std::string renamed = fresh_name(b.name, avoid);
          avoid.insert(renamed);
          inner[b.name] = Term::var(renamed, b.sort);
          b.name = renamed;
        }
      }
      return Term::quantifier(t.kind(), std::move(bound), subst_rec(t.body(), inner));
    }
  }
  return t;
}

class Normalizer {
 public:
  Term run(const Term& t) {
    switch (t.kind()) {
      case TermKind::Var: {
        auto it = scope_.find(t.name());
        if (it == scope_.end() || it->second.empty()) return t;
        return Term::var(it->second.back(), t.sort());
      }
      case TermKind::IntLit:
      case TermKind::BoolLit:
        return t;
      case TermKind::App: {
        std::vector<Term> args;
        args.reserve(t.args().size());
        for (const auto& a : t.args()) args.push_back(run(a));
        return Term::app(t.app_kind(), t.name(), std::move(args), t.sort());
      }
      case TermKind::Forall:
      case TermKind::Exists: {
        // Merge directly nested binders of the same kind.
        std::vector<const Term*> chain{&t};
        while (chain.back()->body().kind() == t.kind()) chain.push_back(&chain.back()->body());
        std::vector<Binding> bound;
        std::vector<std::string> pushed;
        for (const Term* q : chain) {
          for (const auto& b : q->bound()) {
            std::string canon = "#" + std::to_string(counter_++);
            scope_[b.name].push_back(canon);
            pushed.push_back(b.name);
            bound.push_back({canon, b.sort});
          }
        }
        Term body = run(chain.back()->body());
        for (const auto& name : pushed) scope_[name].pop_back();
        return Term::quantifier(t.kind(), std::move(bound), std::move(body));
      }
    }
    return t;
  }

 private:
  std::map<std::string, std::vector<std::string>> scope_;
  int counter_ = 0;
};

void write_key(const Term& t, std::ostream& os) {
  switch (t.kind()) {
    case TermKind::Var:
      os << "v:" << t.name();
      return;
    case TermKind::IntLit:
    case TermKind::BoolLit:
      os << t.name();
      return;
    case TermKind::App:
      if (t.args().empty()) {
        os << t.name() << ':' << t.sort().to_string();
        return;
      }
      os << '(' << static_cast<int>(t.app_kind()) << ':' << t.name();
      for (const auto& a : t.args()) {
        os << ' ';
        write_key(a, os);
      }
      os << ')';
      return;
    case TermKind::Forall:
    case TermKind::Exists:
      os << (t.kind() == TermKind::Forall ? "(forall (" : "(exists (");
      for (const auto& b : t.bound()) os << '(' << b.name << ' ' << b.sort.to_string() << ')';
      os << ") ";
      write_key(t.body(), os);
      os << ')';
      return;
  }
}

}  // namespace

std::set<std::string> free_variables(const Term& t) {
  std::multiset<std::string> bound;
  std::set<std::string> out;
  collect_free(t, bound, out);
  return out;
}

Term substitute(const Term& t, const std::map<std::string, Term>& subst) {
  if (subst.empty()) return t;
  return subst_rec(t, subst);
}

Term alpha_normalize(const Term& t) { return Normalizer().run(t); }

bool alpha_equivalent(const Term& a, const Term& b) {
  return alpha_normalize(a) == alpha_normalize(b);
}

std::string alpha_key(const Term& t) {
  std::ostringstream os;
  write_key(alpha_normalize(t), os);
  return os.str();
}

}  // namespace lemmaloop
