#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lemmaloop {

struct SourceLoc {
  int line = 1;
  int column = 1;
};

/// One node of a parsed s-expression. Atoms keep their spelling with
/// `|quoted|` bars stripped; string literals keep their unescaped contents.
struct SExpr {
  enum class Kind { Symbol, Keyword, Numeral, String, List };

  Kind kind = Kind::List;
  std::string text;
  std::vector<SExpr> items;
  SourceLoc loc;
  /// Comment lines that appeared directly before this node (top level only).
  std::vector<std::string> leading_comments;

  bool is_list() const { return kind == Kind::List; }
  bool is_symbol() const { return kind == Kind::Symbol; }
  bool is_symbol(std::string_view s) const { return kind == Kind::Symbol && text == s; }
  bool is_numeral() const { return kind == Kind::Numeral; }
  /// True for a list whose first element is the symbol `head`.
  bool has_head(std::string_view head) const {
    return is_list() && !items.empty() && items.front().is_symbol(head);
  }
  std::size_t size() const { return items.size(); }
  const SExpr& operator[](std::size_t i) const { return items[i]; }

  std::string to_string() const;
};

class SExprError : public std::runtime_error {
 public:
  SExprError(const std::string& msg, SourceLoc loc);
  SourceLoc loc() const { return loc_; }

 private:
  SourceLoc loc_;
};

/// Parse every top-level s-expression in `text`.
std::vector<SExpr> parse_sexprs(std::string_view text);

/// Parse exactly one s-expression; trailing non-comment content is an error.
SExpr parse_single_sexpr(std::string_view text);

/// Quote a symbol with bars if it is not a simple SMT-LIB symbol.
std::string quote_symbol(std::string_view name);

}  // namespace lemmaloop
