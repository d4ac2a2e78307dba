#include "lemmaloop/sexpr.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace lemmaloop {

SExprError::SExprError(const std::string& msg, SourceLoc loc)
    : std::runtime_error(std::to_string(loc.line) + ":" + std::to_string(loc.column) + ": " + msg),
      loc_(loc) {}

namespace {

bool is_symbol_char(char c) {
  if (std::isalnum(static_cast<unsigned char>(c))) return true;
  switch (c) {
    case '~': case '!': case '@': case '$': case '%': case '^': case '&': case '*':
    case '_': case '-': case '+': case '=': case '<': case '>': case '.': case '?':
    case '/': case '\'':
      return true;
    default:
      // SMT-LIB allows non-ASCII in symbols only when quoted, but LLM output
      // and some benchmarks use it unquoted; accept bytes >= 0x80.
      return static_cast<unsigned char>(c) >= 0x80;
  }
}

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  std::vector<SExpr> read_all() {
    std::vector<SExpr> out;
    for (;;) {
      std::vector<std::string> comments;
      skip_space(&comments);
      if (at_end()) break;
      SExpr e = read();
      e.leading_comments = std::move(comments);
      out.push_back(std::move(e));
    }
    return out;
  }

  SExpr read() {
    skip_space(nullptr);
    if (at_end()) throw SExprError("unexpected end of input", loc_);
    SourceLoc start = loc_;
    char c = peek();
    if (c == '(') {
      advance();
      SExpr list;
      list.kind = SExpr::Kind::List;
      list.loc = start;
      for (;;) {
        skip_space(nullptr);
        if (at_end()) throw SExprError("unbalanced '('", start);
        if (peek() == ')') {
          advance();
          break;
        }
        list.items.push_back(read());
      }
      return list;
    }
    if (c == ')') throw SExprError("unexpected ')'", start);
    if (c == '"') return read_string(start);
    if (c == '|') return read_quoted(start);

    SExpr atom;
    atom.loc = start;
    std::string tok;
    while (!at_end() && is_symbol_char(peek())) tok.push_back(advance());
    if (!at_end() && peek() == ':' && tok.empty()) {
      tok.push_back(advance());
      while (!at_end() && is_symbol_char(peek())) tok.push_back(advance());
      atom.kind = SExpr::Kind::Keyword;
      atom.text = std::move(tok);
      return atom;
    }
    if (tok.empty()) {
      throw SExprError(std::string("unexpected character '") + c + "'", start);
    }
    bool numeral = std::all_of(tok.begin(), tok.end(),
                               [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); });
    atom.kind = numeral ? SExpr::Kind::Numeral : SExpr::Kind::Symbol;
    atom.text = std::move(tok);
    return atom;
  }

  void skip_space(std::vector<std::string>* comments) {
    while (!at_end()) {
      char c = peek();
      if (c == ';') {
        std::string body;
        advance();
        while (!at_end() && peek() != '\n') body.push_back(advance());
        if (comments) comments->push_back(std::move(body));
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  bool at_end() const { return pos_ >= text_.size(); }

 private:
  SExpr read_string(SourceLoc start) {
    advance();
    SExpr s;
    s.kind = SExpr::Kind::String;
    s.loc = start;
    for (;;) {
      if (at_end()) throw SExprError("unterminated string literal", start);
      char c = advance();
      if (c == '"') {
        if (!at_end() && peek() == '"') {
          s.text.push_back(advance());
          continue;
        }
        break;
      }
      s.text.push_back(c);
    }
    return s;
  }

  SExpr read_quoted(SourceLoc start) {
    advance();
    SExpr s;
    s.kind = SExpr::Kind::Symbol;
    s.loc = start;
    for (;;) {
      if (at_end()) throw SExprError("unterminated quoted symbol", start);
      char c = advance();
      if (c == '|') break;
      s.text.push_back(c);
    }
    return s;
  }

  char peek() const { return text_[pos_]; }
  char advance() {
    char c = text_[pos_++];
    if (c == '\n') {
      ++loc_.line;
      loc_.column = 1;
    } else {
      ++loc_.column;
    }
    return c;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  SourceLoc loc_;
};

}  // namespace

std::vector<SExpr> parse_sexprs(std::string_view text) { return Reader(text).read_all(); }

SExpr parse_single_sexpr(std::string_view text) {
  Reader r(text);
  SExpr e = r.read();
  r.skip_space(nullptr);
  if (!r.at_end()) throw SExprError("trailing content after expression", e.loc);
  return e;
}

std::string quote_symbol(std::string_view name) {
  bool simple = !name.empty() && !std::isdigit(static_cast<unsigned char>(name.front()));
  for (char c : name) {
    if (!is_symbol_char(c)) simple = false;
  }
  if (simple) return std::string(name);
  return "|" + std::string(name) + "|";
}

std::string SExpr::to_string() const {
  switch (kind) {
    case Kind::Symbol:
      return quote_symbol(text);
    case Kind::Keyword:
    case Kind::Numeral:
      return text;
    case Kind::String: {
      std::string out = "\"";
      for (char c : text) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
      }
      return out + "\"";
    }
    case Kind::List: {
      std::ostringstream os;
      os << '(';
      for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) os << ' ';
        os << items[i].to_string();
      }
      os << ')';
      return os.str();
    }
  }
  return {};
}

}  // namespace lemmaloop
