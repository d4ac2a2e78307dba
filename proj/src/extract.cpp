#include <set>

#include "lemmaloop/llm.hpp"

namespace lemmaloop {

namespace {

bool is_command_head(const SExpr& e) {
  if (!e.is_list() || e.size() == 0 || !e[0].is_symbol()) return false;
  const std::string& h = e[0].text;
  return h.rfind("declare-", 0) == 0 || h.rfind("define-", 0) == 0 || h.rfind("set-", 0) == 0 ||
         h.rfind("get-", 0) == 0 || h == "check-sat" || h == "exit" || h == "push" || h == "pop" || h == "echo";
}

// The balanced s-expression starting at `text[start]`, or npos-length if unbalanced.
std::optional<std::string_view> balanced_from(std::string_view text, std::size_t start) {
  int depth = 0;
  bool in_string = false;
  bool in_bar = false;
  for (std::size_t i = start; i < text.size(); ++i) {
    char c = text[i];
    if (in_string) {
      if (c == '"') in_string = false;
      continue;
    }
    if (in_bar) {
      if (c == '|') in_bar = false;
      continue;
    }
    if (c == '"') in_string = true;
    else if (c == '|') in_bar = true;
    else if (c == '(') ++depth;
    else if (c == ')') {
      if (--depth == 0) return text.substr(start, i - start + 1);
    }
  }
  return std::nullopt;
}

struct Candidate {
  std::string text;
  std::optional<SExpr> parsed;  // set when the block parser already produced it
};

std::vector<std::string_view> split_lines(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    std::size_t end = s.find('\n', pos);
    if (end == std::string_view::npos) end = s.size();
    std::string_view line = s.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.push_back(line);
    pos = end + 1;
  }
  return out;
}

std::string_view ltrim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

void scan_line(std::string_view line, std::vector<Candidate>& out, std::vector<ExtractionDiagnostic>& diags) {
  std::size_t a = line.find("(forall");
  std::size_t b = line.find("(assert");
  std::size_t start = std::min(a, b);
  if (start == std::string_view::npos) return;
  auto form = balanced_from(line, start);
  if (!form) {
    diags.push_back({std::string(line), "unbalanced parentheses"});
    return;
  }
  out.push_back({std::string(*form), std::nullopt});
}

// Candidates inside one fenced block.
void scan_block(std::string_view block, std::vector<Candidate>& out, std::vector<ExtractionDiagnostic>& diags) {
  try {
    for (auto& e : parse_sexprs(block)) {
      if (!e.is_list() || is_command_head(e)) continue;
      std::string text = e.to_string();
      out.push_back({std::move(text), std::move(e)});
    }
    return;
  } catch (const SExprError&) {
    // Fall back to line-by-line below.
  }
  for (auto line : split_lines(block)) {
    std::string_view t = ltrim(line);
    if (t.empty() || t.front() != '(') continue;
    auto form = balanced_from(t, 0);
    if (!form) {
      diags.push_back({std::string(line), "unbalanced parentheses"});
      continue;
    }
    out.push_back({std::string(*form), std::nullopt});
  }
}

}  // namespace

ExtractionResult extract_conjectures(std::string_view raw, const Task& task, std::size_t cap,
                                     const Provenance& provenance) {
  if (cap == 0) throw std::invalid_argument("conjecture cap must be positive");
  ExtractionResult result;
  std::vector<Candidate> fenced;
  std::vector<Candidate> loose;

  bool in_fence = false;
  std::string block;
  for (auto line : split_lines(raw)) {
    if (ltrim(line).substr(0, 3) == "```") {
      if (in_fence) scan_block(block, fenced, result.diagnostics);
      block.clear();
      in_fence = !in_fence;
      continue;
    }
    if (in_fence) {
      block.append(line).push_back('\n');
    } else {
      scan_line(line, loose, result.diagnostics);
    }
  }
  if (in_fence) scan_block(block, fenced, result.diagnostics);  // unterminated fence

  Signature sig(task);
  std::set<std::string> seen;
  auto consider = [&](Candidate& c) {
    try {
      SExpr e = c.parsed ? *c.parsed : parse_single_sexpr(c.text);
      Term f = parse_formula(e, sig);
      if (!seen.insert(alpha_key(f)).second) return;  // duplicate
      if (result.conjectures.size() >= cap) {
        result.diagnostics.push_back({c.text, "over the cap of " + std::to_string(cap)});
        return;
      }
      Conjecture conj;
      conj.formula = std::move(f);
      conj.raw_text = c.text;
      conj.provenance = provenance;
      result.conjectures.push_back(std::move(conj));
    } catch (const ParseError& err) {
      result.diagnostics.push_back({c.text, err.what()});
    } catch (const SExprError& err) {
      result.diagnostics.push_back({c.text, err.what()});
    }
  };
  for (auto& c : fenced) consider(c);
  for (auto& c : loose) consider(c);
  return result;
}

}  // namespace lemmaloop
