#pragma once

#include <cstdint>
#include <string>

#include "lemmaloop/term.hpp"

namespace lemmaloop {

struct TokenUsage {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;

  std::int64_t total() const { return prompt_tokens + completion_tokens; }
  TokenUsage& operator+=(const TokenUsage& o) {
    prompt_tokens += o.prompt_tokens;
    completion_tokens += o.completion_tokens;
    return *this;
  }
  friend bool operator==(const TokenUsage&, const TokenUsage&) = default;
};

struct Provenance {
  std::string strategy;
  int iteration = 0;
  int depth = 0;
  std::string model;
};

/// A closed Bool formula proposed as a lemma, plus where it came from.
struct Conjecture {
  Term formula;
  std::string raw_text;
  Provenance provenance;
  TokenUsage tokens;
};

inline Conjecture make_conjecture(Term formula, std::string raw = {}) {
  Conjecture c;
  c.formula = std::move(formula);
  c.raw_text = std::move(raw);
  return c;
}

}  // namespace lemmaloop
