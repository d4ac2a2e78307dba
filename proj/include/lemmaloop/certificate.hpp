#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "lemmaloop/engine.hpp"
#include "lemmaloop/solver.hpp"

namespace lemmaloop {

/// JSON proof certificate:
///
///   { "format": "lemmaloop-proof-certificate", "version": 1,
///     "proved": bool, "wall_time": s, "llm_queries": n,
///     "tokens": {"prompt": n, "completion": n, "total": n},
///     "task": "<SMT-LIB2 script of the root task>",
///     "root": NODE }
///
///   NODE = { "goal-smt2": "<formula>", "status": "ProvedDirect" | ...,
///            "depth": n, "lemmas": ["<formula>", ...], "children": [NODE, ...],
///            "solver": "<config name>", "elapsed": s, "tokens": {...},
///            "attempts": n, "memo_hit": bool }
///
/// children[i] proves lemmas[i].
std::string emit_certificate(const ProofOutcome& outcome);

class CertificateFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CertificateCheck {
  bool ok = false;
  /// Slash-separated child indices from the root, e.g. "root/0/1".
  std::string failing_path;
  std::string message;
  int nodes_checked = 0;
};

/// Re-solve every node's obligation: the goal alone for ProvedDirect, the
/// goal with its lemmas for ProvedWithLemmas, and check that each child
/// proves the matching lemma. Throws CertificateFormatError when the
/// document is not a readable certificate.
CertificateCheck check_certificate(std::string_view text, Prover& prover, double timeout_per_node = 60.0);

}  // namespace lemmaloop
