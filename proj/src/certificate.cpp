#include "lemmaloop/certificate.hpp"

#include <json.hpp>

#include "lemmaloop/obligations.hpp"
#include "lemmaloop/smtlib.hpp"

namespace lemmaloop {

using nlohmann::json;

namespace {

json tokens_json(const TokenUsage& u) {
  return {{"prompt", u.prompt_tokens}, {"completion", u.completion_tokens}, {"total", u.total()}};
}

json node_json(const ProofNode& n) {
  json lemmas = json::array();
  for (const auto& c : n.conjectures) lemmas.push_back(render_term(c.formula, n.task));
  json children = json::array();
  if (is_proved(n.status)) {
    for (const auto& c : n.children) children.push_back(node_json(*c));
  }
  return {{"goal-smt2", render_term(n.task.goal, n.task)},
          {"status", to_string(n.status)},
          {"depth", n.depth},
          {"lemmas", lemmas},
          {"children", children},
          {"solver", n.closed_by},
          {"elapsed", n.elapsed},
          {"tokens", tokens_json(n.tokens)},
          {"attempts", n.attempts.size()},
          {"memo_hit", n.memo_hit}};
}

class Checker {
 public:
  Checker(const Task& task, Prover& prover, double timeout) : task_(task), prover_(prover), timeout_(timeout) {}

  CertificateCheck run(const json& root) {
    CertificateCheck out;
    // The root must prove the task's own goal.
    if (!node(root, "root", &task_.goal, out)) return out;
    out.ok = true;
    return out;
  }

 private:
  static const json& field(const json& j, const char* name) {
    if (!j.is_object() || !j.contains(name)) throw CertificateFormatError(std::string("node lacks '") + name + "'");
    return j.at(name);
  }

  bool fail(CertificateCheck& out, const std::string& path, const std::string& why) {
    out.ok = false;
    out.failing_path = path;
    out.message = why;
    return false;
  }

  bool node(const json& j, const std::string& path, const Term* expected_goal, CertificateCheck& out) {
    const json& goal_j = field(j, "goal-smt2");
    const json& status_j = field(j, "status");
    const json& lemmas_j = field(j, "lemmas");
    const json& children_j = field(j, "children");
    if (!goal_j.is_string() || !status_j.is_string() || !lemmas_j.is_array() || !children_j.is_array()) {
      throw CertificateFormatError("node fields have the wrong types at " + path);
    }
    auto status = node_status_from_string(status_j.get<std::string>());
    if (!status) throw CertificateFormatError("unknown status at " + path);
    ++out.nodes_checked;

    Term goal;
    try {
      goal = parse_formula(goal_j.get<std::string>(), task_);
    } catch (const std::exception& e) {
      return fail(out, path, std::string("goal does not parse: ") + e.what());
    }
    if (expected_goal && !alpha_equivalent(goal, *expected_goal)) {
      return fail(out, path, "node goal differs from the lemma it should prove");
    }
    if (!is_proved(*status)) return fail(out, path, "node is not proved (" + to_string(*status) + ")");

    std::vector<Term> lemmas;
    for (const auto& l : lemmas_j) {
      if (!l.is_string()) throw CertificateFormatError("lemma is not a string at " + path);
      try {
        lemmas.push_back(parse_formula(l.get<std::string>(), task_));
      } catch (const std::exception& e) {
        return fail(out, path, std::string("lemma does not parse: ") + e.what());
      }
    }
    if (*status == NodeStatus::ProvedDirect && !lemmas.empty()) {
      return fail(out, path, "directly proved node lists lemmas");
    }
    if (lemmas.size() != children_j.size()) return fail(out, path, "lemma and child counts differ");
    if (*status == NodeStatus::ProvedWithLemmas && lemmas.empty()) {
      return fail(out, path, "node claims lemmas but lists none");
    }

    Task here = task_.with_goal(goal);
    std::string script;
    try {
      script = build_proof_obligation(here, lemmas);
    } catch (const std::exception& e) {
      return fail(out, path, e.what());
    }
    SolverVerdict v = prover_.check(script, timeout_, {});
    if (v.outcome != Outcome::Unsat) {
      return fail(out, path, "obligation is " + to_string(v.outcome) + ", not Unsat");
    }
    for (std::size_t i = 0; i < lemmas.size(); ++i) {
      if (!node(children_j[i], path + "/" + std::to_string(i), &lemmas[i], out)) return false;
    }
    return true;
  }

  const Task& task_;
  Prover& prover_;
  double timeout_;
};

}  // namespace

std::string emit_certificate(const ProofOutcome& outcome) {
  json j = {{"format", "lemmaloop-proof-certificate"},
            {"version", 1},
            {"proved", outcome.proved},
            {"wall_time", outcome.wall_time},
            {"llm_queries", outcome.llm_queries},
            {"tokens", tokens_json(outcome.tokens)},
            {"task", render_script(outcome.root->task)},
            {"root", node_json(*outcome.root)}};
  return j.dump(2) + "\n";
}

CertificateCheck check_certificate(std::string_view text, Prover& prover, double timeout_per_node) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw CertificateFormatError(std::string("certificate is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || j.value("format", "") != "lemmaloop-proof-certificate") {
    throw CertificateFormatError("not a proof certificate");
  }
  if (!j.contains("task") || !j["task"].is_string() || !j.contains("root")) {
    throw CertificateFormatError("certificate lacks the task or the root node");
  }
  Task task;
  try {
    task = parse_script(j["task"].get<std::string>());
  } catch (const std::exception& e) {
    throw CertificateFormatError(std::string("embedded task does not parse: ") + e.what());
  }
  try {
    return Checker(task, prover, timeout_per_node).run(j["root"]);
  } catch (const json::exception& e) {
    throw CertificateFormatError(std::string("malformed certificate: ") + e.what());
  }
}

}  // namespace lemmaloop
