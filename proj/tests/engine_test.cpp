#include <gtest/gtest.h>

#include <json.hpp>

#include "lemmaloop/engine.hpp"
#include "support.hpp"

namespace lemmaloop {
namespace {

using namespace testing;
using namespace std::chrono_literals;

// What an obligation script asks, recovered from its text.
struct Query {
  enum Kind { Consistency, Initial, Verify } kind;
  std::string goal;                 // empty for consistency checks
  std::vector<std::string> extra;  // assertions after the four axioms
};

Query classify(const std::string& script) {
  std::vector<std::string> asserts;
  std::istringstream in(script);
  for (std::string line; std::getline(in, line);) {
    if (line.rfind("(assert ", 0) == 0) asserts.push_back(line.substr(8, line.size() - 9));
  }
  Query q;
  const std::string neg = "(not ";
  if (!asserts.empty() && asserts.back().rfind(neg, 0) == 0) {
    q.goal = asserts.back().substr(neg.size(), asserts.back().size() - neg.size() - 1);
    asserts.pop_back();
  }
  q.extra.assign(asserts.begin() + std::min<std::size_t>(4, asserts.size()), asserts.end());
  q.kind = q.goal.empty() ? Query::Consistency : q.extra.empty() ? Query::Initial : Query::Verify;
  return q;
}

std::string goal_text(const std::string& prompt) {
  std::string line = goal_of_prompt(prompt);
  return line.substr(8, line.size() - 9);
}

std::string fence(const std::vector<std::string>& lemmas) {
  std::string s = "```smt2\n";
  for (const auto& l : lemmas) s += "(assert " + l + ")\n";
  return s + "```\n";
}

EngineConfig quick_config() {
  EngineConfig cfg;
  cfg.task_time_limit = 30;
  cfg.initial_check_timeout = 5;
  cfg.verify_timeout = 5;
  cfg.subgoal_parallelism = 1;
  return cfg;
}

// n-fold successor applied to `x`.
std::string succs(int n, const std::string& x) {
  std::string s = x;
  for (int i = 0; i < n; ++i) s = "(succ " + s + ")";
  return s;
}

// A fresh lemma for every depth: x + S^k(0) = S^k(x).
std::string ladder(int k) {
  return "(forall ((x Nat)) (= (plus x " + succs(k, "zero") + ") " + succs(k, "x") + "))";
}

int ladder_rung(const std::string& goal) {
  int n = 0;
  for (auto pos = goal.find("(succ"); pos != std::string::npos; pos = goal.find("(succ", pos + 1)) ++n;
  return n / 2;
}

std::vector<nlohmann::json> events(const std::string& trace, const std::string& kind) {
  std::vector<nlohmann::json> out;
  std::istringstream in(trace);
  for (std::string line; std::getline(in, line);) {
    auto j = nlohmann::json::parse(line);
    if (j["event"] == kind) out.push_back(j);
  }
  return out;
}

int count_nodes_deeper_than(const ProofNode& n, int limit) {
  int c = n.depth > limit ? 1 : 0;
  for (const auto& ch : n.children) c += count_nodes_deeper_than(*ch, limit);
  return c;
}

TEST(EngineConfigTest, RejectsBadLimits) {
  EngineConfig cfg;
  EXPECT_NO_THROW(validate(cfg));
  cfg.max_iterations = 0;
  EXPECT_THROW(validate(cfg), std::invalid_argument);
  cfg = {};
  cfg.prompt_pool.clear();
  EXPECT_THROW(validate(cfg), std::invalid_argument);
  cfg = {};
  cfg.verify_timeout = 0;
  EXPECT_THROW(validate(cfg), std::invalid_argument);
  cfg = {};
  cfg.conjecture_cap = 0;
  EXPECT_THROW(validate(cfg), std::invalid_argument);
  auto p = ScriptedProver([](const std::string&) { return Outcome::Sat; });
  EXPECT_THROW(Engine(EngineConfig{}, p, p, nullptr), std::invalid_argument);
  EngineConfig off;
  off.engine_off = true;
  EXPECT_NO_THROW(Engine(off, p, p, nullptr));
}

TEST(EngineTest, DirectProofSkipsTheModel) {
  auto prover = ScriptedProver([](const std::string&) { return Outcome::Unsat; });
  ScriptedModel model([](const std::string&, int) { return std::string(); });
  Engine engine(quick_config(), prover, prover, &model);
  ProofOutcome out = engine.prove_task(running_example());
  EXPECT_TRUE(out.proved);
  EXPECT_EQ(out.root->status, NodeStatus::ProvedDirect);
  EXPECT_EQ(out.llm_queries, 0);
  EXPECT_EQ(model.calls, 0);
  EXPECT_EQ(out.root->closed_by, "scripted");
}

TEST(EngineTest, EngineOffOnlyRunsTheInitialCheck) {
  auto prover = ScriptedProver([](const std::string&) { return Outcome::Unknown; });
  EngineConfig cfg = quick_config();
  cfg.engine_off = true;
  Engine engine(cfg, prover, prover, nullptr);
  ProofOutcome out = engine.prove_task(running_example());
  EXPECT_FALSE(out.proved);
  EXPECT_EQ(out.root->status, NodeStatus::Failed);
  EXPECT_EQ(prover.calls, 1);
  EXPECT_TRUE(out.root->attempts.empty());
}

TEST(EngineTest, RunningExampleChainBuildsTheExpectedTree) {
  auto prover = ScriptedProver([](const std::string& s) {
    Query q = classify(s);
    if (q.kind == Query::Consistency) return Outcome::Sat;
    if (q.kind == Query::Initial) return q.goal == kL3 ? Outcome::Unsat : Outcome::Unknown;
    return Outcome::Unsat;
  });
  ScriptedModel model([](const std::string& p, int) {
    std::string g = goal_text(p);
    if (g == kL1) return fence({kL2});
    if (g == kL2) return fence({kL3});
    return fence({kL1});
  });
  Engine engine(quick_config(), prover, prover, &model);
  ProofOutcome out = engine.prove_task(running_example());
  ASSERT_TRUE(out.proved);
  EXPECT_EQ(out.llm_queries, 3);
  EXPECT_EQ(out.tokens, (TokenUsage{300, 60}));
  const ProofNode* n = out.root.get();
  for (const auto& lemma : {kL1, kL2, kL3}) {
    ASSERT_EQ(n->status, NodeStatus::ProvedWithLemmas);
    ASSERT_EQ(n->conjectures.size(), 1u);
    EXPECT_EQ(render_term(n->conjectures[0].formula), lemma);
    ASSERT_EQ(n->children.size(), 1u);
    n = n->children[0].get();
  }
  EXPECT_EQ(n->status, NodeStatus::ProvedDirect);
  EXPECT_EQ(n->depth, 3);
  TreeShape shape = tree_shape(*out.root);
  EXPECT_EQ(shape.nodes, 4);
  EXPECT_EQ(shape.max_depth, 3);
}

TEST(EngineTest, FailedSearchMakesPoolTimesIterationsAttempts) {
  for (int iters : {1, 2, 3}) {
    auto prover = ScriptedProver([](const std::string& s) {
      return classify(s).kind == Query::Initial ? Outcome::Unknown : Outcome::Sat;
    });
    ScriptedModel model([](const std::string&, int) { return fence({kPlusComm}); });
    EngineConfig cfg = quick_config();
    cfg.max_iterations = iters;
    Engine engine(cfg, prover, prover, &model);
    ProofOutcome out = engine.prove_task(running_example());
    EXPECT_FALSE(out.proved);
    EXPECT_EQ(out.root->status, NodeStatus::Failed);
    EXPECT_EQ(out.root->attempts.size(), 2u * iters);
    EXPECT_EQ(out.llm_queries, 2 * iters);
    std::vector<std::pair<PromptStrategy, int>> order;
    for (const auto& a : out.root->attempts) {
      order.emplace_back(a.strategy, a.iteration);
      EXPECT_EQ(a.verify_outcome, Outcome::Sat);
    }
    EXPECT_EQ(order.front(), std::make_pair(PromptStrategy::Strategy1, 1));
    EXPECT_EQ(order.back(), std::make_pair(PromptStrategy::Strategy2, iters));
  }
}

TEST(EngineTest, IterationIndexReachesTheModel) {
  auto prover = ScriptedProver([](const std::string& s) {
    return classify(s).kind == Query::Initial ? Outcome::Unknown : Outcome::Sat;
  });
  std::vector<int> seen;
  std::mutex mu;
  ScriptedModel model([&](const std::string&, int it) {
    std::lock_guard lock(mu);
    seen.push_back(it);
    return std::string("no idea");
  });
  Engine engine(quick_config(), prover, prover, &model);
  engine.prove_task(running_example());
  EXPECT_EQ(seen, (std::vector<int>{1, 2, 3, 1, 2, 3}));
}

TEST(EngineTest, DepthNeverExceedsTheBound) {
  for (int max_depth : {0, 1, 2, 3}) {
    auto prover = ScriptedProver([](const std::string& s) {
      Query q = classify(s);
      return q.kind == Query::Verify ? Outcome::Unsat : q.kind == Query::Initial ? Outcome::Unknown : Outcome::Sat;
    });
    ScriptedModel model([](const std::string& p, int) { return fence({ladder(ladder_rung(goal_text(p)) + 1)}); });
    EngineConfig cfg = quick_config();
    cfg.max_depth = max_depth;
    cfg.max_iterations = 1;
    cfg.prompt_pool = {PromptStrategy::Strategy1};
    std::ostringstream os;
    TraceSink sink(os);
    Engine engine(cfg, prover, prover, &model, &sink);
    ProofOutcome out = engine.prove_task(running_example());
    EXPECT_FALSE(out.proved);
    EXPECT_EQ(count_nodes_deeper_than(*out.root, max_depth), 0);
    int deepest = 0;
    for (const auto& e : events(os.str(), "node_open")) deepest = std::max(deepest, e["depth"].get<int>());
    EXPECT_EQ(deepest, max_depth);
    EXPECT_EQ(events(os.str(), "node_open").size(), static_cast<std::size_t>(max_depth + 1));
    EXPECT_EQ(out.llm_queries, max_depth);
  }
}

TEST(EngineTest, StrictFilterSkipsVerification) {
  auto prover = ScriptedProver([](const std::string& s) {
    Query q = classify(s);
    if (q.kind == Query::Consistency) return s.find(kPlusZeroBad) != std::string::npos ? Outcome::Unsat : Outcome::Sat;
    return q.kind == Query::Initial ? Outcome::Unknown : Outcome::Unsat;
  });
  ScriptedModel model([](const std::string&, int) { return fence({kPlusComm, kPlusZeroBad}); });
  EngineConfig cfg = quick_config();
  cfg.max_iterations = 1;
  cfg.prompt_pool = {PromptStrategy::Strategy1};
  Engine engine(cfg, prover, prover, &model);
  ProofOutcome out = engine.prove_task(running_example());
  ASSERT_EQ(out.root->attempts.size(), 1u);
  const AttemptRecord& a = out.root->attempts[0];
  EXPECT_TRUE(a.batch_rejected);
  EXPECT_EQ(a.rejected_index, 1u);
  EXPECT_EQ(a.rejected_reason, FilterReason::InconsistentWithAxioms);
  EXPECT_FALSE(a.verify_outcome);
  for (const auto& s : prover.scripts) EXPECT_NE(classify(s).kind, Query::Verify);
}

TEST(EngineTest, EmptyResponseDoesNotVerify) {
  auto prover = ScriptedProver([](const std::string& s) {
    return classify(s).kind == Query::Initial ? Outcome::Unknown : Outcome::Unsat;
  });
  ScriptedModel model([](const std::string&, int) { return std::string("Sorry, nothing to suggest."); });
  Engine engine(quick_config(), prover, prover, &model);
  ProofOutcome out = engine.prove_task(running_example());
  EXPECT_FALSE(out.proved);
  EXPECT_EQ(prover.calls, 1);
}

TEST(EngineTest, GlobalDeadlineBoundsTheRun) {
  auto prover = ScriptedProver([](const std::string&) { return Outcome::Timeout; });
  ScriptedModel model([](const std::string&, int) { return fence({kPlusComm}); });
  EngineConfig cfg = quick_config();
  cfg.task_time_limit = 0.5;
  cfg.initial_check_timeout = 60;
  Engine engine(cfg, prover, prover, &model);
  auto start = std::chrono::steady_clock::now();
  ProofOutcome out = engine.prove_task(running_example());
  double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_FALSE(out.proved);
  EXPECT_EQ(out.root->status, NodeStatus::BudgetExhausted);
  EXPECT_LT(wall, 1.5);
  EXPECT_LE(out.wall_time, wall);
}

TEST(EngineTest, DeadlineReachesSubgoals) {
  // Verification succeeds; the sub-goal's check then hangs until the deadline.
  auto prover = ScriptedProver([](const std::string& s) {
    Query q = classify(s);
    if (q.kind == Query::Consistency) return Outcome::Sat;
    if (q.kind == Query::Verify) return Outcome::Unsat;
    return q.goal == kPlusComm ? Outcome::Timeout : Outcome::Unknown;
  });
  ScriptedModel model([](const std::string&, int) { return fence({kPlusComm}); });
  EngineConfig cfg = quick_config();
  cfg.task_time_limit = 1.0;
  cfg.initial_check_timeout = 30;
  Engine engine(cfg, prover, prover, &model);
  ProofOutcome out = engine.prove_task(running_example());
  EXPECT_FALSE(out.proved);
  EXPECT_EQ(out.root->status, NodeStatus::BudgetExhausted);
  EXPECT_LT(out.wall_time, 2.5);
  ASSERT_EQ(out.root->attempts.size(), 1u);
  EXPECT_EQ(out.root->attempts[0].subgoals_proved, false);
}

TEST(EngineTest, FailingSiblingCancelsTheOthers) {
  auto prover = ScriptedProver([](const std::string& s) {
    Query q = classify(s);
    if (q.kind == Query::Consistency) return Outcome::Sat;
    if (q.kind == Query::Verify) return Outcome::Unsat;
    if (q.goal == kMultZero) return Outcome::Timeout;  // hangs for its full limit
    return q.goal == kPlusComm ? Outcome::Sat : Outcome::Unknown;
  }, 50ms);
  ScriptedModel model([](const std::string&, int) { return fence({kMultZero, kPlusComm}); });
  EngineConfig cfg = quick_config();
  cfg.max_depth = 1;
  cfg.max_iterations = 1;
  cfg.prompt_pool = {PromptStrategy::Strategy1};
  cfg.subgoal_parallelism = 2;
  cfg.initial_check_timeout = 20;
  Engine engine(cfg, prover, prover, &model);
  ProofOutcome out = engine.prove_task(running_example());
  EXPECT_FALSE(out.proved);
  EXPECT_EQ(out.root->status, NodeStatus::Failed);
  EXPECT_LT(out.wall_time, 5.0);
}

TEST(EngineTest, AlphaEqualSubgoalsAreProvedOnce) {
  for (bool memo : {true, false}) {
    auto prover = ScriptedProver([](const std::string& s) {
      Query q = classify(s);
      if (q.kind == Query::Consistency) return Outcome::Sat;
      if (q.kind == Query::Verify) return Outcome::Unsat;
      return q.goal == kPlusAssoc ? Outcome::Unsat : Outcome::Unknown;
    });
    ScriptedModel model([](const std::string& p, int) {
      std::string g = goal_text(p);
      if (g == kPlusComm || g == kMultZero) return fence({kPlusAssoc});
      return fence({kPlusComm, kMultZero});
    });
    EngineConfig cfg = quick_config();
    cfg.memoize = memo;
    Engine engine(cfg, prover, prover, &model);
    ProofOutcome out = engine.prove_task(running_example());
    ASSERT_TRUE(out.proved);
    int assoc_checks = 0;
    for (const auto& s : prover.scripts) {
      Query q = classify(s);
      if (q.kind == Query::Initial && q.goal == kPlusAssoc) ++assoc_checks;
    }
    EXPECT_EQ(assoc_checks, memo ? 1 : 2);
    ASSERT_EQ(out.root->children.size(), 2u);
    EXPECT_EQ(out.root->children[1]->children[0]->memo_hit, memo);
    EXPECT_EQ(out.root->children[1]->children[0]->depth, 2);
  }
}

TEST(EngineTest, LemmaRestatingAnAncestorIsCircular) {
  for (bool check : {true, false}) {
    auto prover = ScriptedProver([](const std::string& s) {
      Query q = classify(s);
      if (q.kind == Query::Consistency) return Outcome::Sat;
      return q.kind == Query::Verify ? Outcome::Unsat : Outcome::Unknown;
    });
    const std::string goal = "(forall ((p Nat) (q Nat)) (= (mult p q) (mult q p)))";
    ScriptedModel model(
        [&](const std::string& p, int) { return fence({goal_text(p) == kPlusComm ? goal : kPlusComm}); });
    EngineConfig cfg = quick_config();
    cfg.max_depth = 2;
    cfg.max_iterations = 1;
    cfg.prompt_pool = {PromptStrategy::Strategy1};
    cfg.ancestor_check = check;
    std::ostringstream os;
    TraceSink sink(os);
    Engine engine(cfg, prover, prover, &model, &sink);
    ProofOutcome out = engine.prove_task(running_example());
    EXPECT_FALSE(out.proved);
    auto attempts = events(os.str(), "attempt");
    ASSERT_EQ(attempts.size(), 2u);
    // The depth-1 attempt proposes the root goal again.
    auto at1 = std::find_if(attempts.begin(), attempts.end(), [](const auto& e) { return e["depth"] == 1; });
    ASSERT_NE(at1, attempts.end());
    EXPECT_EQ((*at1)["circular"], check);
    EXPECT_EQ(events(os.str(), "node_open").size(), check ? 2u : 3u);
  }
}

TEST(EngineTest, ProviderErrorsCostAnAttemptAndReplayMissesAbort) {
  auto prover = ScriptedProver([](const std::string& s) {
    return classify(s).kind == Query::Initial ? Outcome::Unknown : Outcome::Sat;
  });
  ScriptedModel flaky([](const std::string&, int) -> std::string { throw ProviderError("HTTP 500"); });
  Engine engine(quick_config(), prover, prover, &flaky);
  ProofOutcome out = engine.prove_task(running_example());
  ASSERT_EQ(out.root->attempts.size(), 6u);
  EXPECT_EQ(out.root->attempts[0].llm_error, "HTTP 500");
  EXPECT_EQ(out.llm_queries, 0);

  ScriptedModel missing([](const std::string&, int) -> std::string { throw ReplayMiss("abc", "no transcript"); });
  Engine strict(quick_config(), prover, prover, &missing);
  EXPECT_THROW(strict.prove_task(running_example()), ReplayMiss);
}

TEST(EngineTest, TraceEmitsOneJsonObjectPerLine) {
  auto prover = ScriptedProver([](const std::string& s) {
    return classify(s).kind == Query::Initial ? Outcome::Unknown : Outcome::Sat;
  });
  ScriptedModel model([](const std::string&, int) { return fence({kPlusComm}); });
  std::ostringstream os;
  TraceSink sink(os);
  EngineConfig cfg = quick_config();
  cfg.max_iterations = 1;
  Engine engine(cfg, prover, prover, &model, &sink);
  engine.prove_task(running_example());
  std::istringstream in(os.str());
  int attempts = 0;
  for (std::string line; std::getline(in, line);) {
    auto j = nlohmann::json::parse(line);
    if (j["event"] == "attempt") ++attempts;
  }
  EXPECT_EQ(attempts, 2);
}

}  // namespace
}  // namespace lemmaloop
