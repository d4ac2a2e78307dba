#include "lemmaloop/engine.hpp"

#include <algorithm>
#include <exception>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "lemmaloop/obligations.hpp"
#include "lemmaloop/smtlib.hpp"

namespace lemmaloop {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

void validate(const EngineConfig& cfg) {
  if (cfg.max_depth < 0) throw std::invalid_argument("max depth must be non-negative");
  if (cfg.max_iterations <= 0) throw std::invalid_argument("max iterations must be positive");
  if (cfg.prompt_pool.empty() && !cfg.engine_off) throw std::invalid_argument("prompt pool is empty");
  if (!(cfg.task_time_limit > 0) || !(cfg.initial_check_timeout > 0) || !(cfg.verify_timeout > 0) ||
      !(cfg.filter_timeout > 0)) {
    throw std::invalid_argument("time limits must be positive");
  }
  if (cfg.subgoal_parallelism <= 0) throw std::invalid_argument("sub-goal parallelism must be positive");
  if (cfg.conjecture_cap == 0) throw std::invalid_argument("conjecture cap must be positive");
}

std::string to_string(NodeStatus s) {
  switch (s) {
    case NodeStatus::ProvedDirect: return "ProvedDirect";
    case NodeStatus::ProvedWithLemmas: return "ProvedWithLemmas";
    case NodeStatus::Failed: return "Failed";
    case NodeStatus::BudgetExhausted: return "BudgetExhausted";
  }
  return "Failed";
}

std::optional<NodeStatus> node_status_from_string(std::string_view s) {
  for (auto st : {NodeStatus::ProvedDirect, NodeStatus::ProvedWithLemmas, NodeStatus::Failed,
                  NodeStatus::BudgetExhausted}) {
    if (to_string(st) == s) return st;
  }
  return std::nullopt;
}

void TraceSink::emit(const std::string& json_line) {
  std::lock_guard lock(mu_);
  os_ << json_line << '\n';
  os_.flush();
}

namespace {

double seconds_between(Clock::time_point a, Clock::time_point b) { return std::chrono::duration<double>(b - a).count(); }

}  // namespace

/// State shared by every node of one root proof.
struct Engine::Run {
  Clock::time_point start;
  std::mutex mu;
  std::map<std::string, std::shared_ptr<const ProofNode>> memo;
  TokenUsage tokens;
  int queries = 0;

  void charge(const TokenUsage& u) {
    std::lock_guard lock(mu);
    tokens += u;
    ++queries;
  }
};

Engine::Engine(EngineConfig cfg, Prover& backend, Prover& filter_prover, LanguageModel* llm, TraceSink* trace)
    : cfg_(std::move(cfg)), backend_(backend), filter_prover_(filter_prover), llm_(llm), trace_(trace) {
  validate(cfg_);
  if (!cfg_.engine_off && !llm_) throw std::invalid_argument("engine needs a language model unless engine-off");
}

void Engine::trace(const std::string& line) {
  if (trace_) trace_->emit(line);
}

bool Engine::initial_check(const Task& task, double timeout_seconds, std::stop_token stop, SolverVerdict* verdict) {
  SolverVerdict v = backend_.check(build_proof_obligation(task, std::vector<Term>{}), timeout_seconds, stop);
  if (verdict) *verdict = v;
  return v.outcome == Outcome::Unsat;
}

bool Engine::verify(const Task& task, const std::vector<Conjecture>& conjectures, double timeout_seconds,
                    std::stop_token stop, SolverVerdict* verdict) {
  SolverVerdict v = backend_.check(build_proof_obligation(task, conjectures), timeout_seconds, stop);
  if (verdict) *verdict = v;
  return v.outcome == Outcome::Unsat;
}

namespace {

struct Budget {
  Clock::time_point deadline;
  std::stop_token stop;

  bool gone() const { return stop.stop_requested() || Clock::now() >= deadline; }
  bool deadline_passed() const { return Clock::now() >= deadline; }
  double clamp(double limit) const {
    double left = std::chrono::duration<double>(deadline - Clock::now()).count();
    return std::max(1e-3, std::min(limit, left));
  }
};

}  // namespace

ProofOutcome Engine::prove_task(const Task& task) {
  Run run;
  run.start = Clock::now();
  Context ctx;
  ctx.deadline = run.start + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(cfg_.task_time_limit));

  ProofOutcome out;
  if (cfg_.engine_off) {
    auto node = std::make_shared<ProofNode>();
    node->task = task;
    SolverVerdict v;
    bool ok = initial_check(task, cfg_.task_time_limit, {}, &v);
    node->timing.initial_check = v.elapsed;
    node->status = ok ? NodeStatus::ProvedDirect : NodeStatus::Failed;
    if (ok) node->closed_by = v.config_name;
    node->elapsed = seconds_between(run.start, Clock::now());
    out.root = node;
  } else {
    out.root = prove_run(task, 0, ctx, run);
  }
  out.proved = is_proved(out.root->status);
  out.wall_time = seconds_between(run.start, Clock::now());
  out.tokens = run.tokens;
  out.llm_queries = run.queries;
  return out;
}

std::shared_ptr<const ProofNode> Engine::prove_run(const Task& task, int depth, const Context& ctx, Run& run) {
  const auto start = Clock::now();
  const std::string key = alpha_key(task.goal);
  const Budget budget{ctx.deadline, ctx.stop};

  if (cfg_.memoize) {
    std::lock_guard lock(run.mu);
    if (auto it = run.memo.find(key); it != run.memo.end()) {
      auto copy = std::make_shared<ProofNode>(*it->second);
      copy->memo_hit = true;
      copy->depth = depth;
      copy->attempts.clear();
      copy->tokens = {};
      copy->elapsed = 0.0;
      trace(json{{"event", "memo_hit"}, {"depth", depth}, {"goal", render_term(task.goal, task)}}.dump());
      return copy;
    }
  }

  auto node = std::make_shared<ProofNode>();
  node->task = task;
  node->depth = depth;
  trace(json{{"event", "node_open"}, {"depth", depth}, {"goal", render_term(task.goal, task)}}.dump());

  auto finish = [&](NodeStatus s) -> std::shared_ptr<const ProofNode> {
    node->status = s;
    node->elapsed = seconds_between(start, Clock::now());
    if (cfg_.memoize && is_proved(s)) {
      std::lock_guard lock(run.mu);
      run.memo.try_emplace(key, node);
    }
    trace(json{{"event", "node_close"},
               {"depth", depth},
               {"status", to_string(s)},
               {"attempts", node->attempts.size()},
               {"elapsed", node->elapsed}}
              .dump());
    return node;
  };

  if (budget.gone()) return finish(NodeStatus::BudgetExhausted);
  SolverVerdict iv;
  bool direct = initial_check(task, budget.clamp(cfg_.initial_check_timeout), ctx.stop, &iv);
  node->timing.initial_check = iv.elapsed;
  if (direct) {
    node->closed_by = iv.config_name;
    return finish(NodeStatus::ProvedDirect);
  }
  if (budget.gone()) return finish(NodeStatus::BudgetExhausted);
  if (depth >= cfg_.max_depth) return finish(NodeStatus::Failed);

  Context child_ctx = ctx;
  child_ctx.ancestors.push_back(key);

  for (PromptStrategy strategy : cfg_.prompt_pool) {
    for (int iteration = 1; iteration <= cfg_.max_iterations; ++iteration) {
      AttemptRecord attempt;
      attempt.strategy = strategy;
      attempt.iteration = iteration;
      const auto attempt_start = Clock::now();
      std::vector<Conjecture> useful;
      bool ok = prove(task, strategy, iteration, depth, ctx, run, *node, attempt, useful);

      if (ok && cfg_.ancestor_check) {
        for (const auto& c : useful) {
          const std::string ck = alpha_key(c.formula);
          if (std::find(child_ctx.ancestors.begin(), child_ctx.ancestors.end(), ck) != child_ctx.ancestors.end()) {
            attempt.circular = true;
          }
        }
        ok = !attempt.circular;
      }

      std::vector<std::shared_ptr<const ProofNode>> children;
      bool all_proved = false;
      bool budget_hit = false;
      if (ok) {
        const auto sub_start = Clock::now();
        discharge(useful, depth, child_ctx, run, task, children, all_proved, budget_hit);
        node->timing.subgoal += seconds_between(sub_start, Clock::now());
        attempt.subgoals_proved = all_proved;
      }
      attempt.elapsed = seconds_between(attempt_start, Clock::now());
      trace(json{{"event", "attempt"},
                 {"depth", depth},
                 {"strategy", to_string(strategy)},
                 {"iteration", iteration},
                 {"conjectures", attempt.conjectures.size()},
                 {"batch_rejected", attempt.batch_rejected},
                 {"circular", attempt.circular},
                 {"verify", attempt.verify_outcome ? to_string(*attempt.verify_outcome) : "none"},
                 {"subgoals_proved", attempt.subgoals_proved ? json(*attempt.subgoals_proved) : json(nullptr)}}
                .dump());
      const bool attempt_budget = attempt.budget_exhausted;
      const std::string closer = attempt.verify_solver;
      node->attempts.push_back(std::move(attempt));

      if (ok && all_proved) {
        node->conjectures = std::move(useful);
        node->children = std::move(children);
        node->closed_by = closer;
        return finish(NodeStatus::ProvedWithLemmas);
      }
      if (attempt_budget || budget_hit || budget.gone()) return finish(NodeStatus::BudgetExhausted);
    }
  }
  return finish(NodeStatus::Failed);
}

bool Engine::prove(const Task& task, PromptStrategy strategy, int iteration, int depth, const Context& ctx, Run& run,
                   ProofNode& node, AttemptRecord& attempt, std::vector<Conjecture>& out) {
  const Budget budget{ctx.deadline, ctx.stop};
  if (budget.gone()) {
    attempt.budget_exhausted = true;
    return false;
  }
  const std::string prompt = render_prompt(strategy, preprocess_label(task));
  attempt.prompt_hash = sha256_hex(prompt);

  auto t0 = Clock::now();
  LlmResponse response;
  try {
    response = llm_->query(prompt, iteration);
  } catch (const ProviderError& e) {
    attempt.llm_error = e.what();
    node.timing.query += seconds_between(t0, Clock::now());
    return false;
  }
  node.timing.query += seconds_between(t0, Clock::now());
  run.charge(response.usage);
  node.tokens += response.usage;
  attempt.tokens = response.usage;

  Provenance provenance{to_string(strategy), iteration, depth, llm_->config().model};
  ExtractionResult extracted = extract_conjectures(response.text, task, cfg_.conjecture_cap, provenance);
  for (auto& c : extracted.conjectures) {
    c.tokens = response.usage;
    attempt.conjectures.push_back(render_term(c.formula, task));
  }
  attempt.diagnostics = std::move(extracted.diagnostics);

  if (budget.gone()) {
    attempt.budget_exhausted = true;
    return false;
  }
  t0 = Clock::now();
  BatchResult batch = filter_batch(extracted.conjectures, task, filter_prover_, budget.clamp(cfg_.filter_timeout),
                                   cfg_.filter_mode, ctx.stop);
  node.timing.filter += seconds_between(t0, Clock::now());
  attempt.filter_verdicts = batch.verdicts;
  attempt.batch_rejected = batch.rejected;
  attempt.rejected_index = batch.rejected_index;
  attempt.rejected_reason = batch.reason;
  if (batch.rejected || batch.kept.empty()) return false;

  if (budget.gone()) {
    attempt.budget_exhausted = true;
    return false;
  }
  SolverVerdict v;
  bool useful = verify(task, batch.kept, budget.clamp(cfg_.verify_timeout), ctx.stop, &v);
  node.timing.verify += v.elapsed;
  attempt.verify_outcome = v.outcome;
  attempt.verify_solver = v.config_name;
  if (!useful) {
    if (budget.gone()) attempt.budget_exhausted = true;
    return false;
  }
  out = std::move(batch.kept);
  return true;
}

void Engine::discharge(const std::vector<Conjecture>& conjectures, int depth, const Context& ctx, Run& run,
                       const Task& parent, std::vector<std::shared_ptr<const ProofNode>>& children, bool& all_proved,
                       bool& budget_hit) {
  const std::size_t n = conjectures.size();
  children.assign(n, nullptr);
  std::stop_source siblings;
  std::stop_callback forward(ctx.stop, [&] { siblings.request_stop(); });
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr error;

  auto worker = [&] {
    while (!siblings.stop_requested()) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        Context cctx{ctx.deadline, siblings.get_token(), ctx.ancestors};
        auto child = prove_run(build_subgoal_task(parent, conjectures[i]), depth + 1, cctx, run);
        children[i] = child;
        if (!is_proved(child->status)) siblings.request_stop();
      } catch (...) {
        std::lock_guard lock(err_mu);
        if (!error) error = std::current_exception();
        siblings.request_stop();
        return;
      }
    }
  };

  const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(cfg_.subgoal_parallelism), n);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);

  all_proved = std::all_of(children.begin(), children.end(),
                           [](const auto& c) { return c && is_proved(c->status); });
  budget_hit = Clock::now() >= ctx.deadline || ctx.stop.stop_requested();
  if (!all_proved) {
    // Keep only the children that actually ran.
    children.erase(std::remove(children.begin(), children.end(), nullptr), children.end());
  }
}

namespace {

void shape_rec(const ProofNode& n, int depth, TreeShape& s) {
  ++s.nodes;
  s.max_depth = std::max(s.max_depth, depth);
  for (const auto& c : n.children) shape_rec(*c, depth + 1, s);
}

}  // namespace

TreeShape tree_shape(const ProofNode& root) {
  TreeShape s;
  shape_rec(root, 0, s);
  return s;
}

}  // namespace lemmaloop
