#pragma once

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "lemmaloop/llm.hpp"
#include "lemmaloop/smtlib.hpp"
#include "lemmaloop/solver.hpp"

namespace lemmaloop::testing {

inline std::filesystem::path source_dir() { return LEMMALOOP_SOURCE_DIR; }
inline std::filesystem::path fixture(const std::string& rel) { return source_dir() / "fixtures" / rel; }

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << text;
}

/// cvc5 (or the bundled front end) is reachable.
inline bool have_cvc5() { return resolve_executable(cvc5_preset(1).executable).has_value(); }

inline Task running_example() { return parse_file(fixture("nat-mult-comm.smt2").string()); }

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "lemmaloop-test-XXXXXX").string();
    path_ = ::mkdtemp(tmpl.data());
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

/// Executable shell script in `dir`.
inline std::string write_script(const std::filesystem::path& dir, const std::string& name, const std::string& body) {
  auto p = dir / name;
  spit(p, "#!/bin/sh\n" + body);
  std::filesystem::permissions(p, std::filesystem::perms::owner_all);
  return p.string();
}

/// Prover answering from a callback; counts calls.
class ScriptedProver : public Prover {
 public:
  using Rule = std::function<Outcome(const std::string& script)>;
  explicit ScriptedProver(Rule rule, std::chrono::milliseconds delay = {}) : rule_(std::move(rule)), delay_(delay) {}

  SolverVerdict check(const std::string& script, double timeout_seconds, std::stop_token stop) override {
    ++calls;
    {
      std::lock_guard lock(mu_);
      scripts.push_back(script);
    }
    SolverVerdict v;
    v.config_name = "scripted";
    Outcome o = rule_(script);
    auto limit = std::chrono::duration<double>(timeout_seconds);
    auto start = std::chrono::steady_clock::now();
    auto wait = o == Outcome::Timeout ? std::chrono::duration_cast<std::chrono::steady_clock::duration>(limit)
                                      : std::chrono::duration_cast<std::chrono::steady_clock::duration>(delay_);
    while (std::chrono::steady_clock::now() - start < wait) {
      if (stop.stop_requested()) {
        v.outcome = Outcome::Timeout;
        v.cancelled = true;
        v.elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return v;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(1));
    }
    v.outcome = o;
    v.elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return v;
  }

  std::atomic<int> calls{0};
  std::vector<std::string> scripts;

 private:
  Rule rule_;
  std::chrono::milliseconds delay_;
  std::mutex mu_;
};

/// Language model answering from a callback; records prompts.
class ScriptedModel : public LanguageModel {
 public:
  using Rule = std::function<std::string(const std::string& prompt, int iteration)>;
  explicit ScriptedModel(Rule rule, TokenUsage per_call = {100, 20}) : rule_(std::move(rule)), usage_(per_call) {}

  LlmResponse query(const std::string& prompt, int iteration) override {
    ++calls;
    std::lock_guard lock(mu_);
    prompts.push_back(prompt);
    return {rule_(prompt, iteration), usage_};
  }
  const ModelConfig& config() const override { return cfg_; }

  std::atomic<int> calls{0};
  std::vector<std::string> prompts;

 private:
  Rule rule_;
  TokenUsage usage_;
  ModelConfig cfg_;
  std::mutex mu_;
};

/// The goal section of a rendered prompt (text after the goal label).
inline std::string goal_of_prompt(const std::string& prompt) {
  auto pos = prompt.find(kGoalLabel);
  if (pos == std::string::npos) return {};
  auto start = prompt.find('\n', pos);
  auto end = prompt.find('\n', start + 1);
  return prompt.substr(start + 1, end - start - 1);
}

inline const std::string kL1 = "(forall ((x Nat) (y Nat)) (= (plus (mult y x) y) (mult y (succ x))))";
inline const std::string kL2 =
    "(forall ((x Nat) (y Nat)) (= (plus (plus (mult y x) x) (succ y)) (plus (plus (mult y x) y) (succ x))))";
inline const std::string kL3 =
    "(forall ((t Nat) (x Nat) (y Nat)) (= (plus (plus t x) (succ y)) (plus (plus t y) (succ x))))";
inline const std::string kPlusZeroBad = "(forall ((x Nat)) (= (plus x zero) zero))";
inline const std::string kPlusAssoc = "(forall ((x Nat) (y Nat) (z Nat)) (= (plus (plus x y) z) (plus x (plus y z))))";
inline const std::string kPlusComm = "(forall ((x Nat) (y Nat)) (= (plus x y) (plus y x)))";
inline const std::string kMultZero = "(forall ((x Nat)) (= (mult x zero) zero))";

}  // namespace lemmaloop::testing
