#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <stdexcept>
#include <stop_token>
#include <string>
#include <string_view>
#include <vector>

namespace lemmaloop {

enum class Outcome { Unsat, Sat, Unknown, Timeout, SolverError };

std::string to_string(Outcome o);
std::optional<Outcome> outcome_from_string(std::string_view s);
inline bool is_conclusive(Outcome o) { return o == Outcome::Unsat || o == Outcome::Sat; }

enum class Dialect { Smtlib2, Smtlib2Vampire };

struct SolverConfig {
  std::string name;
  /// Path, or a bare name looked up on PATH.
  std::string executable;
  std::vector<std::string> args;
  Dialect dialect = Dialect::Smtlib2;
  /// Feed the script on stdin instead of passing a file path.
  bool use_stdin = false;
};

struct SolverVerdict {
  Outcome outcome = Outcome::SolverError;
  double elapsed = 0.0;
  /// stdout followed by stderr, truncated to kMaxRawOutput bytes.
  std::string raw_output;
  std::string config_name;
  /// Stopped by a cancellation request rather than by its own timeout.
  bool cancelled = false;
};

inline constexpr std::size_t kMaxRawOutput = 4096;

class SpawnFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two portfolio members returned Sat and Unsat on the same script.
class PortfolioDisagreement : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Map solver output to an outcome. Only a line consisting of exactly
/// `unsat`/`sat`/`unknown` (or an SZS status line for Vampire) counts.
Outcome parse_verdict(std::string_view output, Dialect dialect);

/// Throws ConfigError if `args` carries a timeout flag or the name is empty.
void validate_config(const SolverConfig& config);

/// Absolute path of `exe` if it can be executed, else nullopt.
std::optional<std::string> resolve_executable(const std::string& exe);

/// Run one solver process with a hard wall-clock limit. The whole process
/// group is killed on timeout or when `stop` is requested. Crashes map to
/// SolverError. Throws SpawnFailure if the executable cannot be started.
SolverVerdict run_solver(const std::string& script, const SolverConfig& config, double timeout_seconds,
                         std::stop_token stop = {});

/// Race all configs. The first Sat/Unsat wins and the rest are cancelled.
/// Otherwise the best inconclusive verdict is returned (Unknown, then
/// Timeout, then SolverError). Throws SpawnFailure only if every config
/// failed to spawn and PortfolioDisagreement on conflicting answers.
SolverVerdict run_portfolio(const std::string& script, const std::vector<SolverConfig>& configs,
                            double timeout_seconds, std::stop_token stop = {});

/// Cap on concurrently running solver processes, shared by the whole process.
void set_max_solver_processes(int n);
int max_solver_processes();

/// Built-in configurations. Executables default to `cvc5`, `cvc4` and
/// `vampire` and are overridden by LEMMALOOP_CVC5, LEMMALOOP_CVC4 and
/// LEMMALOOP_VAMPIRE.
SolverConfig cvc5_preset(int index);  // 1, 2 or 3
SolverConfig cvc4_preset();
SolverConfig vampire_preset();
std::vector<SolverConfig> default_portfolio();
/// Preset used for the one-second consistency check.
SolverConfig filter_preset();
std::optional<SolverConfig> preset_by_name(std::string_view name);

/// Version banner of a solver (first line of `--version`), or "unknown".
std::string solver_version(const SolverConfig& config);

/// Pids whose parent is this process (read from /proc).
std::vector<int> child_processes();

/// Anything that can decide an obligation script.
class Prover {
 public:
  virtual ~Prover() = default;
  virtual SolverVerdict check(const std::string& script, double timeout_seconds, std::stop_token stop) = 0;
};

class PortfolioProver : public Prover {
 public:
  explicit PortfolioProver(std::vector<SolverConfig> configs) : configs_(std::move(configs)) {}
  SolverVerdict check(const std::string& script, double timeout_seconds, std::stop_token stop) override {
    return run_portfolio(script, configs_, timeout_seconds, stop);
  }
  const std::vector<SolverConfig>& configs() const { return configs_; }

 private:
  std::vector<SolverConfig> configs_;
};

}  // namespace lemmaloop
