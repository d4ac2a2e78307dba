#include "lemmaloop/solver.hpp"

#include <dirent.h>
#include <fcntl.h>
#include <signal.h>
#include <spawn.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <cerrno>
#include <condition_variable>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

extern char** environ;

namespace lemmaloop {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::Unsat: return "Unsat";
    case Outcome::Sat: return "Sat";
    case Outcome::Unknown: return "Unknown";
    case Outcome::Timeout: return "Timeout";
    case Outcome::SolverError: return "SolverError";
  }
  return "SolverError";
}

std::optional<Outcome> outcome_from_string(std::string_view s) {
  for (Outcome o : {Outcome::Unsat, Outcome::Sat, Outcome::Unknown, Outcome::Timeout, Outcome::SolverError}) {
    if (to_string(o) == s) return o;
  }
  return std::nullopt;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::optional<Outcome> szs_status(std::string_view line) {
  constexpr std::string_view prefix = "% SZS status ";
  if (line.substr(0, prefix.size()) != prefix) return std::nullopt;
  std::string_view rest = line.substr(prefix.size());
  std::string_view status = rest.substr(0, rest.find(' '));
  if (status == "Unsatisfiable" || status == "Theorem" || status == "ContradictoryAxioms") return Outcome::Unsat;
  if (status == "Satisfiable" || status == "CounterSatisfiable") return Outcome::Sat;
  if (status == "Timeout") return Outcome::Timeout;
  return Outcome::Unknown;
}

}  // namespace

Outcome parse_verdict(std::string_view output, Dialect dialect) {
  std::size_t pos = 0;
  while (pos <= output.size()) {
    std::size_t end = output.find('\n', pos);
    if (end == std::string_view::npos) end = output.size();
    std::string_view line = trim(output.substr(pos, end - pos));
    pos = end + 1;
    if (line == "unsat") return Outcome::Unsat;
    if (line == "sat") return Outcome::Sat;
    if (line == "unknown") return Outcome::Unknown;
    if (dialect == Dialect::Smtlib2Vampire) {
      if (auto o = szs_status(line)) return *o;
    }
  }
  return Outcome::SolverError;
}

void validate_config(const SolverConfig& config) {
  if (config.name.empty()) throw ConfigError("solver config without a name");
  if (config.executable.empty()) throw ConfigError("solver config '" + config.name + "' has no executable");
  static const std::array<std::string_view, 8> timeout_flags = {
      "--tlimit", "--tlimit-per", "--time-limit", "--time_limit", "--timeout", "-t", "-T", "--rlimit"};
  for (const auto& a : config.args) {
    std::string_view flag = std::string_view(a).substr(0, a.find('='));
    if (std::find(timeout_flags.begin(), timeout_flags.end(), flag) != timeout_flags.end()) {
      throw ConfigError("solver config '" + config.name + "' sets a timeout flag (" + a +
                        "); limits are enforced by the runner");
    }
  }
}

std::optional<std::string> resolve_executable(const std::string& exe) {
  auto runnable = [](const fs::path& p) {
    std::error_code ec;
    return fs::is_regular_file(p, ec) && ::access(p.c_str(), X_OK) == 0;
  };
  if (exe.find('/') != std::string::npos) {
    if (runnable(exe)) return fs::absolute(exe).string();
    return std::nullopt;
  }
  const char* path = std::getenv("PATH");
  if (!path) return std::nullopt;
  std::stringstream ss(path);
  std::string dir;
  while (std::getline(ss, dir, ':')) {
    if (dir.empty()) continue;
    fs::path candidate = fs::path(dir) / exe;
    if (runnable(candidate)) return candidate.string();
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Process slots

namespace {

struct Slots {
  std::mutex mu;
  std::condition_variable_any cv;
  int capacity = std::max(4, static_cast<int>(std::thread::hardware_concurrency()));
  int in_use = 0;
};

Slots& slots() {
  static Slots s;
  return s;
}

class SlotGuard {
 public:
  // Waits for a free slot; returns with held() == false if stopped first.
  explicit SlotGuard(std::stop_token stop) {
    Slots& s = slots();
    std::unique_lock lock(s.mu);
    held_ = s.cv.wait(lock, stop, [&] { return s.in_use < s.capacity; });
    if (held_) ++s.in_use;
  }
  ~SlotGuard() {
    if (!held_) return;
    Slots& s = slots();
    {
      std::lock_guard lock(s.mu);
      --s.in_use;
    }
    s.cv.notify_one();
  }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;
  bool held() const { return held_; }

 private:
  bool held_ = false;
};

class TempFile {
 public:
  TempFile(const char* tag, const char* suffix) {
    const char* dir = std::getenv("TMPDIR");
    std::string pattern = std::string(dir && *dir ? dir : "/tmp") + "/lemmaloop-" + tag + "-XXXXXX" + suffix;
    std::vector<char> buf(pattern.begin(), pattern.end());
    buf.push_back('\0');
    int fd = ::mkstemps(buf.data(), static_cast<int>(std::strlen(suffix)));
    if (fd < 0) throw std::runtime_error(std::string("mkstemp failed: ") + std::strerror(errno));
    ::close(fd);
    path_ = buf.data();
  }
  ~TempFile() { ::unlink(path_.c_str()); }
  TempFile(const TempFile&) = delete;
  TempFile& operator=(const TempFile&) = delete;
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

std::string read_prefix(const std::string& path, std::size_t limit) {
  std::ifstream in(path, std::ios::binary);
  std::string out(limit, '\0');
  in.read(out.data(), static_cast<std::streamsize>(limit));
  out.resize(static_cast<std::size_t>(in.gcount()));
  return out;
}

}  // namespace

void set_max_solver_processes(int n) {
  Slots& s = slots();
  {
    std::lock_guard lock(s.mu);
    s.capacity = std::max(1, n);
  }
  s.cv.notify_all();
}

int max_solver_processes() {
  Slots& s = slots();
  std::lock_guard lock(s.mu);
  return s.capacity;
}

// ---------------------------------------------------------------------------
// run_solver

SolverVerdict run_solver(const std::string& script, const SolverConfig& config, double timeout_seconds,
                         std::stop_token stop) {
  if (!(timeout_seconds > 0)) throw std::invalid_argument("solver timeout must be positive");
  validate_config(config);
  auto exe = resolve_executable(config.executable);
  if (!exe) throw SpawnFailure("cannot execute '" + config.executable + "' for solver '" + config.name + "'");

  SolverVerdict verdict;
  verdict.config_name = config.name;

  SlotGuard slot(stop);
  if (!slot.held()) {
    verdict.outcome = Outcome::Timeout;
    verdict.cancelled = true;
    return verdict;
  }

  TempFile input("in", ".smt2");
  TempFile out("out", "");
  TempFile err("err", "");
  {
    std::ofstream f(input.path(), std::ios::binary);
    f << script;
    if (!f) throw std::runtime_error("cannot write solver input to " + input.path());
  }

  std::vector<std::string> argv_store;
  argv_store.push_back(*exe);
  argv_store.insert(argv_store.end(), config.args.begin(), config.args.end());
  if (!config.use_stdin) argv_store.push_back(input.path());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  argv.push_back(nullptr);

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_addopen(&actions, 0, config.use_stdin ? input.path().c_str() : "/dev/null", O_RDONLY, 0);
  posix_spawn_file_actions_addopen(&actions, 1, out.path().c_str(), O_WRONLY | O_TRUNC, 0);
  posix_spawn_file_actions_addopen(&actions, 2, err.path().c_str(), O_WRONLY | O_TRUNC, 0);
  posix_spawnattr_t attr;
  posix_spawnattr_init(&attr);
  posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP | POSIX_SPAWN_SETSIGMASK);
  posix_spawnattr_setpgroup(&attr, 0);
  sigset_t empty;
  sigemptyset(&empty);
  posix_spawnattr_setsigmask(&attr, &empty);

  const auto start = Clock::now();
  pid_t pid = -1;
  int rc = ::posix_spawn(&pid, exe->c_str(), &actions, &attr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  posix_spawnattr_destroy(&attr);
  if (rc != 0) {
    throw SpawnFailure("spawning '" + *exe + "' failed: " + std::strerror(rc));
  }

  const auto deadline = start + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(timeout_seconds));
  int status = 0;
  bool exited = false;
  bool timed_out = false;
  auto nap = std::chrono::milliseconds(2);
  while (true) {
    pid_t w = ::waitpid(pid, &status, WNOHANG);
    if (w == pid) {
      exited = true;
      break;
    }
    if (w < 0 && errno != EINTR) break;
    if (stop.stop_requested()) {
      verdict.cancelled = true;
      break;
    }
    auto now = Clock::now();
    if (now >= deadline) {
      timed_out = true;
      break;
    }
    std::this_thread::sleep_for(std::min<Clock::duration>(nap, deadline - now));
    nap = std::min(nap * 2, std::chrono::milliseconds(20));
  }
  // Take down the whole group, including anything the solver forked.
  ::kill(-pid, SIGKILL);
  if (!exited) {
    while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
    // Finished on its own just before the stop arrived.
    if (verdict.cancelled && WIFEXITED(status)) verdict.cancelled = false;
  }
  verdict.elapsed = std::chrono::duration<double>(Clock::now() - start).count();

  std::string stdout_text = read_prefix(out.path(), kMaxRawOutput);
  std::string stderr_text = read_prefix(err.path(), kMaxRawOutput);
  verdict.raw_output = stdout_text;
  if (!stderr_text.empty() && verdict.raw_output.size() < kMaxRawOutput) {
    verdict.raw_output += stderr_text.substr(0, kMaxRawOutput - verdict.raw_output.size());
  }

  if (timed_out || verdict.cancelled) {
    verdict.outcome = Outcome::Timeout;
    return verdict;
  }
  Outcome parsed = parse_verdict(stdout_text, config.dialect);
  if (parsed == Outcome::SolverError && WIFEXITED(status) && WEXITSTATUS(status) == 0 &&
      stdout_text.find("(error") == std::string::npos && trim(stdout_text).empty()) {
    // Exited cleanly but said nothing.
    parsed = Outcome::Unknown;
  }
  if (is_conclusive(parsed) && WIFSIGNALED(status)) parsed = Outcome::SolverError;
  verdict.outcome = parsed;
  return verdict;
}

// ---------------------------------------------------------------------------
// run_portfolio

namespace {

int inconclusive_rank(Outcome o) {
  switch (o) {
    case Outcome::Unknown: return 0;
    case Outcome::Timeout: return 1;
    default: return 2;
  }
}

}  // namespace

SolverVerdict run_portfolio(const std::string& script, const std::vector<SolverConfig>& configs,
                            double timeout_seconds, std::stop_token stop) {
  if (configs.empty()) throw std::invalid_argument("portfolio needs at least one solver config");
  if (configs.size() == 1) return run_solver(script, configs.front(), timeout_seconds, stop);

  const auto start = Clock::now();
  std::stop_source race;
  std::stop_callback forward(stop, [&] { race.request_stop(); });

  std::mutex mu;
  std::optional<SolverVerdict> winner;
  std::vector<SolverVerdict> finished;
  std::vector<std::string> spawn_errors;
  std::vector<std::string> conflicts;

  {
    std::vector<std::jthread> workers;
    workers.reserve(configs.size());
    for (const auto& cfg : configs) {
      workers.emplace_back([&, cfg] {
        try {
          SolverVerdict v = run_solver(script, cfg, timeout_seconds, race.get_token());
          std::lock_guard lock(mu);
          if (is_conclusive(v.outcome)) {
            if (!winner) {
              winner = v;
              race.request_stop();
            } else if (winner->outcome != v.outcome) {
              conflicts.push_back(winner->config_name + " said " + to_string(winner->outcome) + ", " +
                                  v.config_name + " said " + to_string(v.outcome));
            }
          }
          finished.push_back(std::move(v));
        } catch (const SpawnFailure& e) {
          std::lock_guard lock(mu);
          spawn_errors.push_back(e.what());
          SolverVerdict v;
          v.config_name = cfg.name;
          v.outcome = Outcome::SolverError;
          v.raw_output = e.what();
          finished.push_back(std::move(v));
        }
      });
    }
  }  // joins

  const double wall = std::chrono::duration<double>(Clock::now() - start).count();
  if (!conflicts.empty()) {
    std::string msg = "solver portfolio disagreement: " + conflicts.front();
    std::cerr << "FATAL: " << msg << '\n';
    throw PortfolioDisagreement(msg);
  }
  if (spawn_errors.size() == configs.size()) {
    throw SpawnFailure("no solver in the portfolio could be started: " + spawn_errors.front());
  }
  if (winner) {
    winner->elapsed = wall;
    return *winner;
  }
  auto best = std::min_element(finished.begin(), finished.end(), [](const SolverVerdict& a, const SolverVerdict& b) {
    return inconclusive_rank(a.outcome) < inconclusive_rank(b.outcome);
  });
  SolverVerdict out = *best;
  out.elapsed = wall;
  out.cancelled = stop.stop_requested();
  return out;
}

// ---------------------------------------------------------------------------
// Presets

namespace {

std::string env_or(const char* var, const char* fallback) {
  const char* v = std::getenv(var);
  return v && *v ? v : fallback;
}

}  // namespace

SolverConfig cvc5_preset(int index) {
  SolverConfig c;
  c.executable = env_or("LEMMALOOP_CVC5", "cvc5");
  c.args = {"--full-saturate-quant"};
  switch (index) {
    case 1:
      c.name = "cvc5-fsq";
      break;
    case 2:
      c.name = "cvc5-ind";
      c.args.insert(c.args.end(), {"--quant-ind", "--conjecture-gen"});
      break;
    case 3:
      c.name = "cvc5-ind-noem";
      c.args.insert(c.args.end(), {"--quant-ind", "--conjecture-gen", "--no-e-matching"});
      break;
    default:
      throw std::invalid_argument("cvc5 presets are numbered 1 to 3");
  }
  return c;
}

SolverConfig cvc4_preset() {
  SolverConfig c;
  c.name = "cvc4-ind";
  c.executable = env_or("LEMMALOOP_CVC4", "cvc4");
  c.args = {"--quant-ind", "--quant-cf", "--conjecture-gen", "--full-saturate-quant", "--lang=smt2.6"};
  return c;
}

SolverConfig vampire_preset() {
  SolverConfig c;
  c.name = "vampire-portfolio";
  c.executable = env_or("LEMMALOOP_VAMPIRE", "vampire");
  c.args = {"--mode", "portfolio", "--schedule", "induction", "--input_syntax", "smtlib2"};
  c.dialect = Dialect::Smtlib2Vampire;
  return c;
}

std::vector<SolverConfig> default_portfolio() {
  return {cvc5_preset(1), cvc5_preset(2), cvc5_preset(3), cvc4_preset()};
}

SolverConfig filter_preset() { return cvc5_preset(1); }

std::optional<SolverConfig> preset_by_name(std::string_view name) {
  for (int i = 1; i <= 3; ++i) {
    if (cvc5_preset(i).name == name) return cvc5_preset(i);
  }
  if (name == "cvc4-ind") return cvc4_preset();
  if (name == "vampire-portfolio") return vampire_preset();
  return std::nullopt;
}

std::string solver_version(const SolverConfig& config) {
  SolverConfig probe = config;
  probe.args = {"--version"};
  probe.use_stdin = true;
  try {
    SolverVerdict v = run_solver("", probe, 10.0);
    std::string first = v.raw_output.substr(0, v.raw_output.find('\n'));
    return first.empty() ? "unknown" : first;
  } catch (const std::exception&) {
    return "unavailable";
  }
}

std::vector<int> child_processes() {
  std::vector<int> out;
  const std::string self = std::to_string(::getpid());
  DIR* d = ::opendir("/proc");
  if (!d) return out;
  while (dirent* e = ::readdir(d)) {
    if (!std::isdigit(static_cast<unsigned char>(e->d_name[0]))) continue;
    std::ifstream st(std::string("/proc/") + e->d_name + "/stat");
    std::string line;
    if (!std::getline(st, line)) continue;
    // pid (comm) state ppid ...
    auto close = line.rfind(')');
    if (close == std::string::npos) continue;
    std::istringstream rest(line.substr(close + 1));
    std::string state, ppid;
    rest >> state >> ppid;
    if (ppid == self) out.push_back(std::stoi(e->d_name));
  }
  ::closedir(d);
  return out;
}

}  // namespace lemmaloop
