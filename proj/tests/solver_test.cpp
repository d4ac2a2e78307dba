#include <gtest/gtest.h>

#include <csignal>

#include "lemmaloop/solver.hpp"
#include "support.hpp"

namespace lemmaloop {
namespace {

using namespace testing;
namespace fs = std::filesystem;

SolverConfig fake(const std::string& name, const std::string& exe) {
  SolverConfig c;
  c.name = name;
  c.executable = exe;
  return c;
}

// Any live process whose command line contains `marker`.
bool process_with_marker(const std::string& marker) {
  for (const auto& e : fs::directory_iterator("/proc")) {
    std::string pid = e.path().filename().string();
    if (pid.find_first_not_of("0123456789") != std::string::npos) continue;
    std::string cmd = slurp(e.path() / "cmdline");
    std::string stat = slurp(e.path() / "stat");
    auto close = stat.rfind(')');
    if (close != std::string::npos && stat.size() > close + 2 && stat[close + 2] == 'Z') continue;
    if (cmd.find(marker) != std::string::npos) return true;
  }
  return false;
}

TEST(VerdictTest, OnlyExactStatusLinesCount) {
  EXPECT_EQ(parse_verdict("unsat\n", Dialect::Smtlib2), Outcome::Unsat);
  EXPECT_EQ(parse_verdict("  sat  \n", Dialect::Smtlib2), Outcome::Sat);
  EXPECT_EQ(parse_verdict("unknown\n", Dialect::Smtlib2), Outcome::Unknown);
  EXPECT_EQ(parse_verdict("(error \"unsat core not available\")\n", Dialect::Smtlib2), Outcome::SolverError);
  EXPECT_EQ(parse_verdict("unsatisfiable\n", Dialect::Smtlib2), Outcome::SolverError);
  EXPECT_EQ(parse_verdict("", Dialect::Smtlib2), Outcome::SolverError);
  EXPECT_EQ(parse_verdict("% SZS status Theorem for x\n", Dialect::Smtlib2), Outcome::SolverError);
}

TEST(VerdictTest, VampireSzsStatus) {
  EXPECT_EQ(parse_verdict("% SZS status Unsatisfiable for t\n", Dialect::Smtlib2Vampire), Outcome::Unsat);
  EXPECT_EQ(parse_verdict("% SZS status Theorem for t\n", Dialect::Smtlib2Vampire), Outcome::Unsat);
  EXPECT_EQ(parse_verdict("% SZS status CounterSatisfiable for t\n", Dialect::Smtlib2Vampire), Outcome::Sat);
  EXPECT_EQ(parse_verdict("% SZS status Timeout for t\n", Dialect::Smtlib2Vampire), Outcome::Timeout);
  EXPECT_EQ(parse_verdict("% SZS status GaveUp for t\n", Dialect::Smtlib2Vampire), Outcome::Unknown);
  EXPECT_EQ(parse_verdict("unsat\n", Dialect::Smtlib2Vampire), Outcome::Unsat);
}

TEST(VerdictTest, OutcomeNamesRoundTrip) {
  for (Outcome o : {Outcome::Unsat, Outcome::Sat, Outcome::Unknown, Outcome::Timeout, Outcome::SolverError}) {
    EXPECT_EQ(outcome_from_string(to_string(o)), o);
  }
  EXPECT_FALSE(outcome_from_string("proved"));
}

TEST(ConfigTest, TimeoutFlagsAreRejected) {
  SolverConfig c = cvc5_preset(1);
  EXPECT_NO_THROW(validate_config(c));
  for (const char* flag : {"--tlimit=5000", "--tlimit-per=100", "-t", "--time_limit", "--rlimit=10"}) {
    SolverConfig bad = c;
    bad.args.push_back(flag);
    EXPECT_THROW(validate_config(bad), ConfigError) << flag;
  }
  EXPECT_THROW(validate_config(fake("", "cvc5")), ConfigError);
  EXPECT_THROW(validate_config(fake("x", "")), ConfigError);
}

TEST(ConfigTest, PresetsAreNamedAndDistinct) {
  auto p = default_portfolio();
  ASSERT_EQ(p.size(), 4u);
  std::set<std::string> names;
  for (const auto& c : p) {
    names.insert(c.name);
    EXPECT_NO_THROW(validate_config(c));
    EXPECT_EQ(preset_by_name(c.name)->args, c.args);
  }
  EXPECT_EQ(names.size(), 4u);
  EXPECT_EQ(vampire_preset().dialect, Dialect::Smtlib2Vampire);
  EXPECT_EQ(filter_preset().name, cvc5_preset(1).name);
  EXPECT_FALSE(preset_by_name("z3"));
  EXPECT_THROW(cvc5_preset(4), std::invalid_argument);
}

TEST(RunSolverTest, ReadsVerdictFromStdoutAndStdin) {
  TempDir dir;
  auto exe = write_script(dir.path(), "answer", "grep -q 'check-sat' \"$1\" && echo unsat\n");
  SolverVerdict v = run_solver("(check-sat)\n", fake("file", exe), 5);
  EXPECT_EQ(v.outcome, Outcome::Unsat);
  EXPECT_EQ(v.config_name, "file");

  auto cat = write_script(dir.path(), "stdin", "grep -q 'check-sat' && echo sat\n");
  SolverConfig c = fake("stdin", cat);
  c.use_stdin = true;
  EXPECT_EQ(run_solver("(check-sat)\n", c, 5).outcome, Outcome::Sat);
}

TEST(RunSolverTest, CrashesAreSolverErrors) {
  TempDir dir;
  auto segv = write_script(dir.path(), "segv", "echo unsat\nkill -SEGV $$\n");
  EXPECT_EQ(run_solver("x", fake("segv", segv), 5).outcome, Outcome::SolverError);
  auto garbage = write_script(dir.path(), "garbage", "echo '(error \"parse\")'\nexit 1\n");
  SolverVerdict v = run_solver("x", fake("garbage", garbage), 5);
  EXPECT_EQ(v.outcome, Outcome::SolverError);
  EXPECT_NE(v.raw_output.find("parse"), std::string::npos);
}

TEST(RunSolverTest, RawOutputIsTruncated) {
  TempDir dir;
  auto loud = write_script(dir.path(), "loud", "yes warning | head -c 20000\necho unsat\n");
  SolverVerdict v = run_solver("x", fake("loud", loud), 5);
  EXPECT_LE(v.raw_output.size(), kMaxRawOutput);
}

TEST(RunSolverTest, SpawnFailureForMissingExecutable) {
  EXPECT_THROW(run_solver("x", fake("gone", "/nonexistent/solver"), 1), SpawnFailure);
  EXPECT_THROW(run_solver("x", fake("gone", "no-such-solver-on-path"), 1), SpawnFailure);
  EXPECT_FALSE(resolve_executable("/nonexistent/solver"));
  EXPECT_TRUE(resolve_executable("sh"));
}

TEST(RunSolverTest, TimeoutKillsTheWholeProcessGroup) {
  TempDir dir;
  std::string marker = "lemmaloop-grandchild-" + std::to_string(::getpid());
  auto exe = write_script(dir.path(), "hang", "sh -c 'sleep 30; : " + marker + "' &\nsleep 30\necho unsat\n");
  auto start = std::chrono::steady_clock::now();
  SolverVerdict v = run_solver("x", fake("hang", exe), 0.5);
  double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_EQ(v.outcome, Outcome::Timeout);
  EXPECT_FALSE(v.cancelled);
  EXPECT_LT(wall, 3.0);
  std::this_thread::sleep_for(std::chrono::milliseconds(200));
  EXPECT_FALSE(process_with_marker(marker));
  EXPECT_TRUE(child_processes().empty());
}

TEST(RunSolverTest, StopRequestCancels) {
  TempDir dir;
  auto exe = write_script(dir.path(), "hang", "sleep 30\n");
  std::stop_source src;
  std::jthread stopper([&] {
    std::this_thread::sleep_for(std::chrono::milliseconds(200));
    src.request_stop();
  });
  SolverVerdict v = run_solver("x", fake("hang", exe), 20, src.get_token());
  EXPECT_EQ(v.outcome, Outcome::Timeout);
  EXPECT_TRUE(v.cancelled);
  EXPECT_LT(v.elapsed, 5.0);
  EXPECT_THROW(run_solver("x", fake("hang", exe), 0), std::invalid_argument);
}

TEST(PortfolioTest, FirstConclusiveAnswerWinsAndCancelsTheRest) {
  TempDir dir;
  auto slow = write_script(dir.path(), "slow", "sleep 30\necho unsat\n");
  auto quick = write_script(dir.path(), "quick", "sleep 0.1\necho unsat\n");
  auto unk = write_script(dir.path(), "unk", "echo unknown\n");
  SolverVerdict v = run_portfolio("x", {fake("slow", slow), fake("unk", unk), fake("quick", quick)}, 20);
  EXPECT_EQ(v.outcome, Outcome::Unsat);
  EXPECT_EQ(v.config_name, "quick");
  EXPECT_LT(v.elapsed, 5.0);
  EXPECT_TRUE(child_processes().empty());
}

TEST(PortfolioTest, InconclusiveRanking) {
  TempDir dir;
  auto unk = write_script(dir.path(), "unk", "echo unknown\n");
  auto err = write_script(dir.path(), "err", "exit 3\n");
  auto hang = write_script(dir.path(), "hang", "sleep 30\n");
  EXPECT_EQ(run_portfolio("x", {fake("err", err), fake("hang", hang), fake("unk", unk)}, 0.5).outcome,
            Outcome::Unknown);
  EXPECT_EQ(run_portfolio("x", {fake("err", err), fake("hang", hang)}, 0.5).outcome, Outcome::Timeout);
}

TEST(PortfolioTest, DisagreementIsFatal) {
  TempDir dir;
  // Each waits for the other to start, so both answer before either is cancelled.
  std::string d = dir.path().string();
  auto yes = write_script(dir.path(), "yes", "touch " + d + "/a; while [ ! -e " + d + "/b ]; do :; done; echo sat\n");
  auto no = write_script(dir.path(), "no", "touch " + d + "/b; while [ ! -e " + d + "/a ]; do :; done; echo unsat\n");
  EXPECT_THROW(run_portfolio("x", {fake("yes", yes), fake("no", no)}, 5), PortfolioDisagreement);
}

TEST(PortfolioTest, MissingMembersAreToleratedUnlessAllMissing) {
  TempDir dir;
  auto ok = write_script(dir.path(), "ok", "echo unsat\n");
  EXPECT_EQ(run_portfolio("x", {fake("gone", "/nonexistent/a"), fake("ok", ok)}, 5).outcome, Outcome::Unsat);
  EXPECT_THROW(run_portfolio("x", {fake("a", "/nonexistent/a"), fake("b", "/nonexistent/b")}, 5), SpawnFailure);
}

TEST(PortfolioTest, ProcessCapIsShared) {
  int before = max_solver_processes();
  set_max_solver_processes(1);
  EXPECT_EQ(max_solver_processes(), 1);
  TempDir dir;
  auto a = write_script(dir.path(), "a", "sleep 0.2\necho unknown\n");
  auto b = write_script(dir.path(), "b", "sleep 0.2\necho unknown\n");
  SolverVerdict v = run_portfolio("x", {fake("a", a), fake("b", b)}, 5);
  // One slot: the two runs are serialized.
  EXPECT_GE(v.elapsed, 0.4);
  set_max_solver_processes(0);
  EXPECT_EQ(max_solver_processes(), 1);
  set_max_solver_processes(before);
}

// Oracle: run alone with a 10s limit, only the induction preset answers
// unsat on this task; the other two presets time out.
TEST(PortfolioTest, PresetThatAloneSolvesTheTaskIsReported) {
  if (!have_cvc5()) GTEST_SKIP() << "cvc5 not available";
  std::string script = slurp(fixture("mini-suite/plus-zero-right.smt2"));
  SolverVerdict v = run_portfolio(script, {cvc5_preset(1), cvc5_preset(2), cvc5_preset(3)}, 20);
  EXPECT_EQ(v.outcome, Outcome::Unsat);
  EXPECT_EQ(v.config_name, "cvc5-ind");
  EXPECT_EQ(run_solver(script, cvc5_preset(1), 2).outcome, Outcome::Timeout);
  EXPECT_TRUE(child_processes().empty());
}

}  // namespace
}  // namespace lemmaloop
