#include "lemmaloop/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "lemmaloop/bench.hpp"
#include "lemmaloop/certificate.hpp"
#include "lemmaloop/filter.hpp"
#include "lemmaloop/obligations.hpp"
#include "lemmaloop/smtlib.hpp"

namespace lemmaloop {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto b = item.find_first_not_of(" \t");
    auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

std::vector<PromptStrategy> parse_prompts(const std::string& s) {
  std::vector<PromptStrategy> out;
  for (const auto& name : split_list(s)) {
    auto p = strategy_from_string(name);
    if (!p) throw ConfigError("unknown prompt strategy: " + name);
    out.push_back(*p);
  }
  if (out.empty()) throw ConfigError("prompt pool is empty");
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("expected a number for " + key + ", got '" + v + "'");
  }
}

int to_int(const std::string& key, const std::string& v) {
  double d = to_double(key, v);
  if (d != static_cast<int>(d)) throw ConfigError("expected an integer for " + key);
  return static_cast<int>(d);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("expected true or false for " + key);
}

bool looks_secret(const std::string& key) {
  if (key == "api_key_env") return false;
  for (const char* s : {"api_key", "apikey", "secret", "token", "password"}) {
    if (key.find(s) != std::string::npos && key != "max_tokens") return true;
  }
  return false;
}

void apply_engine_key(EngineConfig& e, const std::string& key, const std::string& v) {
  if (key == "max_depth") e.max_depth = to_int(key, v);
  else if (key == "max_iters" || key == "max_iterations") e.max_iterations = to_int(key, v);
  else if (key == "prompts") e.prompt_pool = parse_prompts(v);
  else if (key == "timeout" || key == "task_timeout") e.task_time_limit = to_double(key, v);
  else if (key == "check_timeout") e.initial_check_timeout = e.verify_timeout = to_double(key, v);
  else if (key == "initial_check_timeout") e.initial_check_timeout = to_double(key, v);
  else if (key == "verify_timeout") e.verify_timeout = to_double(key, v);
  else if (key == "filter_timeout") e.filter_timeout = to_double(key, v);
  else if (key == "subgoal_parallelism") e.subgoal_parallelism = to_int(key, v);
  else if (key == "conjecture_cap") e.conjecture_cap = static_cast<std::size_t>(to_int(key, v));
  else if (key == "engine_off") e.engine_off = to_bool(key, v);
  else if (key == "memoize") e.memoize = to_bool(key, v);
  else if (key == "ancestor_check") e.ancestor_check = to_bool(key, v);
  else if (key == "filter_mode") {
    auto m = filter_mode_from_string(v);
    if (!m) throw ConfigError("unknown filter mode: " + v);
    e.filter_mode = *m;
  } else {
    throw ConfigError("unknown engine setting: " + key);
  }
}

void apply_model_key(ModelConfig& m, const std::string& key, const std::string& v) {
  if (key == "endpoint") m.endpoint = v;
  else if (key == "model") m.model = v;
  else if (key == "temperature") m.temperature = to_double(key, v);
  else if (key == "top_p") m.top_p = to_double(key, v);
  else if (key == "max_tokens") m.max_output_tokens = to_int(key, v);
  else if (key == "api_key_env") m.api_key_env = v;
  else if (key == "transcripts") m.transcripts_dir = v;
  else if (key == "requests_per_minute") m.requests_per_minute = to_double(key, v);
  else if (key == "request_timeout") m.request_timeout_seconds = to_double(key, v);
  else if (key == "max_retries") m.max_retries = to_int(key, v);
  else if (key == "mode") {
    auto mode = mode_from_string(v);
    if (!mode) throw ConfigError("unknown mode: " + v);
    m.mode = *mode;
  } else {
    throw ConfigError("unknown model setting: " + key);
  }
}

std::string joined(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : ",") + s;
  return out;
}

std::string dialect_name(Dialect d) { return d == Dialect::Smtlib2Vampire ? "vampire" : "smtlib2"; }

json solver_json(const SolverConfig& s) {
  return {{"name", s.name},
          {"executable", s.executable},
          {"args", s.args},
          {"dialect", dialect_name(s.dialect)},
          {"stdin", s.use_stdin}};
}

/// Keep solvers whose executable resolves; warn about the rest.
std::vector<SolverConfig> available(const std::vector<SolverConfig>& configs, std::ostream& err) {
  std::vector<SolverConfig> out;
  for (const auto& c : configs) {
    if (resolve_executable(c.executable)) {
      out.push_back(c);
    } else {
      err << "warning: solver " << c.name << " (" << c.executable << ") not found; dropped from the portfolio\n";
    }
  }
  return out;
}

void print_tree(const ProofNode& n, std::ostream& out, int indent) {
  out << std::string(static_cast<std::size_t>(indent) * 2, ' ') << "[" << to_string(n.status) << "]"
      << (n.memo_hit ? " (memo)" : "") << " " << render_term(n.task.goal, n.task);
  if (!n.closed_by.empty()) out << "  by " << n.closed_by;
  out << "  " << n.attempts.size() << " attempt(s)\n";
  for (const auto& c : n.children) {
    if (c) print_tree(*c, out, indent + 1);
  }
}

void write_text(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream o(p, std::ios::binary);
  o << text;
  if (!o) throw std::runtime_error("cannot write " + p.string());
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw UsageError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Flag values that override the merged configuration.
struct Overrides {
  std::string config_file;
  std::string solver_config;
  std::optional<double> timeout, check_timeout, filter_timeout, temperature, top_p;
  std::optional<int> max_depth, max_iters, subgoal_parallelism;
  std::optional<std::string> prompts, mode, transcripts, filter_mode, model;
  bool engine_off = false;
  bool trace = false;
  bool verbose = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_file, "Configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--solver-config", o.solver_config, "File with a [solvers] section")->check(CLI::ExistingFile);
  cmd->add_option("--timeout,--task-timeout", o.timeout, "Per-task time limit in seconds");
  cmd->add_option("--check-timeout", o.check_timeout, "Initial check and verify limit in seconds");
  cmd->add_option("--filter-timeout", o.filter_timeout, "Consistency check limit in seconds");
  cmd->add_option("--max-depth", o.max_depth);
  cmd->add_option("--max-iters", o.max_iters);
  cmd->add_option("--subgoal-parallelism", o.subgoal_parallelism);
  cmd->add_option("--prompts", o.prompts, "strategy1,strategy2 | naive");
  cmd->add_option("--mode", o.mode, "live | record | replay");
  cmd->add_option("--transcripts", o.transcripts, "Transcript directory");
  cmd->add_option("--filter-mode", o.filter_mode, "strict | drop-bad");
  cmd->add_option("--temperature", o.temperature);
  cmd->add_option("--top-p", o.top_p);
  cmd->add_option("--model", o.model);
  cmd->add_flag("--engine-off", o.engine_off, "Initial check only");
  cmd->add_flag("--trace", o.trace, "JSON progress events on stderr");
  cmd->add_flag("--verbose", o.verbose, "Print the effective configuration");
}

CliConfig merged(const Overrides& o) {
  CliConfig cfg;
  if (!o.config_file.empty()) apply_config_file(o.config_file, cfg);
  if (!o.solver_config.empty()) apply_config_file(o.solver_config, cfg);
  apply_environment(cfg);
  auto& e = cfg.engine;
  if (o.timeout) e.task_time_limit = *o.timeout;
  if (o.check_timeout) e.initial_check_timeout = e.verify_timeout = *o.check_timeout;
  if (o.filter_timeout) e.filter_timeout = *o.filter_timeout;
  if (o.max_depth) e.max_depth = *o.max_depth;
  if (o.max_iters) e.max_iterations = *o.max_iters;
  if (o.subgoal_parallelism) e.subgoal_parallelism = *o.subgoal_parallelism;
  if (o.prompts) e.prompt_pool = parse_prompts(*o.prompts);
  if (o.filter_mode) apply_engine_key(e, "filter_mode", *o.filter_mode);
  if (o.engine_off) e.engine_off = true;
  if (o.mode) apply_model_key(cfg.model, "mode", *o.mode);
  if (o.transcripts) cfg.model.transcripts_dir = *o.transcripts;
  if (o.temperature) cfg.model.temperature = *o.temperature;
  if (o.top_p) cfg.model.top_p = *o.top_p;
  if (o.model) cfg.model.model = *o.model;
  try {
    validate(cfg.engine);
    validate(cfg.model);
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(ex.what());
  }
  return cfg;
}

/// Solver and model objects built from a configuration.
struct Runtime {
  std::unique_ptr<PortfolioProver> backend;
  std::unique_ptr<PortfolioProver> filter;
  std::unique_ptr<LanguageModel> llm;
  std::unique_ptr<TraceSink> trace;
};

Runtime make_runtime(const CliConfig& cfg, const Overrides& o, std::ostream& err, bool need_llm) {
  Runtime rt;
  auto solvers = available(cfg.portfolio, err);
  if (solvers.empty()) throw ConfigError("no solver in the portfolio can be executed");
  rt.backend = std::make_unique<PortfolioProver>(solvers);
  if (!resolve_executable(cfg.filter_solver.executable)) {
    err << "warning: filter solver " << cfg.filter_solver.name << " not found; consistency checks will pass\n";
  }
  rt.filter = std::make_unique<PortfolioProver>(std::vector<SolverConfig>{cfg.filter_solver});
  if (need_llm && !cfg.engine.engine_off) {
    try {
      rt.llm = make_model(cfg.model);
    } catch (const ProviderError& e) {
      throw ConfigError(e.what());
    }
  }
  if (o.trace) rt.trace = std::make_unique<TraceSink>(err);
  return rt;
}

void maybe_describe(const CliConfig& cfg, const Overrides& o, std::ostream& err) {
  if (o.verbose) err << "effective configuration:\n" << describe(cfg).dump(2) << '\n';
}

Task load_task(const std::string& path) {
  if (!fs::exists(path)) throw UsageError("no such file: " + path);
  return parse_file(path);
}

// ---------------------------------------------------------------------------

int cmd_prove(const std::string& file, const std::string& out_path, const Overrides& o, std::ostream& out,
              std::ostream& err) {
  CliConfig cfg = merged(o);
  maybe_describe(cfg, o, err);
  Task task = load_task(file);
  Runtime rt = make_runtime(cfg, o, err, true);
  Engine engine(cfg.engine, *rt.backend, *rt.filter, rt.llm.get(), rt.trace.get());
  ProofOutcome result = engine.prove_task(task);

  out << (result.proved ? "proved" : "not proved") << " in " << result.wall_time << "s";
  out << " (" << result.llm_queries << " queries, " << result.tokens.total() << " tokens)\n";
  if (result.root) print_tree(*result.root, out, 1);
  if (!result.proved) return kExitNotProved;
  fs::path cert = out_path.empty() ? fs::path(fs::path(file).stem().string() + ".cert.json") : fs::path(out_path);
  write_text(cert, emit_certificate(result));
  out << "certificate: " << cert.string() << '\n';
  return kExitOk;
}

int cmd_bench(const std::string& input, const std::string& out_dir, int parallelism,
              const std::optional<std::string>& group, const Overrides& o, std::ostream& out, std::ostream& err) {
  CliConfig cfg = merged(o);
  maybe_describe(cfg, o, err);
  if (!fs::exists(input)) throw UsageError("no such file or directory: " + input);
  Runtime rt = make_runtime(cfg, o, err, true);

  BenchOptions opts;
  opts.input = input;
  opts.output_dir = out_dir;
  opts.task_parallelism = parallelism;
  opts.group_override = group;
  json versions = json::object();
  for (const auto& s : rt.backend->configs()) versions[s.name] = solver_version(s);
  opts.metadata = describe(cfg);
  opts.metadata["solver_versions"] = versions;

  BenchEnvironment env{cfg.engine, *rt.backend, *rt.filter, rt.llm.get(), rt.trace.get()};
  RunReport report = run_bench(opts, env);
  out << summarize(report);
  out << "report: " << (fs::path(out_dir) / "report.json").string() << '\n';
  return kExitOk;
}

int cmd_check(const std::string& cert, const Overrides& o, std::ostream& out, std::ostream& err) {
  CliConfig cfg = merged(o);
  maybe_describe(cfg, o, err);
  std::string text = read_text(cert);
  Runtime rt = make_runtime(cfg, o, err, false);
  CertificateCheck r;
  try {
    r = check_certificate(text, *rt.backend, cfg.engine.verify_timeout);
  } catch (const CertificateFormatError& e) {
    err << "error: malformed certificate: " << e.what() << '\n';
    return kExitUsage;
  }
  if (r.ok) {
    out << "certificate ok: " << r.nodes_checked << " node(s) re-verified\n";
    return kExitOk;
  }
  out << "certificate rejected at " << r.failing_path << ": " << r.message << '\n';
  return kExitNotProved;
}

int cmd_filter(const std::string& file, const std::string& conjecture, const Overrides& o, std::ostream& out,
               std::ostream& err) {
  CliConfig cfg = merged(o);
  maybe_describe(cfg, o, err);
  Task task = load_task(file);
  Runtime rt = make_runtime(cfg, o, err, false);
  FilterVerdict v = is_filtered(conjecture, task, *rt.filter, cfg.engine.filter_timeout);
  if (v.filtered()) {
    out << "Filtered: " << to_string(v.reason) << '\n';
  } else {
    out << "Pass\n";
  }
  if (!v.detail.empty()) err << v.detail << '\n';
  return v.filtered() ? kExitNotProved : kExitOk;
}

Task build_subgoal_task_checked(const Task& task, const std::string& goal) {
  return build_subgoal_task(task, parse_formula(goal, task));
}

/// Prompt for `task` with its goal optionally replaced.
std::string prompt_for(const std::string& file, const std::optional<std::string>& goal, PromptStrategy s) {
  Task task = load_task(file);
  if (goal) task = build_subgoal_task_checked(task, *goal);
  return render_prompt(s, preprocess_label(task));
}

}  // namespace

// ---------------------------------------------------------------------------

void apply_config_file(const fs::path& path, CliConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigTOML().from_config(in);
  } catch (const std::exception& e) {
    throw ConfigError("malformed config file " + path.string() + ": " + e.what());
  }
  std::map<std::string, SolverConfig> custom;
  std::optional<std::vector<std::string>> portfolio_names;
  std::optional<std::string> filter_name;

  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;
    std::string value = item.inputs.empty() ? "" : item.inputs.front();
    if (looks_secret(item.name)) {
      throw ConfigError("config file " + path.string() + " sets '" + item.name +
                        "'; secrets are read from the environment only");
    }
    const auto& parents = item.parents;
    std::string section = parents.empty() ? "" : parents.front();
    if (section == "engine" && parents.size() == 1) {
      apply_engine_key(cfg.engine, item.name, value);
    } else if (section == "model" && parents.size() == 1) {
      apply_model_key(cfg.model, item.name, value);
    } else if (section == "solvers" && parents.size() == 1) {
      if (item.name == "portfolio") {
        std::vector<std::string> names;
        for (const auto& in_v : item.inputs) {
          for (auto& n : split_list(in_v)) names.push_back(n);
        }
        portfolio_names = names;
      } else if (item.name == "filter") {
        filter_name = value;
      } else {
        throw ConfigError("unknown solvers setting: " + item.name);
      }
    } else if (section == "solvers" && parents.size() == 2) {
      SolverConfig& s = custom[parents[1]];
      s.name = parents[1];
      if (item.name == "executable") s.executable = value;
      else if (item.name == "args") s.args = item.inputs;
      else if (item.name == "stdin") s.use_stdin = to_bool(item.name, value);
      else if (item.name == "dialect") {
        if (value == "smtlib2") s.dialect = Dialect::Smtlib2;
        else if (value == "vampire") s.dialect = Dialect::Smtlib2Vampire;
        else throw ConfigError("unknown dialect: " + value);
      } else {
        throw ConfigError("unknown solver setting: " + item.name);
      }
    } else {
      std::string where = section.empty() ? "top level" : joined(parents);
      throw ConfigError("unexpected key '" + item.name + "' at " + where + " in " + path.string());
    }
  }

  auto lookup = [&](const std::string& name) {
    if (auto it = custom.find(name); it != custom.end()) {
      if (it->second.executable.empty()) throw ConfigError("solver " + name + " has no executable");
      validate_config(it->second);
      return it->second;
    }
    auto p = preset_by_name(name);
    if (!p) throw ConfigError("unknown solver: " + name);
    return *p;
  };
  if (portfolio_names) {
    if (portfolio_names->empty()) throw ConfigError("solver portfolio is empty");
    cfg.portfolio.clear();
    for (const auto& n : *portfolio_names) cfg.portfolio.push_back(lookup(n));
  }
  if (filter_name) cfg.filter_solver = lookup(*filter_name);
}

void apply_environment(CliConfig& cfg) {
  auto env = [](const char* name) -> std::optional<std::string> {
    const char* v = std::getenv(name);
    if (!v || !*v) return std::nullopt;
    return std::string(v);
  };
  if (auto v = env("LEMMALOOP_MODE")) apply_model_key(cfg.model, "mode", *v);
  if (auto v = env("LEMMALOOP_MODEL")) cfg.model.model = *v;
  if (auto v = env("LEMMALOOP_ENDPOINT")) cfg.model.endpoint = *v;
  if (auto v = env("LEMMALOOP_TRANSCRIPTS")) cfg.model.transcripts_dir = *v;
}

json to_json(const EngineConfig& e) {
  json prompts = json::array();
  for (auto p : e.prompt_pool) prompts.push_back(to_string(p));
  return {{"max_depth", e.max_depth},
          {"max_iterations", e.max_iterations},
          {"prompt_pool", prompts},
          {"task_time_limit", e.task_time_limit},
          {"initial_check_timeout", e.initial_check_timeout},
          {"verify_timeout", e.verify_timeout},
          {"filter_timeout", e.filter_timeout},
          {"subgoal_parallelism", e.subgoal_parallelism},
          {"conjecture_cap", e.conjecture_cap},
          {"filter_mode", to_string(e.filter_mode)},
          {"engine_off", e.engine_off},
          {"memoize", e.memoize},
          {"ancestor_check", e.ancestor_check}};
}

json describe(const CliConfig& cfg) {
  const char* key = std::getenv(cfg.model.api_key_env.c_str());
  json model = {{"endpoint", cfg.model.endpoint},
                {"model", cfg.model.model},
                {"temperature", cfg.model.temperature},
                {"top_p", cfg.model.top_p},
                {"max_tokens", cfg.model.max_output_tokens},
                {"mode", to_string(cfg.model.mode)},
                {"transcripts", cfg.model.transcripts_dir.string()},
                {"api_key_env", cfg.model.api_key_env},
                {"api_key", (key && *key) ? "<redacted>" : "<unset>"}};
  json portfolio = json::array();
  for (const auto& s : cfg.portfolio) portfolio.push_back(solver_json(s));
  return {{"engine", to_json(cfg.engine)},
          {"model", model},
          {"solvers", {{"portfolio", portfolio}, {"filter", solver_json(cfg.filter_solver)}}}};
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lemma-guided inductive theorem proving over SMT-LIB2 tasks"};
  app.require_subcommand(1);
  Overrides o;

  std::string file, out_path, conjecture, input, out_dir = "bench-out";
  int parallelism = 1;
  std::optional<std::string> group, goal;

  auto* prove = app.add_subcommand("prove", "Prove one task");
  prove->add_option("file", file, "SMT-LIB2 task")->required();
  prove->add_option("--out", out_path, "Certificate path (default: <stem>.cert.json)");
  add_common(prove, o);

  auto* bench = app.add_subcommand("bench", "Run a directory or task list");
  bench->add_option("input", input, "Directory or task-list file")->required();
  bench->add_option("--out", out_dir, "Report directory");
  bench->add_option("--task-parallelism", parallelism, "Tasks run at once")->check(CLI::PositiveNumber);
  bench->add_option("--group", group, "Group name for every task");
  add_common(bench, o);

  auto* check = app.add_subcommand("check", "Re-verify a proof certificate");
  check->add_option("certificate", file)->required();
  add_common(check, o);

  auto* filter = app.add_subcommand("filter", "Run the conjecture filter on one formula");
  filter->add_option("file", file)->required();
  filter->add_option("conjecture", conjecture, "SMT-LIB2 formula")->required();
  add_common(filter, o);

  std::string strategy_name = "strategy1", response_file, key_arg;
  int iteration = 1;
  std::int64_t prompt_tokens = 0, completion_tokens = 0;
  auto* transcripts = app.add_subcommand("transcripts", "Inspect or author recorded model responses");
  transcripts->require_subcommand(1);
  auto* t_put = transcripts->add_subcommand("put", "Store a response for a task prompt");
  auto* t_key = transcripts->add_subcommand("key", "Print the transcript key for a task prompt");
  for (auto* sub : {t_put, t_key}) {
    sub->add_option("file", file, "SMT-LIB2 task")->required();
    sub->add_option("--goal", goal, "Replace the goal with this formula");
    sub->add_option("--strategy", strategy_name);
    sub->add_option("--iteration", iteration)->check(CLI::PositiveNumber);
    add_common(sub, o);
  }
  t_put->add_option("--response", response_file, "File holding the response text")->required();
  t_put->add_option("--prompt-tokens", prompt_tokens);
  t_put->add_option("--completion-tokens", completion_tokens);
  auto* t_show = transcripts->add_subcommand("show", "Print a stored transcript");
  t_show->add_option("key", key_arg)->required();
  add_common(t_show, o);

  auto* render = app.add_subcommand("render", "Print the labeled task or a rendered prompt");
  render->add_option("file", file)->required();
  render->add_option("--goal", goal, "Replace the goal with this formula");
  std::optional<std::string> render_strategy;
  render->add_option("--strategy", render_strategy, "Print the prompt for this strategy");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    err << "error: " << msg << '\n';
    return e.get_exit_code() == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*prove) return cmd_prove(file, out_path, o, out, err);
    if (*bench) return cmd_bench(input, out_dir, parallelism, group, o, out, err);
    if (*check) return cmd_check(file, o, out, err);
    if (*filter) return cmd_filter(file, conjecture, o, out, err);
    if (*render) {
      Task task = load_task(file);
      if (goal) task = build_subgoal_task_checked(task, *goal);
      if (render_strategy) {
        auto s = strategy_from_string(*render_strategy);
        if (!s) throw ConfigError("unknown prompt strategy: " + *render_strategy);
        out << render_prompt(*s, preprocess_label(task));
      } else {
        out << preprocess_label(task).full_text;
      }
      return kExitOk;
    }
    if (*transcripts) {
      CliConfig cfg = merged(o);
      if (*t_show) {
        if (cfg.model.transcripts_dir.empty()) throw ConfigError("--transcripts is required");
        auto t = TranscriptStore(cfg.model.transcripts_dir).load(key_arg);
        if (!t) {
          err << "error: no transcript " << key_arg << '\n';
          return kExitNotProved;
        }
        out << read_text(TranscriptStore(cfg.model.transcripts_dir).path_for(key_arg));
        return kExitOk;
      }
      auto s = strategy_from_string(strategy_name);
      if (!s) throw ConfigError("unknown prompt strategy: " + strategy_name);
      std::string prompt = prompt_for(file, goal, *s);
      if (*t_key) {
        out << transcript_key(prompt, cfg.model, iteration) << '\n';
        return kExitOk;
      }
      if (cfg.model.transcripts_dir.empty()) throw ConfigError("--transcripts is required");
      LlmResponse r{read_text(response_file), {prompt_tokens, completion_tokens}};
      Transcript t = make_transcript(prompt, cfg.model, iteration, r);
      TranscriptStore(cfg.model.transcripts_dir).save(t);
      out << t.key << '\n';
      return kExitOk;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace lemmaloop
