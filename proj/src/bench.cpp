#include "lemmaloop/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "lemmaloop/certificate.hpp"
#include "lemmaloop/smtlib.hpp"

namespace lemmaloop {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kKnownGroups = {"StandardDT", "StandardDTLIA", "AutoProofBM", "IndBen"};

void count_attempts(const ProofNode& n, int& total) {
  total += static_cast<int>(n.attempts.size());
  for (const auto& c : n.children) {
    if (c) count_attempts(*c, total);
  }
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string utc_timestamp() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_file(const fs::path& p, const std::string& text) {
  fs::path tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, p);
}

json record_json(const TaskRecord& r) {
  return {{"task_path", r.task_path},
          {"group", r.group},
          {"outcome", r.outcome},
          {"root_status", r.root_status},
          {"wall_seconds", r.wall_seconds},
          {"solved_under_360s", r.solved_under_360s},
          {"solved_under_1200s", r.solved_under_1200s},
          {"prompt_tokens", r.tokens.prompt_tokens},
          {"completion_tokens", r.tokens.completion_tokens},
          {"total_tokens", r.tokens.total()},
          {"llm_queries", r.llm_queries},
          {"attempts", r.attempts},
          {"tree_nodes", r.tree_nodes},
          {"tree_depth", r.tree_depth},
          {"certificate_path", r.certificate_path},
          {"error", r.error}};
}

TaskRecord record_from_json(const json& j) {
  TaskRecord r;
  r.task_path = j.at("task_path").get<std::string>();
  r.group = j.at("group").get<std::string>();
  r.outcome = j.at("outcome").get<std::string>();
  r.root_status = j.at("root_status").get<std::string>();
  r.wall_seconds = j.at("wall_seconds").get<double>();
  r.solved_under_360s = j.at("solved_under_360s").get<bool>();
  r.solved_under_1200s = j.at("solved_under_1200s").get<bool>();
  r.tokens.prompt_tokens = j.at("prompt_tokens").get<std::int64_t>();
  r.tokens.completion_tokens = j.at("completion_tokens").get<std::int64_t>();
  r.llm_queries = j.at("llm_queries").get<int>();
  r.attempts = j.at("attempts").get<int>();
  r.tree_nodes = j.at("tree_nodes").get<int>();
  r.tree_depth = j.at("tree_depth").get<int>();
  r.certificate_path = j.at("certificate_path").get<std::string>();
  r.error = j.at("error").get<std::string>();
  return r;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json summary_json(const GroupSummary& g) {
  return {{"group", g.group},
          {"total", g.total},
          {"solved_1200", g.solved_1200},
          {"solved_360", g.solved_360},
          {"avg_time_1200", optional_json(g.avg_time_1200)},
          {"avg_time_360", optional_json(g.avg_time_360)},
          {"tokens", g.tokens}};
}

GroupSummary summary_from_json(const json& j) {
  GroupSummary g;
  g.group = j.at("group").get<std::string>();
  g.total = j.at("total").get<int>();
  g.solved_1200 = j.at("solved_1200").get<int>();
  g.solved_360 = j.at("solved_360").get<int>();
  if (!j.at("avg_time_1200").is_null()) g.avg_time_1200 = j["avg_time_1200"].get<double>();
  if (!j.at("avg_time_360").is_null()) g.avg_time_360 = j["avg_time_360"].get<double>();
  g.tokens = j.at("tokens").get<std::int64_t>();
  return g;
}

bool close_enough(const std::optional<double>& a, const std::optional<double>& b) {
  if (a.has_value() != b.has_value()) return false;
  if (!a) return true;
  return std::fabs(*a - *b) <= 1e-6 * std::max(1.0, std::fabs(*a));
}

std::string safe_name(const std::string& rel) {
  std::string out;
  for (char c : rel) {
    bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
    out += ok ? c : '_';
  }
  return out;
}

}  // namespace

bool solved_under(bool proved, double wall_seconds, double task_limit, double threshold) {
  if (!proved) return false;
  return wall_seconds < threshold || task_limit <= threshold;
}

std::string infer_group(const fs::path& relative_path) {
  for (const auto& part : relative_path.parent_path()) {
    for (const auto& g : kKnownGroups) {
      if (part == g) return g;
    }
  }
  std::string parent = relative_path.parent_path().filename().string();
  if (parent.empty() || parent == "." || parent == "..") return "default";
  return parent;
}

std::vector<GroupSummary> aggregate(const std::vector<TaskRecord>& records) {
  std::map<std::string, std::vector<const TaskRecord*>> by_group;
  for (const auto& r : records) by_group[r.group].push_back(&r);

  std::vector<std::string> order;
  for (const auto& g : kKnownGroups) {
    if (by_group.count(g)) order.push_back(g);
  }
  for (const auto& [g, _] : by_group) {
    if (std::find(kKnownGroups.begin(), kKnownGroups.end(), g) == kKnownGroups.end()) order.push_back(g);
  }

  auto summarize_rows = [](const std::string& name, const std::vector<const TaskRecord*>& rows) {
    GroupSummary s;
    s.group = name;
    double sum1200 = 0.0, sum360 = 0.0;
    for (const auto* r : rows) {
      ++s.total;
      s.tokens += r->tokens.total();
      if (r->solved_under_1200s) {
        ++s.solved_1200;
        sum1200 += r->wall_seconds;
      }
      if (r->solved_under_360s) {
        ++s.solved_360;
        sum360 += r->wall_seconds;
      }
    }
    if (s.solved_1200 > 0) s.avg_time_1200 = sum1200 / s.solved_1200;
    if (s.solved_360 > 0) s.avg_time_360 = sum360 / s.solved_360;
    return s;
  };

  std::vector<GroupSummary> out;
  std::vector<const TaskRecord*> all;
  for (const auto& g : order) {
    out.push_back(summarize_rows(g, by_group[g]));
    all.insert(all.end(), by_group[g].begin(), by_group[g].end());
  }
  out.push_back(summarize_rows("Total", all));
  return out;
}

std::vector<fs::path> collect_tasks(const fs::path& input) {
  std::vector<fs::path> out;
  if (fs::is_directory(input)) {
    for (const auto& e : fs::recursive_directory_iterator(input)) {
      if (e.is_regular_file() && e.path().extension() == ".smt2") out.push_back(e.path());
    }
    std::sort(out.begin(), out.end());
    return out;
  }
  std::ifstream in(input);
  if (!in) throw std::runtime_error("cannot read task list " + input.string());
  fs::path base = input.parent_path();
  std::string line;
  while (std::getline(in, line)) {
    auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    auto e = line.find_last_not_of(" \t\r");
    fs::path p = line.substr(b, e - b + 1);
    out.push_back(p.is_absolute() ? p : base / p);
  }
  return out;
}

std::string report_csv(const RunReport& report) {
  std::ostringstream os;
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  for (const auto& r : report.records) {
    json j = record_json(r);
    for (std::size_t i = 0; i < cols.size(); ++i) {
      const json& v = j[cols[i]];
      std::string cell;
      if (v.is_string()) cell = v.get<std::string>();
      else if (v.is_boolean()) cell = v.get<bool>() ? "true" : "false";
      else if (v.is_number_float()) cell = fixed(v.get<double>(), 3);
      else cell = v.dump();
      os << (i ? "," : "") << csv_escape(cell);
    }
    os << '\n';
  }
  return os.str();
}

json report_json(const RunReport& report) {
  json records = json::array();
  for (const auto& r : report.records) records.push_back(record_json(r));
  json summary = json::array();
  for (const auto& g : report.summary) summary.push_back(summary_json(g));
  return {{"metadata", report.metadata}, {"records", records}, {"summary", summary}};
}

std::string summarize(const RunReport& report) {
  auto rows = report.summary.empty() ? aggregate(report.records) : report.summary;
  std::ostringstream os;
  os << "| Benchmark | Total | <1200s | <360s |\n";
  os << "|---|---|---|---|\n";
  auto avg = [](const std::optional<double>& v) { return v ? fixed(*v, 2) : std::string("N/A"); };
  const GroupSummary* total = nullptr;
  for (const auto& g : rows) {
    if (g.group == "Total") {
      total = &g;
      continue;
    }
    os << "| " << g.group << " | " << g.total << " | " << g.solved_1200 << " | " << g.solved_360 << " |\n";
  }
  if (total) {
    os << "| Total | " << total->total << " | " << total->solved_1200 << " | " << total->solved_360 << " |\n";
    os << "| Avg time (s) | | " << avg(total->avg_time_1200) << " | " << avg(total->avg_time_360) << " |\n";
    os << "| Tokens (M) | " << fixed(static_cast<double>(total->tokens) / 1e6, 2) << " | | |\n";
  }
  return os.str();
}

RunReport load_report(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  json j = json::parse(in);
  RunReport r;
  r.metadata = j.value("metadata", json::object());
  for (const auto& rec : j.at("records")) r.records.push_back(record_from_json(rec));
  for (const auto& s : j.at("summary")) r.summary.push_back(summary_from_json(s));
  auto fresh = aggregate(r.records);
  bool same = fresh.size() == r.summary.size();
  for (std::size_t i = 0; same && i < fresh.size(); ++i) {
    const auto& a = fresh[i];
    const auto& b = r.summary[i];
    same = a.group == b.group && a.total == b.total && a.solved_1200 == b.solved_1200 &&
           a.solved_360 == b.solved_360 && a.tokens == b.tokens && close_enough(a.avg_time_1200, b.avg_time_1200) &&
           close_enough(a.avg_time_360, b.avg_time_360);
  }
  if (!same) throw ReportMismatch("stored summary does not match the records in " + path.string());
  return r;
}

RunReport run_bench(const BenchOptions& options, const BenchEnvironment& env) {
  if (options.task_parallelism < 1) throw std::invalid_argument("task parallelism must be at least 1");
  validate(env.engine);
  auto tasks = collect_tasks(options.input);
  fs::path root = fs::is_directory(options.input) ? options.input : options.input.parent_path();
  fs::create_directories(options.output_dir / "certificates");

  std::vector<TaskRecord> records(tasks.size());
  std::atomic<std::size_t> next{0};
  const double limit = env.engine.task_time_limit;

  auto work = [&] {
    Engine engine(env.engine, env.backend, env.filter, env.llm, env.trace);
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      TaskRecord& rec = records[i];
      fs::path rel = tasks[i].lexically_relative(root);
      if (rel.empty() || *rel.begin() == "..") rel = tasks[i];
      rec.task_path = rel.generic_string();
      rec.group = options.group_override ? *options.group_override
                                         : infer_group(fs::weakly_canonical(fs::absolute(root)).filename() / rel);
      auto start = std::chrono::steady_clock::now();
      try {
        Task task = parse_file(tasks[i].string());
        ProofOutcome out = engine.prove_task(task);
        rec.wall_seconds = out.wall_time;
        rec.root_status = out.root ? to_string(out.root->status) : "";
        rec.tokens = out.tokens;
        rec.llm_queries = out.llm_queries;
        if (out.root) {
          TreeShape shape = tree_shape(*out.root);
          rec.tree_nodes = shape.nodes;
          rec.tree_depth = shape.max_depth;
          count_attempts(*out.root, rec.attempts);
        }
        if (out.proved) {
          rec.outcome = "Proved";
          rec.certificate_path = "certificates/" + safe_name(rec.task_path) + ".cert.json";
          write_file(options.output_dir / rec.certificate_path, emit_certificate(out));
        } else if (out.root && out.root->status == NodeStatus::BudgetExhausted) {
          rec.outcome = "BudgetExhausted";
        } else {
          rec.outcome = "NotProved";
        }
        rec.solved_under_360s = solved_under(out.proved, rec.wall_seconds, limit, 360.0);
        rec.solved_under_1200s = solved_under(out.proved, rec.wall_seconds, limit, 1200.0);
      } catch (const ReplayMiss& e) {
        std::cerr << "error: " << rec.task_path << ": " << e.what() << '\n';
        rec.outcome = "Error";
        rec.error = std::string("replay miss: ") + e.what();
      } catch (const PortfolioDisagreement& e) {
        std::cerr << "error: " << rec.task_path << ": " << e.what() << '\n';
        rec.outcome = "Error";
        rec.error = std::string("solver disagreement: ") + e.what();
      } catch (const std::exception& e) {
        rec.outcome = "Error";
        rec.error = e.what();
      }
      if (rec.outcome == "Error") {
        rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      }
    }
  };

  int workers = std::min<int>(options.task_parallelism, std::max<std::size_t>(1, tasks.size()));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  RunReport report;
  report.records = std::move(records);
  report.summary = aggregate(report.records);
  report.metadata = options.metadata;
  report.metadata["timestamp"] = utc_timestamp();
  report.metadata["task_parallelism"] = options.task_parallelism;
  report.metadata["timing_reliable"] = options.task_parallelism == 1;
  report.metadata["input"] = options.input.string();

  write_file(options.output_dir / "report.json", report_json(report).dump(2) + "\n");
  write_file(options.output_dir / "report.csv", report_csv(report));
  write_file(options.output_dir / "summary.txt", summarize(report));
  return report;
}

}  // namespace lemmaloop
