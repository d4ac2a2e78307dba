#include "lemmaloop/llm.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace lemmaloop {

using nlohmann::json;
namespace fs = std::filesystem;

std::string to_string(PromptStrategy s) {
  switch (s) {
    case PromptStrategy::Strategy1: return "strategy1";
    case PromptStrategy::Strategy2: return "strategy2";
    case PromptStrategy::Naive: return "naive";
  }
  return "naive";
}

std::optional<PromptStrategy> strategy_from_string(std::string_view s) {
  for (auto p : {PromptStrategy::Strategy1, PromptStrategy::Strategy2, PromptStrategy::Naive}) {
    if (to_string(p) == s) return p;
  }
  return std::nullopt;
}

std::string render_prompt(PromptStrategy s, const LabeledScript& labeled) {
  std::string text(prompt_template(s));
  auto pos = text.find(kInputPlaceholder);
  text.replace(pos, kInputPlaceholder.size(), labeled.full_text);
  return text;
}

std::string to_string(LlmMode m) {
  switch (m) {
    case LlmMode::Live: return "live";
    case LlmMode::Record: return "record";
    case LlmMode::Replay: return "replay";
  }
  return "live";
}

std::optional<LlmMode> mode_from_string(std::string_view s) {
  for (auto m : {LlmMode::Live, LlmMode::Record, LlmMode::Replay}) {
    if (to_string(m) == s) return m;
  }
  return std::nullopt;
}

void validate(const ModelConfig& cfg) {
  if (!(cfg.temperature >= 0.0 && cfg.temperature <= 2.0)) {
    throw std::invalid_argument("temperature must be in [0, 2]");
  }
  if (!(cfg.top_p > 0.0 && cfg.top_p <= 1.0)) throw std::invalid_argument("top_p must be in (0, 1]");
  if (cfg.max_output_tokens <= 0) throw std::invalid_argument("max output tokens must be positive");
  if (cfg.model.empty()) throw std::invalid_argument("model name is empty");
  if (cfg.mode != LlmMode::Live && cfg.transcripts_dir.empty()) {
    throw std::invalid_argument(to_string(cfg.mode) + " mode needs a transcripts directory");
  }
}

ReplayMiss::ReplayMiss(const std::string& key, const std::string& detail)
    : std::runtime_error("no recorded transcript for key " + key + " (" + detail + ")"), key_(key) {}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

std::string transcript_key(std::string_view prompt, const ModelConfig& cfg, int iteration) {
  json j = {{"prompt", std::string(prompt)},
            {"model", cfg.model},
            {"temperature", cfg.temperature},
            {"top_p", cfg.top_p},
            {"iteration", iteration}};
  return sha256_hex(j.dump());
}

Transcript make_transcript(std::string_view prompt, const ModelConfig& cfg, int iteration, const LlmResponse& r) {
  Transcript t;
  t.key = transcript_key(prompt, cfg, iteration);
  t.prompt_hash = sha256_hex(prompt);
  t.model = cfg.model;
  t.temperature = cfg.temperature;
  t.top_p = cfg.top_p;
  t.iteration = iteration;
  t.response = r.text;
  t.usage = r.usage;
  return t;
}

std::optional<Transcript> TranscriptStore::load(const std::string& key) const {
  std::ifstream in(path_for(key), std::ios::binary);
  if (!in) return std::nullopt;
  json j;
  try {
    j = json::parse(in);
    Transcript t;
    t.key = j.at("key").get<std::string>();
    t.prompt_hash = j.at("prompt_hash").get<std::string>();
    t.model = j.at("model").get<std::string>();
    const json& p = j.at("params");
    t.temperature = p.at("temperature").get<double>();
    t.top_p = p.at("top_p").get<double>();
    t.iteration = p.at("iteration").get<int>();
    t.response = j.at("response").get<std::string>();
    t.usage.prompt_tokens = j.at("usage").at("prompt_tokens").get<std::int64_t>();
    t.usage.completion_tokens = j.at("usage").at("completion_tokens").get<std::int64_t>();
    if (t.key != key) throw std::runtime_error("key field does not match file name");
    return t;
  } catch (const std::exception& e) {
    throw std::runtime_error("malformed transcript " + path_for(key).string() + ": " + e.what());
  }
}

void TranscriptStore::save(const Transcript& t) {
  json j = {{"key", t.key},
            {"prompt_hash", t.prompt_hash},
            {"model", t.model},
            {"params", {{"temperature", t.temperature}, {"top_p", t.top_p}, {"iteration", t.iteration}}},
            {"response", t.response},
            {"usage", {{"prompt_tokens", t.usage.prompt_tokens}, {"completion_tokens", t.usage.completion_tokens}}}};
  std::lock_guard lock(write_mu_);
  fs::create_directories(dir_);
  fs::path final_path = path_for(t.key);
  fs::path tmp = final_path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, final_path);
}

// ---------------------------------------------------------------------------

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw std::invalid_argument("endpoint is not a URL: " + url);
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

bool transient_status(int status) { return status == 408 || status == 409 || status == 429 || status >= 500; }

}  // namespace

LiveModel::LiveModel(ModelConfig cfg) : cfg_(std::move(cfg)) {
  const char* key = std::getenv(cfg_.api_key_env.c_str());
  if (!key || !*key) throw ProviderError("environment variable " + cfg_.api_key_env + " is not set");
  api_key_ = key;
}

void LiveModel::pace() {
  if (cfg_.requests_per_minute <= 0) return;
  auto interval = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
      std::chrono::duration<double>(60.0 / cfg_.requests_per_minute));
  std::chrono::steady_clock::time_point slot;
  {
    std::lock_guard lock(pace_mu_);
    auto now = std::chrono::steady_clock::now();
    slot = std::max(now, next_slot_);
    next_slot_ = slot + interval;
  }
  std::this_thread::sleep_until(slot);
}

LlmResponse LiveModel::query(const std::string& prompt, int /*iteration*/) {
  Endpoint ep = split_url(cfg_.endpoint);
  json body = {{"model", cfg_.model},
               {"messages", json::array({{{"role", "user"}, {"content", prompt}}})},
               {"temperature", cfg_.temperature},
               {"top_p", cfg_.top_p},
               {"max_tokens", cfg_.max_output_tokens}};
  const std::string payload = body.dump();
  httplib::Headers headers = {{"Authorization", "Bearer " + api_key_}};

  std::string last_error;
  for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(
          std::chrono::duration<double>(cfg_.retry_backoff_seconds * std::pow(2.0, attempt - 1)));
    }
    pace();
    httplib::Client client(ep.origin);
    auto secs = static_cast<time_t>(cfg_.request_timeout_seconds);
    client.set_connection_timeout(30, 0);
    client.set_read_timeout(secs, 0);
    client.set_write_timeout(60, 0);
    auto res = client.Post(ep.path, headers, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 300);
      if (transient_status(res->status)) continue;
      throw ProviderError(last_error);
    }
    try {
      json j = json::parse(res->body);
      LlmResponse out;
      out.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
      if (j.contains("usage") && j["usage"].is_object()) {
        out.usage.prompt_tokens = j["usage"].value("prompt_tokens", std::int64_t{0});
        out.usage.completion_tokens = j["usage"].value("completion_tokens", std::int64_t{0});
      }
      return out;
    } catch (const std::exception& e) {
      throw ProviderError(std::string("unexpected response shape: ") + e.what());
    }
  }
  throw ProviderError("giving up after " + std::to_string(cfg_.max_retries + 1) + " attempts; " + last_error);
}

ReplayModel::ReplayModel(ModelConfig cfg) : cfg_(std::move(cfg)), store_(cfg_.transcripts_dir) {}

LlmResponse ReplayModel::query(const std::string& prompt, int iteration) {
  std::string key = transcript_key(prompt, cfg_, iteration);
  auto t = store_.load(key);
  if (!t) {
    throw ReplayMiss(key, "model " + cfg_.model + ", iteration " + std::to_string(iteration) + ", prompt sha256 " +
                              sha256_hex(prompt) + ", store " + store_.dir().string());
  }
  return {t->response, t->usage};
}

RecordModel::RecordModel(ModelConfig cfg) : live_(cfg), store_(cfg.transcripts_dir) {}

LlmResponse RecordModel::query(const std::string& prompt, int iteration) {
  LlmResponse r = live_.query(prompt, iteration);
  store_.save(make_transcript(prompt, live_.config(), iteration, r));
  return r;
}

std::unique_ptr<LanguageModel> make_model(const ModelConfig& cfg) {
  validate(cfg);
  switch (cfg.mode) {
    case LlmMode::Live: return std::make_unique<LiveModel>(cfg);
    case LlmMode::Record: return std::make_unique<RecordModel>(cfg);
    case LlmMode::Replay: return std::make_unique<ReplayModel>(cfg);
  }
  return nullptr;
}

}  // namespace lemmaloop
