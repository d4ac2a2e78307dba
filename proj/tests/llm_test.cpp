#include <gtest/gtest.h>

#include <httplib.h>

#include <json.hpp>

#include "lemmaloop/llm.hpp"
#include "support.hpp"

namespace lemmaloop {
namespace {

using namespace testing;
using nlohmann::json;

std::size_t count(std::string_view hay, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string_view::npos; pos = hay.find(needle, pos + 1)) ++n;
  return n;
}

TEST(PromptTest, EachTemplateHasOnePlaceholder) {
  for (auto s : {PromptStrategy::Strategy1, PromptStrategy::Strategy2, PromptStrategy::Naive}) {
    SCOPED_TRACE(to_string(s));
    EXPECT_EQ(count(prompt_template(s), kInputPlaceholder), 1u);
    EXPECT_EQ(strategy_from_string(to_string(s)), s);
  }
  EXPECT_FALSE(strategy_from_string("strategy3"));
}

TEST(PromptTest, RenderSubstitutesTheLabeledTaskVerbatim) {
  LabeledScript l = preprocess_label(running_example());
  for (auto s : {PromptStrategy::Strategy1, PromptStrategy::Strategy2}) {
    std::string p = render_prompt(s, l);
    std::string_view tmpl = prompt_template(s);
    auto at = tmpl.find(kInputPlaceholder);
    EXPECT_EQ(count(p, kInputPlaceholder), 0u);
    EXPECT_EQ(p.substr(0, at), tmpl.substr(0, at));
    EXPECT_EQ(p.substr(at, l.full_text.size()), l.full_text);
    EXPECT_EQ(p.substr(at + l.full_text.size()), tmpl.substr(at + kInputPlaceholder.size()));
    EXPECT_EQ(goal_of_prompt(p), "(assert (forall ((x Nat) (y Nat)) (= (mult x y) (mult y x))))");
  }
  EXPECT_NE(render_prompt(PromptStrategy::Strategy1, l), render_prompt(PromptStrategy::Strategy2, l));
}

// Expected digests come from Python's hashlib, with keys hashed over
// json.dumps(params, sort_keys=True, separators=(',', ':')).
TEST(HashTest, Sha256MatchesReference) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(HashTest, TranscriptKeyMatchesReference) {
  ModelConfig cfg;
  EXPECT_EQ(transcript_key("prove x", cfg, 1), "460e2045e0ee418ad7214c255b67ede7efd793993b1c22765826c98f99a1a60e");
  EXPECT_EQ(transcript_key("prove x", cfg, 2), "4ece6a45214016b8452ecce8eb1d5227d99b507b37c079901a21ba0b6a6b1274");
  ModelConfig other;
  other.model = "m";
  other.temperature = 0.5;
  other.top_p = 1.0;
  EXPECT_EQ(transcript_key("line1\nline \"2\"", other, 3),
            "9d95f560028f1657ea15ea62e3f99cd492804c8a90525b4f249f836c5c30ebb6");
}

TEST(ModelConfigTest, ValidatesSamplingParameters) {
  ModelConfig cfg;
  EXPECT_NO_THROW(validate(cfg));
  cfg.temperature = -0.1;
  EXPECT_THROW(validate(cfg), std::invalid_argument);
  cfg = {};
  cfg.top_p = 1.5;
  EXPECT_THROW(validate(cfg), std::invalid_argument);
  EXPECT_EQ(mode_from_string("replay"), LlmMode::Replay);
  EXPECT_FALSE(mode_from_string("offline"));
}

TEST(TranscriptStoreTest, SaveLoadRoundTrip) {
  TempDir dir;
  TranscriptStore store(dir / "t");
  ModelConfig cfg;
  Transcript t = make_transcript("p", cfg, 2, {"```smt2\n(assert true)\n```", {1200, 17}});
  store.save(t);
  auto back = store.load(t.key);
  ASSERT_TRUE(back);
  EXPECT_EQ(back->response, t.response);
  EXPECT_EQ(back->usage, (TokenUsage{1200, 17}));
  EXPECT_EQ(back->iteration, 2);
  EXPECT_EQ(back->prompt_hash, sha256_hex("p"));
  EXPECT_FALSE(store.load("0000"));
}

TEST(ReplayModelTest, ServesStoredResponsesAndMissesLoudly) {
  TempDir dir;
  ModelConfig cfg;
  cfg.mode = LlmMode::Replay;
  cfg.transcripts_dir = dir.path();
  TranscriptStore(dir.path()).save(make_transcript("hello", cfg, 1, {"world", {3, 1}}));
  auto model = make_model(cfg);
  LlmResponse r = model->query("hello", 1);
  EXPECT_EQ(r.text, "world");
  EXPECT_EQ(r.usage, (TokenUsage{3, 1}));
  try {
    model->query("hello", 2);
    FAIL() << "expected ReplayMiss";
  } catch (const ReplayMiss& e) {
    EXPECT_EQ(e.key(), transcript_key("hello", cfg, 2));
  }
}

TEST(ReplayModelTest, CheckedInRunningExampleTranscriptsResolve) {
  ModelConfig cfg;
  cfg.mode = LlmMode::Replay;
  cfg.transcripts_dir = fixture("transcripts/running-example");
  auto model = make_model(cfg);
  std::string prompt = render_prompt(PromptStrategy::Strategy1, preprocess_label(running_example()));
  LlmResponse r = model->query(prompt, 1);
  auto ex = extract_conjectures(r.text, running_example());
  ASSERT_EQ(ex.conjectures.size(), 1u);
  EXPECT_TRUE(alpha_equivalent(ex.conjectures[0].formula, parse_formula(kL1, running_example())));
}

// Local chat-completions endpoint: fails `failures` times with `fail_status`, then answers.
class FakeEndpoint {
 public:
  FakeEndpoint(int failures, int fail_status) : failures_(failures), fail_status_(fail_status) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      ++hits;
      auth = req.get_header_value("Authorization");
      body = json::parse(req.body);
      if (hits <= failures_) {
        res.status = fail_status_;
        res.set_content("{\"error\":\"busy\"}", "application/json");
        return;
      }
      json out = {{"choices", json::array({{{"message", {{"role", "assistant"}, {"content", "(assert true)"}}}}})},
                  {"usage", {{"prompt_tokens", 11}, {"completion_tokens", 4}}}};
      res.set_content(out.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeEndpoint() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions"; }

  std::atomic<int> hits{0};
  std::string auth;
  json body;

 private:
  int failures_;
  int fail_status_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

ModelConfig local_config(const std::string& url) {
  ModelConfig cfg;
  cfg.endpoint = url;
  cfg.api_key_env = "LEMMALOOP_TEST_API_KEY";
  cfg.requests_per_minute = 0;
  cfg.retry_backoff_seconds = 0.01;
  cfg.request_timeout_seconds = 5;
  ::setenv("LEMMALOOP_TEST_API_KEY", "sk-test", 1);
  return cfg;
}

TEST(LiveModelTest, SendsSamplingParametersAndBearerKey) {
  FakeEndpoint ep(0, 500);
  ModelConfig cfg = local_config(ep.url());
  LiveModel m(cfg);
  LlmResponse r = m.query("prove it", 1);
  EXPECT_EQ(r.text, "(assert true)");
  EXPECT_EQ(r.usage, (TokenUsage{11, 4}));
  EXPECT_EQ(ep.auth, "Bearer sk-test");
  EXPECT_EQ(ep.body["model"], cfg.model);
  EXPECT_DOUBLE_EQ(ep.body["temperature"].get<double>(), 0.9);
  EXPECT_DOUBLE_EQ(ep.body["top_p"].get<double>(), 0.9);
  EXPECT_EQ(ep.body["messages"][0]["content"], "prove it");
}

TEST(LiveModelTest, RetriesTransientFailures) {
  for (int status : {429, 503}) {
    FakeEndpoint ep(2, status);
    LiveModel m(local_config(ep.url()));
    EXPECT_EQ(m.query("p", 1).text, "(assert true)");
    EXPECT_EQ(ep.hits, 3);
  }
  FakeEndpoint always(10, 429);
  ModelConfig cfg = local_config(always.url());
  cfg.max_retries = 2;
  LiveModel m(cfg);
  EXPECT_THROW(m.query("p", 1), ProviderError);
  EXPECT_EQ(always.hits, 3);
}

TEST(LiveModelTest, ClientErrorsAreNotRetried) {
  FakeEndpoint ep(1, 401);
  LiveModel m(local_config(ep.url()));
  EXPECT_THROW(m.query("p", 1), ProviderError);
  EXPECT_EQ(ep.hits, 1);
}

TEST(LiveModelTest, MissingKeyIsAProviderError) {
  ModelConfig cfg;
  cfg.api_key_env = "LEMMALOOP_TEST_UNSET_KEY";
  ::unsetenv("LEMMALOOP_TEST_UNSET_KEY");
  EXPECT_THROW(LiveModel{cfg}, ProviderError);
}

TEST(RecordModelTest, RecordThenReplayWithoutTheEndpoint) {
  TempDir dir;
  ModelConfig cfg;
  {
    FakeEndpoint ep(0, 500);
    cfg = local_config(ep.url());
    cfg.mode = LlmMode::Record;
    cfg.transcripts_dir = dir.path();
    auto rec = make_model(cfg);
    EXPECT_EQ(rec->query("prove it", 2).text, "(assert true)");
    EXPECT_EQ(ep.hits, 1);
  }
  cfg.mode = LlmMode::Replay;
  cfg.endpoint = "http://127.0.0.1:9/unreachable";
  auto rep = make_model(cfg);
  LlmResponse r = rep->query("prove it", 2);
  EXPECT_EQ(r.text, "(assert true)");
  EXPECT_EQ(r.usage, (TokenUsage{11, 4}));
  EXPECT_TRUE(std::filesystem::exists(TranscriptStore(dir.path()).path_for(transcript_key("prove it", cfg, 2))));
}

}  // namespace
}  // namespace lemmaloop
