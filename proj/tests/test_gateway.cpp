#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <set>
#include <thread>

#include <httplib.h>

#include "golden.hpp"
#include "paran/error.hpp"
#include "paran/llm_gateway.hpp"

using namespace paran;
using namespace paran::llm;

namespace {

ChatRequest fixture_request() {
  ChatRequest r;
  r.model = ModelId::parse("mock:fixture-model");
  r.system = "You are terse.";
  r.user = "Say hello.";
  r.params.temperature = 0.4;
  r.params.max_tokens = 64;
  r.params.seed = 7;
  return r;
}

RetryPolicy fast_retry(int attempts = 3) {
  RetryPolicy p;
  p.max_attempts = attempts;
  p.initial_backoff = std::chrono::milliseconds(1);
  return p;
}

// Counts calls and replies from a script of (failure?, text).
class ScriptedProvider : public ChatProvider {
 public:
  explicit ScriptedProvider(std::vector<std::optional<Failure>> script) : script_(std::move(script)) {}
  std::string complete(const ChatRequest& req) override {
    std::size_t i = calls_++;
    if (i < script_.size() && script_[i]) throw ProviderError(*script_[i], "scripted");
    return "reply to " + req.user;
  }
  std::size_t calls() const { return calls_; }

 private:
  std::vector<std::optional<Failure>> script_;
  std::atomic<std::size_t> calls_{0};
};

// Tracks the peak number of overlapping calls.
class SlowProvider : public ChatProvider {
 public:
  std::string complete(const ChatRequest& req) override {
    int now = ++active_;
    int seen = peak_.load();
    while (now > seen && !peak_.compare_exchange_weak(seen, now)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(15));
    --active_;
    return req.user;
  }
  int peak() const { return peak_; }

 private:
  std::atomic<int> active_{0};
  std::atomic<int> peak_{0};
};

}  // namespace

TEST(ModelId, ParseAndAliases) {
  auto m = ModelId::parse("openai:gpt-4o-mini");
  EXPECT_EQ(m.provider, Provider::openai_compatible);
  EXPECT_EQ(m.str(), "openai-compatible:gpt-4o-mini");
  EXPECT_EQ(ModelId::parse("bedrock:meta.llama3:70b").model_name, "meta.llama3:70b");
  EXPECT_THROW(ModelId::parse("nope:x"), ValidationError);
  EXPECT_THROW(ModelId::parse("mock:"), ValidationError);
  EXPECT_THROW(ModelId::parse("mock"), ValidationError);
}

TEST(Params, TemperatureRangeCheckedBeforeProviderCall) {
  auto backend = std::make_shared<ScriptedProvider>(std::vector<std::optional<Failure>>{});
  Gateway gw(GatewayOptions{std::nullopt, fast_retry(), 4});
  gw.set_provider(Provider::mock, backend);
  auto req = fixture_request();
  req.params.temperature = 1.5;
  EXPECT_THROW(gw.complete(req), ValidationError);
  req.params.temperature = -0.1;
  EXPECT_THROW(gw.complete(req), ValidationError);
  req.params.temperature = 1.0;
  req.user = "";
  EXPECT_THROW(gw.complete(req), ValidationError);
  EXPECT_EQ(backend->calls(), 0u);
}

TEST(CacheKey, StableAndDiscriminating) {
  auto a = fixture_request();
  auto b = a;
  EXPECT_EQ(cache_key(a), cache_key(b));
  b.user = "Say hellO.";
  EXPECT_NE(cache_key(a), cache_key(b));
  b = a;
  b.params.temperature = 0.6;
  EXPECT_NE(cache_key(a), cache_key(b));
  b = a;
  b.params.seed.reset();
  EXPECT_NE(cache_key(a), cache_key(b));
  EXPECT_EQ(cache_key(a).size(), 64u);
}

TEST(CacheKey, PinnedFixtureDigest) {
  auto req = fixture_request();
  expect_golden("cache_key_fixture.txt", canonical_request(req) + "\n" + cache_key(req) + "\n");
}

TEST(CacheKey, NoCollisionsOnThousandRequests) {
  std::set<std::string> keys;
  for (int i = 0; i < 1000; ++i) {
    auto r = fixture_request();
    r.user = "request " + std::to_string(i / 10);
    r.params.temperature = (i % 10) / 10.0;
    keys.insert(cache_key(r));
  }
  EXPECT_EQ(keys.size(), 1000u);
}

TEST(Mock, DeterministicAcrossCalls) {
  auto req = fixture_request();
  EXPECT_EQ(mock_complete(req).text, mock_complete(req).text);
  Gateway gw;
  EXPECT_EQ(gw.complete(req).text, mock_complete(req).text);
}

TEST(Gateway, CacheHitReturnsStoredText) {
  auto dir = fresh_dir("gw_cache");
  auto backend = std::make_shared<ScriptedProvider>(std::vector<std::optional<Failure>>{});
  Gateway gw(GatewayOptions{dir, fast_retry(), 4});
  gw.set_provider(Provider::mock, backend);
  auto req = fixture_request();
  auto first = gw.complete(req);
  EXPECT_FALSE(first.cached);
  auto second = gw.complete(req);
  EXPECT_TRUE(second.cached);
  EXPECT_EQ(second.text, first.text);
  EXPECT_EQ(backend->calls(), 1u);
  auto other = req;
  other.params.temperature = 0.8;
  gw.complete(other);
  EXPECT_EQ(backend->calls(), 2u);
  EXPECT_TRUE(std::filesystem::exists(gw.cache()->path_for(cache_key(req))));
  EXPECT_TRUE(std::filesystem::exists(gw.cache()->path_for(cache_key(other))));
  gw.complete(req, CacheMode::bypass);
  EXPECT_EQ(backend->calls(), 3u);
  auto st = gw.stats();
  EXPECT_EQ(st.cache_hits, 1u);
  EXPECT_EQ(st.requests, 4u);

  // A second gateway on the same directory replays without calling out.
  auto backend2 = std::make_shared<ScriptedProvider>(std::vector<std::optional<Failure>>{});
  Gateway gw2(GatewayOptions{dir, fast_retry(), 4});
  gw2.set_provider(Provider::mock, backend2);
  EXPECT_EQ(gw2.complete(req).text, first.text);
  EXPECT_EQ(backend2->calls(), 0u);
}

TEST(Gateway, RetriesTransientThenSucceeds) {
  auto backend = std::make_shared<ScriptedProvider>(
      std::vector<std::optional<Failure>>{Failure::transient, Failure::transient});
  Gateway gw(GatewayOptions{std::nullopt, fast_retry(3), 4});
  gw.set_provider(Provider::mock, backend);
  EXPECT_EQ(gw.complete(fixture_request()).text, "reply to Say hello.");
  EXPECT_EQ(backend->calls(), 3u);
  EXPECT_EQ(gw.stats().retries, 2u);
}

TEST(Gateway, FailureKindsAreDistinct) {
  auto expect_failure = [](std::vector<std::optional<Failure>> script, Failure want,
                           std::size_t calls) {
    auto backend = std::make_shared<ScriptedProvider>(script);
    Gateway gw(GatewayOptions{std::nullopt, fast_retry(3), 4});
    gw.set_provider(Provider::mock, backend);
    try {
      gw.complete(fixture_request());
      ADD_FAILURE() << "expected failure";
    } catch (const ProviderError& e) {
      EXPECT_EQ(e.failure(), want) << e.what();
      EXPECT_EQ(e.exit_code(), 3);
    }
    EXPECT_EQ(backend->calls(), calls);
  };
  expect_failure({Failure::auth}, Failure::auth, 1);
  expect_failure({Failure::content}, Failure::content, 1);
  expect_failure({Failure::transient, Failure::transient, Failure::transient}, Failure::exhausted, 3);
}

TEST(Gateway, InFlightBoundHolds) {
  auto backend = std::make_shared<SlowProvider>();
  Gateway gw(GatewayOptions{std::nullopt, fast_retry(), 2});
  gw.set_provider(Provider::mock, backend);
  std::vector<std::jthread> threads;
  for (int i = 0; i < 8; ++i)
    threads.emplace_back([&, i] {
      auto r = fixture_request();
      r.user = "u" + std::to_string(i);
      gw.complete(r);
    });
  threads.clear();
  EXPECT_LE(backend->peak(), 2);
  EXPECT_GE(backend->peak(), 1);
}

TEST(HttpClassify, StatusMapping) {
  EXPECT_EQ(classify_http_failure(401, "").failure(), Failure::auth);
  EXPECT_EQ(classify_http_failure(403, "").failure(), Failure::auth);
  EXPECT_EQ(classify_http_failure(429, "").failure(), Failure::transient);
  EXPECT_EQ(classify_http_failure(503, "").failure(), Failure::transient);
  EXPECT_EQ(classify_http_failure(-1, "").failure(), Failure::transient);
  EXPECT_EQ(classify_http_failure(400, "bad").failure(), Failure::content);
}

class LocalServer : public ::testing::Test {
 protected:
  void SetUp() override {
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  void TearDown() override {
    server_.stop();
    thread_.join();
  }
  std::string base() const { return "http://127.0.0.1:" + std::to_string(port_); }

  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

TEST_F(LocalServer, OpenAiCompatibleRoundTripAndRetry) {
  std::atomic<int> hits{0};
  server_.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    if (++hits == 1) {
      res.status = 503;
      return;
    }
    auto body = nlohmann::json::parse(req.body);
    EXPECT_EQ(req.get_header_value("Authorization"), "Bearer k");
    EXPECT_EQ(body.at("model"), "m");
    EXPECT_DOUBLE_EQ(body.at("temperature").get<double>(), 0.4);
    res.set_content(R"({"choices":[{"message":{"content":"hi there"},"finish_reason":"stop"}]})",
                    "application/json");
  });
  Gateway gw(GatewayOptions{std::nullopt, fast_retry(3), 4});
  gw.set_provider(Provider::openai_compatible, std::make_shared<OpenAiCompatibleProvider>(
                                                   HttpEndpoint{base() + "/v1", "k"}));
  auto req = fixture_request();
  req.model = ModelId::parse("openai:m");
  EXPECT_EQ(gw.complete(req).text, "hi there");
  EXPECT_EQ(hits.load(), 2);
}

TEST_F(LocalServer, AuthAndContentErrors) {
  server_.Post("/v1/messages", [](const httplib::Request&, httplib::Response& res) {
    res.status = 401;
  });
  server_.Post("/v1/chat/completions", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"choices":[{"message":{"content":""},"finish_reason":"content_filter"}]})",
                    "application/json");
  });
  Gateway gw(GatewayOptions{std::nullopt, fast_retry(3), 4});
  gw.set_provider(Provider::anthropic_compatible,
                  std::make_shared<AnthropicCompatibleProvider>(HttpEndpoint{base(), "k"}));
  gw.set_provider(Provider::openai_compatible, std::make_shared<OpenAiCompatibleProvider>(
                                                   HttpEndpoint{base() + "/v1", "k"}));
  auto req = fixture_request();
  req.model = ModelId::parse("anthropic:claude");
  try {
    gw.complete(req);
    FAIL();
  } catch (const ProviderError& e) {
    EXPECT_EQ(e.failure(), Failure::auth);
  }
  req.model = ModelId::parse("openai:m");
  try {
    gw.complete(req);
    FAIL();
  } catch (const ProviderError& e) {
    EXPECT_EQ(e.failure(), Failure::content);
  }
}

TEST_F(LocalServer, BedrockConverseShape) {
  server_.Post(R"(/model/(.+)/converse)", [](const httplib::Request& req, httplib::Response& res) {
    EXPECT_EQ(req.matches[1], "meta.llama3-1-8b-instruct-v1:0");
    EXPECT_NE(req.target.find("meta.llama3-1-8b-instruct-v1%3A0"), std::string::npos);
    auto body = nlohmann::json::parse(req.body);
    EXPECT_EQ(body.at("inferenceConfig").at("maxTokens"), 64);
    res.set_content(R"({"output":{"message":{"content":[{"text":"ok"}]}},"stopReason":"end_turn"})",
                    "application/json");
  });
  Gateway gw(GatewayOptions{std::nullopt, fast_retry(1), 4});
  gw.set_provider(Provider::bedrock_compatible,
                  std::make_shared<BedrockCompatibleProvider>(HttpEndpoint{base(), "k"}));
  auto req = fixture_request();
  req.model = ModelId::parse("bedrock:meta.llama3-1-8b-instruct-v1:0");
  EXPECT_EQ(gw.complete(req).text, "ok");
}

TEST(Providers, MissingCredentialsIsAuthFailure) {
  ::unsetenv("OPENAI_API_KEY");
  Gateway gw(GatewayOptions{std::nullopt, fast_retry(1), 4});
  auto req = fixture_request();
  req.model = ModelId::parse("openai:m");
  try {
    gw.complete(req);
    FAIL();
  } catch (const ProviderError& e) {
    EXPECT_EQ(e.failure(), Failure::auth);
  }
}
