#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <shared_mutex>
#include <string>

#include <nlohmann/json.hpp>

#include "paran/error.hpp"

// Chat-completion gateway over several provider protocols, with an on-disk
// response cache, bounded concurrency and retry with backoff.
namespace paran::llm {

enum class Provider { openai_compatible, anthropic_compatible, bedrock_compatible, mock };

std::string to_string(Provider p);
// Accepts the canonical names plus the short forms "openai", "anthropic", "bedrock".
Provider provider_from_string(std::string_view s);

struct ModelId {
  Provider provider = Provider::mock;
  std::string model_name;

  // "<provider>:<name>"; the name may itself contain colons.
  static ModelId parse(std::string_view spec);
  std::string str() const;

  friend bool operator==(const ModelId&, const ModelId&) = default;
  friend auto operator<=>(const ModelId&, const ModelId&) = default;
};

struct DecodingParams {
  double temperature = 0.0;
  int max_tokens = 512;
  std::optional<std::int64_t> seed;

  void validate() const;  // throws ValidationError
  friend bool operator==(const DecodingParams&, const DecodingParams&) = default;
};

struct ChatRequest {
  ModelId model;
  std::string system;
  std::string user;
  DecodingParams params;

  void validate() const;
};

struct ChatResponse {
  std::string text;
  ModelId model;
  DecodingParams params;
  bool cached = false;
  std::int64_t latency_ms = 0;
};

nlohmann::json to_json(const ModelId& m);
nlohmann::json to_json(const DecodingParams& p);
nlohmann::json to_json(const ChatRequest& r);
DecodingParams params_from_json(const nlohmann::json& j);
ChatRequest request_from_json(const nlohmann::json& j);

// Sorted-key JSON over (provider, model_name, system, user, temperature,
// max_tokens, seed). Stable across processes and platforms.
std::string canonical_request(const ChatRequest& req);
// SHA-256 of canonical_request, lowercase hex.
std::string cache_key(const ChatRequest& req);

enum class Failure { auth, transient, content, exhausted, config };

std::string to_string(Failure f);

class ProviderError : public Error {
 public:
  ProviderError(Failure failure, const std::string& what)
      : Error(ErrorKind::provider, to_string(failure) + ": " + what), failure_(failure) {}
  Failure failure() const noexcept { return failure_; }
  bool retryable() const noexcept { return failure_ == Failure::transient; }

 private:
  Failure failure_;
};

// A provider maps one request to the completion text or throws ProviderError.
class ChatProvider {
 public:
  virtual ~ChatProvider() = default;
  virtual std::string complete(const ChatRequest& req) = 0;
};

// Offline provider. Output is a pure function of cache_key(req); see
// mock_provider.cpp for the routing rules.
class MockProvider final : public ChatProvider {
 public:
  std::string complete(const ChatRequest& req) override;
};

ChatResponse mock_complete(const ChatRequest& req);

struct HttpEndpoint {
  std::string base_url;  // scheme://host[:port][/prefix]
  std::string api_key;
  std::chrono::seconds timeout{60};
};

// POST {base}/chat/completions, bearer auth.
// Env: OPENAI_API_KEY, OPENAI_BASE_URL (default https://api.openai.com/v1).
class OpenAiCompatibleProvider final : public ChatProvider {
 public:
  explicit OpenAiCompatibleProvider(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {}
  static std::unique_ptr<OpenAiCompatibleProvider> from_env();
  std::string complete(const ChatRequest& req) override;

 private:
  HttpEndpoint endpoint_;
};

// POST {base}/v1/messages, x-api-key auth.
// Env: ANTHROPIC_API_KEY, ANTHROPIC_BASE_URL (default https://api.anthropic.com).
class AnthropicCompatibleProvider final : public ChatProvider {
 public:
  explicit AnthropicCompatibleProvider(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {}
  static std::unique_ptr<AnthropicCompatibleProvider> from_env();
  std::string complete(const ChatRequest& req) override;

 private:
  HttpEndpoint endpoint_;
};

// Converse API, POST {base}/model/{model}/converse with a bearer API key.
// Env: AWS_BEARER_TOKEN_BEDROCK, AWS_REGION, BEDROCK_BASE_URL.
class BedrockCompatibleProvider final : public ChatProvider {
 public:
  explicit BedrockCompatibleProvider(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {}
  static std::unique_ptr<BedrockCompatibleProvider> from_env();
  std::string complete(const ChatRequest& req) override;

 private:
  HttpEndpoint endpoint_;
};

// Maps an HTTP status and body to the failure taxonomy; 2xx is not an error.
ProviderError classify_http_failure(int status, const std::string& body);

// One JSON file per digest: {"key", "request", "response"}.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir);

  std::optional<std::string> get(const std::string& key) const;
  void put(const std::string& key, const ChatRequest& req, const std::string& text,
           std::int64_t latency_ms);
  std::filesystem::path path_for(const std::string& key) const;
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  mutable std::shared_mutex mutex_;
};

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{1000};
  double multiplier = 2.0;
  double jitter = 0.25;  // +/- fraction of each delay
};

struct GatewayOptions {
  std::optional<std::filesystem::path> cache_dir;
  RetryPolicy retry;
  std::ptrdiff_t max_in_flight = 4;  // per provider
};

struct GatewayStats {
  std::uint64_t requests = 0;
  std::uint64_t provider_calls = 0;
  std::uint64_t cache_hits = 0;
  std::uint64_t retries = 0;
  std::uint64_t failures = 0;
};

enum class CacheMode { use, bypass };

class Gateway {
 public:
  explicit Gateway(GatewayOptions options = {});
  ~Gateway();
  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  // Replaces the backend for one provider; default backends are created
  // lazily (mock in-process, HTTP ones from the environment).
  void set_provider(Provider p, std::shared_ptr<ChatProvider> backend);

  // Validates before any provider work; serves from cache when possible.
  ChatResponse complete(const ChatRequest& req, CacheMode mode = CacheMode::use);

  GatewayStats stats() const;
  const GatewayOptions& options() const { return options_; }
  const ResponseCache* cache() const { return cache_.get(); }

 private:
  std::shared_ptr<ChatProvider> backend_for(Provider p);
  std::string call_with_retry(ChatProvider& backend, const ChatRequest& req);

  GatewayOptions options_;
  std::unique_ptr<ResponseCache> cache_;
  std::mutex backends_mutex_;
  std::map<Provider, std::shared_ptr<ChatProvider>> backends_;
  std::map<Provider, std::unique_ptr<std::counting_semaphore<>>> in_flight_;
  std::atomic<std::uint64_t> requests_{0};
  std::atomic<std::uint64_t> provider_calls_{0};
  std::atomic<std::uint64_t> cache_hits_{0};
  std::atomic<std::uint64_t> retries_{0};
  std::atomic<std::uint64_t> failures_{0};
};

}  // namespace paran::llm
