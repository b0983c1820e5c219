#include "paran/llm_gateway.hpp"

#include <cmath>
#include <random>
#include <thread>

#include "paran/hash.hpp"
#include "paran/text.hpp"

namespace paran::llm {

using nlohmann::json;

std::string to_string(Provider p) {
  switch (p) {
    case Provider::openai_compatible: return "openai-compatible";
    case Provider::anthropic_compatible: return "anthropic-compatible";
    case Provider::bedrock_compatible: return "bedrock-compatible";
    case Provider::mock: return "mock";
  }
  return "unknown";
}

Provider provider_from_string(std::string_view s) {
  if (s == "openai-compatible" || s == "openai") return Provider::openai_compatible;
  if (s == "anthropic-compatible" || s == "anthropic") return Provider::anthropic_compatible;
  if (s == "bedrock-compatible" || s == "bedrock") return Provider::bedrock_compatible;
  if (s == "mock") return Provider::mock;
  throw ValidationError("unknown provider \"" + std::string(s) + "\"");
}

ModelId ModelId::parse(std::string_view spec) {
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos)
    throw ValidationError("model must be <provider>:<name>, got \"" + std::string(spec) + "\"");
  ModelId id{provider_from_string(spec.substr(0, colon)), std::string(spec.substr(colon + 1))};
  if (id.model_name.empty()) throw ValidationError("empty model name in \"" + std::string(spec) + "\"");
  return id;
}

std::string ModelId::str() const { return to_string(provider) + ":" + model_name; }

void DecodingParams::validate() const {
  if (!(temperature >= 0.0 && temperature <= 1.0))
    throw ValidationError("temperature must be within [0, 1], got " + std::to_string(temperature));
  if (max_tokens <= 0) throw ValidationError("max_tokens must be positive");
}

void ChatRequest::validate() const {
  if (model.model_name.empty()) throw ValidationError("model_name must be non-empty");
  if (user.empty()) throw ValidationError("user message must be non-empty");
  params.validate();
}

json to_json(const ModelId& m) { return m.str(); }

json to_json(const DecodingParams& p) {
  return json{{"temperature", p.temperature},
              {"max_tokens", p.max_tokens},
              {"seed", p.seed ? json(*p.seed) : json(nullptr)}};
}

json to_json(const ChatRequest& r) {
  return json{{"model", to_json(r.model)},
              {"system", r.system},
              {"user", r.user},
              {"params", to_json(r.params)}};
}

DecodingParams params_from_json(const json& j) {
  DecodingParams p;
  p.temperature = j.at("temperature").get<double>();
  p.max_tokens = j.value("max_tokens", 512);
  if (auto it = j.find("seed"); it != j.end() && !it->is_null()) p.seed = it->get<std::int64_t>();
  return p;
}

ChatRequest request_from_json(const json& j) {
  ChatRequest r;
  r.model = ModelId::parse(j.at("model").get<std::string>());
  r.system = j.value("system", "");
  r.user = j.at("user").get<std::string>();
  r.params = params_from_json(j.at("params"));
  return r;
}

std::string canonical_request(const ChatRequest& req) {
  // nlohmann::json objects are key-sorted; doubles print in shortest
  // round-trip form.
  const json j{{"provider", to_string(req.model.provider)},
               {"model_name", req.model.model_name},
               {"system", req.system},
               {"user", req.user},
               {"temperature", req.params.temperature},
               {"max_tokens", req.params.max_tokens},
               {"seed", req.params.seed ? json(*req.params.seed) : json(nullptr)}};
  return j.dump();
}

std::string cache_key(const ChatRequest& req) { return sha256_hex(canonical_request(req)); }

std::string to_string(Failure f) {
  switch (f) {
    case Failure::auth: return "authentication failure";
    case Failure::transient: return "transient failure";
    case Failure::content: return "content error";
    case Failure::exhausted: return "retries exhausted";
    case Failure::config: return "provider misconfigured";
  }
  return "provider failure";
}

ProviderError classify_http_failure(int status, const std::string& body) {
  const std::string detail = "HTTP " + std::to_string(status) + ": " + body.substr(0, 300);
  if (status == 401 || status == 403) return ProviderError(Failure::auth, detail);
  if (status == 408 || status == 409 || status == 425 || status == 429 || status >= 500 ||
      status <= 0)
    return ProviderError(Failure::transient, detail);
  return ProviderError(Failure::content, detail);
}

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw IoError("cannot create cache directory " + dir_.string() + ": " + ec.message());
}

std::filesystem::path ResponseCache::path_for(const std::string& key) const {
  return dir_ / (key + ".json");
}

std::optional<std::string> ResponseCache::get(const std::string& key) const {
  std::shared_lock lock(mutex_);
  const auto path = path_for(key);
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return std::nullopt;
  try {
    const json j = json::parse(text::read_file(path.string()));
    if (j.value("key", "") != key) return std::nullopt;
    return j.at("response").at("text").get<std::string>();
  } catch (const std::exception&) {
    // Unreadable entries are treated as misses and overwritten on put.
    return std::nullopt;
  }
}

void ResponseCache::put(const std::string& key, const ChatRequest& req, const std::string& text,
                        std::int64_t latency_ms) {
  const json entry{{"key", key},
                   {"request", to_json(req)},
                   {"response", {{"text", text}, {"latency_ms", latency_ms}}}};
  std::unique_lock lock(mutex_);
  text::write_file_atomic(path_for(key).string(), entry.dump() + "\n");
}

Gateway::Gateway(GatewayOptions options) : options_(std::move(options)) {
  if (options_.max_in_flight < 1) throw ValidationError("max_in_flight must be >= 1");
  if (options_.retry.max_attempts < 1) throw ValidationError("retry max_attempts must be >= 1");
  if (options_.cache_dir) cache_ = std::make_unique<ResponseCache>(*options_.cache_dir);
  for (Provider p : {Provider::openai_compatible, Provider::anthropic_compatible,
                     Provider::bedrock_compatible, Provider::mock}) {
    in_flight_.emplace(p, std::make_unique<std::counting_semaphore<>>(options_.max_in_flight));
  }
}

Gateway::~Gateway() = default;

void Gateway::set_provider(Provider p, std::shared_ptr<ChatProvider> backend) {
  std::lock_guard lock(backends_mutex_);
  backends_[p] = std::move(backend);
}

std::shared_ptr<ChatProvider> Gateway::backend_for(Provider p) {
  std::lock_guard lock(backends_mutex_);
  auto& slot = backends_[p];
  if (!slot) {
    switch (p) {
      case Provider::mock: slot = std::make_shared<MockProvider>(); break;
      case Provider::openai_compatible: slot = OpenAiCompatibleProvider::from_env(); break;
      case Provider::anthropic_compatible: slot = AnthropicCompatibleProvider::from_env(); break;
      case Provider::bedrock_compatible: slot = BedrockCompatibleProvider::from_env(); break;
    }
  }
  return slot;
}

std::string Gateway::call_with_retry(ChatProvider& backend, const ChatRequest& req) {
  thread_local std::mt19937_64 jitter_rng{std::random_device{}()};
  const RetryPolicy& policy = options_.retry;
  double delay_ms = static_cast<double>(policy.initial_backoff.count());
  std::string last_error;
  for (int attempt = 1; attempt <= policy.max_attempts; ++attempt) {
    if (attempt > 1) {
      ++retries_;
      std::uniform_real_distribution<double> spread(1.0 - policy.jitter, 1.0 + policy.jitter);
      const double wait = std::max(0.0, delay_ms * spread(jitter_rng));
      std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(wait));
      delay_ms *= policy.multiplier;
    }
    try {
      auto& sem = *in_flight_.at(req.model.provider);
      sem.acquire();
      struct Release {
        std::counting_semaphore<>& s;
        ~Release() { s.release(); }
      } release{sem};
      ++provider_calls_;
      return backend.complete(req);
    } catch (const ProviderError& e) {
      if (!e.retryable()) throw;
      last_error = e.what();
    }
  }
  throw ProviderError(Failure::exhausted, std::to_string(policy.max_attempts) +
                                              " attempts for " + req.model.str() + "; last: " +
                                              last_error);
}

ChatResponse Gateway::complete(const ChatRequest& req, CacheMode mode) {
  req.validate();
  ++requests_;
  const auto started = std::chrono::steady_clock::now();
  const bool use_cache = cache_ && mode == CacheMode::use;
  const std::string key = use_cache ? cache_key(req) : std::string();

  ChatResponse resp;
  resp.model = req.model;
  resp.params = req.params;
  if (use_cache) {
    if (auto hit = cache_->get(key)) {
      ++cache_hits_;
      resp.text = std::move(*hit);
      resp.cached = true;
      return resp;
    }
  }

  auto backend = backend_for(req.model.provider);
  try {
    resp.text = call_with_retry(*backend, req);
  } catch (...) {
    ++failures_;
    throw;
  }
  resp.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - started)
                        .count();
  if (use_cache) cache_->put(key, req, resp.text, resp.latency_ms);
  return resp;
}

GatewayStats Gateway::stats() const {
  return GatewayStats{requests_.load(), provider_calls_.load(), cache_hits_.load(),
                      retries_.load(), failures_.load()};
}

}  // namespace paran::llm
