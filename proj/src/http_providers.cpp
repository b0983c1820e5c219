#include <httplib.h>

#include <cstdlib>

#include "paran/llm_gateway.hpp"

namespace paran::llm {

using nlohmann::json;

namespace {

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

std::string require_env(const char* name) {
  const char* v = std::getenv(name);
  if (!v || !*v) throw ProviderError(Failure::auth, std::string(name) + " is not set");
  return v;
}

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path without trailing slash
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ProviderError(Failure::config, "bad base URL " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  SplitUrl out;
  out.origin = url.substr(0, path_start);
  out.prefix = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
  return out;
}

json post_json(const HttpEndpoint& ep, const std::string& path, const httplib::Headers& headers,
               const json& body) {
  const SplitUrl url = split_url(ep.base_url);
  httplib::Client client(url.origin);
  client.set_connection_timeout(ep.timeout);
  client.set_read_timeout(ep.timeout);
  client.set_write_timeout(ep.timeout);
  client.set_url_encode(false);
  auto res = client.Post(url.prefix + path, headers, body.dump(), "application/json");
  if (!res) {
    throw ProviderError(Failure::transient,
                        "request to " + ep.base_url + " failed: " + httplib::to_string(res.error()));
  }
  if (res->status < 200 || res->status >= 300) throw classify_http_failure(res->status, res->body);
  try {
    return json::parse(res->body);
  } catch (const json::parse_error&) {
    throw ProviderError(Failure::content, "non-JSON response body: " + res->body.substr(0, 200));
  }
}

}  // namespace

std::unique_ptr<OpenAiCompatibleProvider> OpenAiCompatibleProvider::from_env() {
  return std::make_unique<OpenAiCompatibleProvider>(HttpEndpoint{
      env_or("OPENAI_BASE_URL", "https://api.openai.com/v1"), require_env("OPENAI_API_KEY")});
}

std::string OpenAiCompatibleProvider::complete(const ChatRequest& req) {
  json messages = json::array();
  if (!req.system.empty()) messages.push_back({{"role", "system"}, {"content", req.system}});
  messages.push_back({{"role", "user"}, {"content", req.user}});
  json body{{"model", req.model.model_name},
            {"messages", messages},
            {"temperature", req.params.temperature},
            {"max_tokens", req.params.max_tokens}};
  if (req.params.seed) body["seed"] = *req.params.seed;
  const json reply = post_json(endpoint_, "/chat/completions",
                               {{"Authorization", "Bearer " + endpoint_.api_key}}, body);
  try {
    const auto& choice = reply.at("choices").at(0);
    if (choice.value("finish_reason", "") == "content_filter")
      throw ProviderError(Failure::content, "completion blocked by content filter");
    return choice.at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw ProviderError(Failure::content, std::string("unexpected response shape: ") + e.what());
  }
}

std::unique_ptr<AnthropicCompatibleProvider> AnthropicCompatibleProvider::from_env() {
  return std::make_unique<AnthropicCompatibleProvider>(HttpEndpoint{
      env_or("ANTHROPIC_BASE_URL", "https://api.anthropic.com"), require_env("ANTHROPIC_API_KEY")});
}

std::string AnthropicCompatibleProvider::complete(const ChatRequest& req) {
  json body{{"model", req.model.model_name},
            {"max_tokens", req.params.max_tokens},
            {"temperature", req.params.temperature},
            {"messages", json::array({{{"role", "user"}, {"content", req.user}}})}};
  if (!req.system.empty()) body["system"] = req.system;
  const json reply = post_json(
      endpoint_, "/v1/messages",
      {{"x-api-key", endpoint_.api_key}, {"anthropic-version", "2023-06-01"}}, body);
  try {
    if (reply.value("stop_reason", "") == "refusal")
      throw ProviderError(Failure::content, "model refused the request");
    std::string text;
    for (const auto& block : reply.at("content"))
      if (block.value("type", "") == "text") text += block.at("text").get<std::string>();
    return text;
  } catch (const json::exception& e) {
    throw ProviderError(Failure::content, std::string("unexpected response shape: ") + e.what());
  }
}

std::unique_ptr<BedrockCompatibleProvider> BedrockCompatibleProvider::from_env() {
  const std::string region = env_or("AWS_REGION", "us-east-1");
  return std::make_unique<BedrockCompatibleProvider>(HttpEndpoint{
      env_or("BEDROCK_BASE_URL", "https://bedrock-runtime." + region + ".amazonaws.com"),
      require_env("AWS_BEARER_TOKEN_BEDROCK")});
}

std::string BedrockCompatibleProvider::complete(const ChatRequest& req) {
  json body{{"messages", json::array({{{"role", "user"},
                                        {"content", json::array({{{"text", req.user}}})}}})},
            {"inferenceConfig",
             {{"temperature", req.params.temperature}, {"maxTokens", req.params.max_tokens}}}};
  if (!req.system.empty()) body["system"] = json::array({{{"text", req.system}}});
  const std::string path =
      "/model/" + httplib::detail::encode_query_param(req.model.model_name) + "/converse";
  const json reply =
      post_json(endpoint_, path, {{"Authorization", "Bearer " + endpoint_.api_key}}, body);
  try {
    if (reply.value("stopReason", "") == "content_filtered" ||
        reply.value("stopReason", "") == "guardrail_intervened")
      throw ProviderError(Failure::content, "completion blocked: " + reply.value("stopReason", ""));
    std::string text;
    for (const auto& block : reply.at("output").at("message").at("content"))
      if (block.contains("text")) text += block.at("text").get<std::string>();
    return text;
  } catch (const json::exception& e) {
    throw ProviderError(Failure::content, std::string("unexpected response shape: ") + e.what());
  }
}

}  // namespace paran::llm
