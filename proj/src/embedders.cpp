#include <httplib.h>

#include <cstdlib>
#include <random>

#include <nlohmann/json.hpp>

#include "paran/error.hpp"
#include "paran/hash.hpp"
#include "paran/llm_gateway.hpp"
#include "paran/metrics.hpp"

namespace paran::metrics {

using nlohmann::json;

std::vector<std::vector<double>> HashEmbedder::embed(const std::vector<std::string>& tokens) {
  std::vector<std::vector<double>> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    std::mt19937_64 rng(fnv1a64(t));
    std::vector<double> v(dim_);
    for (double& x : v) x = static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
    out.push_back(std::move(v));
  }
  return out;
}

RemoteEmbedder::RemoteEmbedder(std::string base_url, std::string api_key, std::string model)
    : base_url_(std::move(base_url)), api_key_(std::move(api_key)), model_(std::move(model)) {
  while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
}

std::unique_ptr<RemoteEmbedder> RemoteEmbedder::from_env() {
  auto get = [](const char* primary, const char* fallback, const char* dflt) -> std::string {
    if (const char* v = std::getenv(primary); v && *v) return v;
    if (fallback) {
      if (const char* v = std::getenv(fallback); v && *v) return v;
    }
    return dflt ? dflt : "";
  };
  std::string key = get("PARAN_EMBEDDING_API_KEY", "OPENAI_API_KEY", nullptr);
  if (key.empty())
    throw llm::ProviderError(llm::Failure::auth, "PARAN_EMBEDDING_API_KEY / OPENAI_API_KEY not set");
  return std::make_unique<RemoteEmbedder>(
      get("PARAN_EMBEDDING_BASE_URL", "OPENAI_BASE_URL", "https://api.openai.com/v1"),
      std::move(key), get("PARAN_EMBEDDING_MODEL", nullptr, "text-embedding-3-small"));
}

std::vector<std::vector<double>> RemoteEmbedder::embed(const std::vector<std::string>& tokens) {
  const auto scheme_end = base_url_.find("://");
  if (scheme_end == std::string::npos)
    throw llm::ProviderError(llm::Failure::config, "bad embedding base URL " + base_url_);
  const auto path_start = base_url_.find('/', scheme_end + 3);
  const std::string origin = base_url_.substr(0, path_start);
  const std::string prefix = path_start == std::string::npos ? "" : base_url_.substr(path_start);

  httplib::Client client(origin);
  client.set_read_timeout(std::chrono::seconds(60));
  const json body{{"model", model_}, {"input", tokens}};
  auto res = client.Post(prefix + "/embeddings", {{"Authorization", "Bearer " + api_key_}},
                         body.dump(), "application/json");
  if (!res)
    throw llm::ProviderError(llm::Failure::transient,
                             "embedding request failed: " + httplib::to_string(res.error()));
  if (res->status < 200 || res->status >= 300) throw llm::classify_http_failure(res->status, res->body);
  try {
    const json reply = json::parse(res->body);
    std::vector<std::vector<double>> out(tokens.size());
    for (const auto& item : reply.at("data")) {
      const auto index = item.value("index", std::size_t{0});
      if (index >= out.size()) throw ValidationError("embedding index out of range");
      out[index] = item.at("embedding").get<std::vector<double>>();
    }
    return out;
  } catch (const json::exception& e) {
    throw llm::ProviderError(llm::Failure::content,
                             std::string("unexpected embedding response: ") + e.what());
  }
}

std::unique_ptr<EmbeddingProvider> make_embedder(std::string_view choice) {
  if (choice == "mock") return std::make_unique<HashEmbedder>();
  if (choice == "remote") return RemoteEmbedder::from_env();
  throw ValidationError("unknown embedder \"" + std::string(choice) + "\" (expected mock or remote)");
}

}  // namespace paran::metrics
