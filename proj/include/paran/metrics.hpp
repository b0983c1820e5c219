#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

// Reference-based text metrics, each computed against a single reference.
namespace paran::metrics {

enum class TokenMode { whitespace, char_bigram };
std::string_view to_string(TokenMode m);
TokenMode token_mode_from_string(std::string_view s);

struct TokenSequence {
  std::vector<std::string> tokens;
  TokenMode mode = TokenMode::whitespace;

  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
};

// whitespace: NFC, lowercase, split on Unicode whitespace.
// char_bigram: NFC, drop whitespace, emit overlapping code-point pairs.
TokenSequence tokenize(std::string_view text, TokenMode mode = TokenMode::whitespace);
inline TokenSequence make_tokens(std::vector<std::string> tokens,
                                 TokenMode mode = TokenMode::whitespace) {
  return TokenSequence{std::move(tokens), mode};
}

// Bigram F1 with clipped counts; 0 when either side has no bigram.
double rouge2(const TokenSequence& cand, const TokenSequence& ref);

// Sentence BLEU-4, uniform weights, brevity penalty. For n >= 2 a zero
// match count is smoothed to 1 / (total + 1). 0 when no unigram matches.
double bleu(const TokenSequence& cand, const TokenSequence& ref);

struct MeteorParams {
  double alpha = 0.9;
  double beta = 3.0;
  double gamma = 0.5;
};

struct MeteorAlignment {
  std::size_t matches = 0;
  std::size_t chunks = 0;
  // ref index matched by each candidate position, or -1.
  std::vector<long> cand_to_ref;
};

// Exact pass then Porter-stem pass, each greedy left to right.
MeteorAlignment meteor_align(const TokenSequence& cand, const TokenSequence& ref);
double meteor(const TokenSequence& cand, const TokenSequence& ref, const MeteorParams& p = {});

struct ArmDiversity {
  double distinct2 = 0.0;
  std::size_t n_distinct_bigrams = 0;
  std::size_t n_tokens = 0;
};

// Distinct bigram types pooled over all responses (bigrams never span two
// responses) divided by the total token count.
ArmDiversity distinct2(std::span<const TokenSequence> responses);

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  // One vector per token, all of the same dimension.
  virtual std::vector<std::vector<double>> embed(const std::vector<std::string>& tokens) = 0;
  virtual std::string name() const = 0;
};

// Deterministic test embedder: each distinct token string gets a
// pseudo-random vector seeded by its FNV-1a hash. No context.
class HashEmbedder final : public EmbeddingProvider {
 public:
  explicit HashEmbedder(std::size_t dim = 64) : dim_(dim) {}
  std::vector<std::vector<double>> embed(const std::vector<std::string>& tokens) override;
  std::string name() const override { return "mock"; }

 private:
  std::size_t dim_;
};

// OpenAI-compatible POST {base}/embeddings; each token is embedded as its
// own input string.
// Env: PARAN_EMBEDDING_BASE_URL (falls back to OPENAI_BASE_URL),
// PARAN_EMBEDDING_API_KEY (falls back to OPENAI_API_KEY), PARAN_EMBEDDING_MODEL.
class RemoteEmbedder final : public EmbeddingProvider {
 public:
  RemoteEmbedder(std::string base_url, std::string api_key, std::string model);
  static std::unique_ptr<RemoteEmbedder> from_env();
  std::vector<std::vector<double>> embed(const std::vector<std::string>& tokens) override;
  std::string name() const override { return "remote"; }

 private:
  std::string base_url_;
  std::string api_key_;
  std::string model_;
};

std::unique_ptr<EmbeddingProvider> make_embedder(std::string_view choice);

// Greedy matching over a cosine matrix (rows = candidate tokens).
// When precision and recall have opposite signs, or sum to zero, the
// harmonic mean is undefined and 0 is returned.
double bertscore_from_cosines(const std::vector<std::vector<double>>& cosine);

// Throws ValidationError on empty input or a zero-norm embedding.
double bertscore_f1(const TokenSequence& cand, const TokenSequence& ref, EmbeddingProvider& emb);

struct MetricScores {
  double rouge2_f = 0.0;
  double bleu = 0.0;
  double meteor = 0.0;
  double bertscore_f1 = 0.0;
};

}  // namespace paran::metrics
