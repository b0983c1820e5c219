#include "paran/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "paran/error.hpp"
#include "paran/porter_stemmer.hpp"
#include "paran/text.hpp"

namespace paran::metrics {

namespace {

using Ngram = std::vector<std::string>;

std::map<Ngram, std::size_t> ngram_counts(const std::vector<std::string>& tokens, std::size_t n) {
  std::map<Ngram, std::size_t> counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i)
    ++counts[Ngram(tokens.begin() + static_cast<long>(i), tokens.begin() + static_cast<long>(i + n))];
  return counts;
}

std::size_t clipped_matches(const std::map<Ngram, std::size_t>& cand,
                            const std::map<Ngram, std::size_t>& ref) {
  std::size_t m = 0;
  for (const auto& [gram, c] : cand) {
    auto it = ref.find(gram);
    if (it != ref.end()) m += std::min(c, it->second);
  }
  return m;
}

void require_same_mode(const TokenSequence& a, const TokenSequence& b) {
  if (a.mode != b.mode) throw ValidationError("token sequences use different tokenization modes");
}

}  // namespace

std::string_view to_string(TokenMode m) {
  return m == TokenMode::whitespace ? "whitespace" : "char_bigram";
}

TokenMode token_mode_from_string(std::string_view s) {
  if (s == "whitespace") return TokenMode::whitespace;
  if (s == "char_bigram") return TokenMode::char_bigram;
  throw ValidationError("unknown tokenizer \"" + std::string(s) + "\"");
}

TokenSequence tokenize(std::string_view input, TokenMode mode) {
  TokenSequence seq;
  seq.mode = mode;
  const std::string normalized = text::nfc(input);
  if (mode == TokenMode::whitespace) {
    seq.tokens = text::split_whitespace(text::to_lower(normalized));
    return seq;
  }
  std::vector<std::string> chars;
  for (auto& cp : text::code_points(normalized))
    if (!text::is_whitespace(cp)) chars.push_back(std::move(cp));
  for (std::size_t i = 0; i + 1 < chars.size(); ++i) seq.tokens.push_back(chars[i] + chars[i + 1]);
  return seq;
}

double rouge2(const TokenSequence& cand, const TokenSequence& ref) {
  require_same_mode(cand, ref);
  if (cand.size() < 2 || ref.size() < 2) return 0.0;
  const auto c = ngram_counts(cand.tokens, 2);
  const auto r = ngram_counts(ref.tokens, 2);
  const double match = static_cast<double>(clipped_matches(c, r));
  if (match == 0.0) return 0.0;
  const double precision = match / static_cast<double>(cand.size() - 1);
  const double recall = match / static_cast<double>(ref.size() - 1);
  return 2.0 * precision * recall / (precision + recall);
}

double bleu(const TokenSequence& cand, const TokenSequence& ref) {
  require_same_mode(cand, ref);
  if (cand.empty()) return 0.0;
  double log_sum = 0.0;
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto c = ngram_counts(cand.tokens, n);
    const auto r = ngram_counts(ref.tokens, n);
    const double total = cand.size() >= n ? static_cast<double>(cand.size() - n + 1) : 0.0;
    double match = static_cast<double>(clipped_matches(c, r));
    double p;
    if (n == 1) {
      if (match == 0.0) return 0.0;
      p = match / total;
    } else if (match == 0.0) {
      p = 1.0 / (total + 1.0);
    } else {
      p = match / total;
    }
    log_sum += std::log(p) / 4.0;
  }
  const double ratio = static_cast<double>(ref.size()) / static_cast<double>(cand.size());
  const double bp = std::min(1.0, std::exp(1.0 - ratio));
  return bp * std::exp(log_sum);
}

MeteorAlignment meteor_align(const TokenSequence& cand, const TokenSequence& ref) {
  MeteorAlignment a;
  a.cand_to_ref.assign(cand.size(), -1);
  std::vector<bool> ref_used(ref.size(), false);

  auto greedy_pass = [&](auto&& key_of) {
    std::vector<std::string> ref_keys(ref.size());
    for (std::size_t j = 0; j < ref.size(); ++j) ref_keys[j] = key_of(ref.tokens[j]);
    for (std::size_t i = 0; i < cand.size(); ++i) {
      if (a.cand_to_ref[i] >= 0) continue;
      const std::string key = key_of(cand.tokens[i]);
      for (std::size_t j = 0; j < ref.size(); ++j) {
        if (!ref_used[j] && ref_keys[j] == key) {
          ref_used[j] = true;
          a.cand_to_ref[i] = static_cast<long>(j);
          ++a.matches;
          break;
        }
      }
    }
  };
  greedy_pass([](const std::string& t) { return t; });
  greedy_pass([](const std::string& t) {
    return text::is_latin_ascii_word(t) ? porter_stem(t) : t;
  });

  // A chunk continues while consecutive candidate tokens map to
  // consecutive reference tokens.
  long prev_ref = -2;
  bool prev_matched = false;
  for (long j : a.cand_to_ref) {
    if (j < 0) {
      prev_matched = false;
      continue;
    }
    if (!prev_matched || j != prev_ref + 1) ++a.chunks;
    prev_matched = true;
    prev_ref = j;
  }
  return a;
}

double meteor(const TokenSequence& cand, const TokenSequence& ref, const MeteorParams& p) {
  if (cand.mode != TokenMode::whitespace || ref.mode != TokenMode::whitespace)
    throw ValidationError("METEOR requires whitespace tokenization");
  const MeteorAlignment a = meteor_align(cand, ref);
  if (a.matches == 0) return 0.0;
  const double m = static_cast<double>(a.matches);
  const double precision = m / static_cast<double>(cand.size());
  const double recall = m / static_cast<double>(ref.size());
  const double f_mean = precision * recall / (p.alpha * precision + (1.0 - p.alpha) * recall);
  const double penalty = p.gamma * std::pow(static_cast<double>(a.chunks) / m, p.beta);
  return f_mean * (1.0 - penalty);
}

ArmDiversity distinct2(std::span<const TokenSequence> responses) {
  ArmDiversity d;
  std::set<std::pair<std::string, std::string>> types;
  for (const auto& r : responses) {
    if (!responses.empty() && r.mode != responses.front().mode)
      throw ValidationError("distinct2 over mixed tokenization modes");
    d.n_tokens += r.size();
    for (std::size_t i = 0; i + 1 < r.size(); ++i) types.emplace(r.tokens[i], r.tokens[i + 1]);
  }
  d.n_distinct_bigrams = types.size();
  d.distinct2 = d.n_tokens == 0 ? 0.0
                                : static_cast<double>(d.n_distinct_bigrams) /
                                      static_cast<double>(d.n_tokens);
  return d;
}

double bertscore_from_cosines(const std::vector<std::vector<double>>& cosine) {
  if (cosine.empty() || cosine.front().empty())
    throw ValidationError("BERTScore needs non-empty candidate and reference");
  const std::size_t rows = cosine.size();
  const std::size_t cols = cosine.front().size();
  std::vector<double> col_max(cols, -std::numeric_limits<double>::infinity());
  double precision = 0.0;
  for (const auto& row : cosine) {
    if (row.size() != cols) throw ValidationError("ragged similarity matrix");
    double row_max = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < cols; ++j) {
      row_max = std::max(row_max, row[j]);
      col_max[j] = std::max(col_max[j], row[j]);
    }
    precision += row_max;
  }
  precision /= static_cast<double>(rows);
  double recall = 0.0;
  for (double v : col_max) recall += v;
  recall /= static_cast<double>(cols);
  if (precision * recall < 0.0 || precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

double bertscore_f1(const TokenSequence& cand, const TokenSequence& ref, EmbeddingProvider& emb) {
  require_same_mode(cand, ref);
  if (cand.empty() || ref.empty()) throw ValidationError("BERTScore needs non-empty inputs");
  auto normalize = [](std::vector<std::vector<double>> vecs, std::size_t expected) {
    if (vecs.size() != expected) throw ValidationError("embedder returned wrong number of vectors");
    for (auto& v : vecs) {
      double norm = 0.0;
      for (double x : v) {
        if (!std::isfinite(x)) throw ValidationError("embedding has a non-finite component");
        norm += x * x;
      }
      norm = std::sqrt(norm);
      if (norm == 0.0) throw ValidationError("zero-norm embedding vector");
      for (double& x : v) x /= norm;
    }
    return vecs;
  };
  const auto c = normalize(emb.embed(cand.tokens), cand.size());
  const auto r = normalize(emb.embed(ref.tokens), ref.size());
  std::vector<std::vector<double>> cosine(c.size(), std::vector<double>(r.size()));
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (c[i].size() != r[j].size()) throw ValidationError("embedding dimensions differ");
      double dot = 0.0;
      for (std::size_t k = 0; k < c[i].size(); ++k) dot += c[i][k] * r[j][k];
      cosine[i][j] = std::clamp(dot, -1.0, 1.0);
    }
  }
  return bertscore_from_cosines(cosine);
}

}  // namespace paran::metrics
