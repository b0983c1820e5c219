#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

// Review corpora: JSONL loading, synthetic generation, and the
// preprocessing chain (min words, reviewer disambiguation, activity
// outliers, bipartite k-core).
namespace paran::corpus {

using Timestamp = std::chrono::sys_seconds;

// Accepts "YYYY-MM-DDTHH:MM:SS" with optional fractional seconds and a
// "Z" or "+HH:MM" / "-HH:MM" suffix. Years outside [1970, 2100) are rejected.
Timestamp parse_timestamp(const std::string& iso);
std::string format_timestamp(Timestamp t);
int utc_year(Timestamp t);

// Reviewer identity: nickname plus the reviewed merchant's address.
// Both fields are stored NFC-normalized and trimmed, so == is the
// identity relation.
struct ReviewerId {
  std::string nickname;
  std::string merchant_address;

  static ReviewerId make(std::string_view nickname, std::string_view address);

  friend bool operator==(const ReviewerId&, const ReviewerId&) = default;
  friend auto operator<=>(const ReviewerId&, const ReviewerId&) = default;
};

struct RawReview {
  std::string review_id;
  std::string nickname;
  std::string merchant_id;
  std::string merchant_address;
  std::string timestamp;
  std::optional<int> rating;
  std::string text;
  nlohmann::json extra = nlohmann::json::object();
};

// Freshly loaded reviews are identified by nickname alone (empty
// reviewer.merchant_address); disambiguate_reviewers fills in the address.
struct Review {
  std::string review_id;
  ReviewerId reviewer;
  std::string merchant_id;
  std::string merchant_address;
  Timestamp timestamp{};
  std::optional<int> rating;
  std::string text;
  std::size_t word_count = 0;
  // Unknown JSONL keys, kept for round-tripping.
  nlohmann::json extra = nlohmann::json::object();

  static Review from_raw(const RawReview& raw);
  RawReview to_raw() const;
};

struct Corpus {
  std::vector<Review> reviews;
  std::string provenance;

  std::size_t size() const { return reviews.size(); }
  bool empty() const { return reviews.empty(); }
  // Restores the (timestamp, review_id) ordering.
  void sort();
};

struct CorpusStats {
  std::size_t n_users = 0;
  std::size_t n_items = 0;
  std::size_t n_reviews = 0;

  friend bool operator==(const CorpusStats&, const CorpusStats&) = default;
};

RawReview parse_line(const std::string& line);  // throws ValidationError
nlohmann::json to_json(const Review& r);
Review review_from_json(const nlohmann::json& j);

Corpus load_corpus(const std::string& path);
// Review ids must be unique across all files.
Corpus load_corpus(const std::vector<std::string>& paths);
Corpus parse_corpus(const std::string& jsonl, const std::string& source_name = "<memory>");
std::string serialize_corpus(const Corpus& c);
void save_corpus(const Corpus& c, const std::string& path);

Corpus synth_corpus(std::uint64_t seed, std::size_t n_users, std::size_t n_merchants,
                    std::size_t n_reviews);

Corpus filter_min_words(const Corpus& c, std::size_t min_words = 6);
Corpus disambiguate_reviewers(const Corpus& c);
Corpus remove_outliers(const Corpus& c, std::size_t max_reviews_per_year = 365);
Corpus kcore_filter(const Corpus& c, std::size_t k);

struct PreprocessOptions {
  std::size_t min_words = 6;
  std::size_t max_reviews_per_year = 365;
  std::size_t k = 10;
};

struct PreprocessReport {
  CorpusStats input;
  CorpusStats after_min_words;
  CorpusStats after_disambiguation;
  CorpusStats after_outliers;
  CorpusStats after_kcore;
};

// min-words -> disambiguate -> outliers -> k-core.
Corpus preprocess(const Corpus& c, const PreprocessOptions& opts,
                  PreprocessReport* report = nullptr);

CorpusStats corpus_stats(const Corpus& c);
// Table layout: Dataset | # Users | # Items | # Reviews
std::string format_stats_table(const CorpusStats& s, const std::string& dataset_name);

}  // namespace paran::corpus
