#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "golden.hpp"
#include "oracles.hpp"
#include "paran/corpus.hpp"
#include "paran/error.hpp"

using namespace paran;
using namespace paran::corpus;

namespace {

Review mk(const std::string& id, const std::string& nick, const std::string& merchant,
          const std::string& addr, const std::string& ts, const std::string& text) {
  RawReview raw;
  raw.review_id = id;
  raw.nickname = nick;
  raw.merchant_id = merchant;
  raw.merchant_address = addr;
  raw.timestamp = ts;
  raw.text = text;
  return Review::from_raw(raw);
}

const std::string kSix = "one two three four five six";

std::set<std::string> ids(const Corpus& c) {
  std::set<std::string> s;
  for (const auto& r : c.reviews) s.insert(r.review_id);
  return s;
}

// Bipartite multigraph as a corpus: one review per edge.
Corpus graph_corpus(const std::vector<std::pair<int, int>>& edges) {
  Corpus c;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    char id[16];
    std::snprintf(id, sizeof id, "e%04zu", e);
    c.reviews.push_back(mk(id, "u" + std::to_string(edges[e].first),
                           "m" + std::to_string(edges[e].second), "addr",
                           "2024-01-01T00:00:00Z", kSix));
  }
  c.sort();
  return c;
}

}  // namespace

TEST(Timestamp, ParsesOffsetsAndFractions) {
  EXPECT_EQ(format_timestamp(parse_timestamp("2024-03-01T09:30:00+09:00")), "2024-03-01T00:30:00Z");
  EXPECT_EQ(format_timestamp(parse_timestamp("2024-03-01T00:30:00.250Z")), "2024-03-01T00:30:00Z");
  EXPECT_EQ(utc_year(parse_timestamp("2024-01-01T05:00:00+09:00")), 2023);
}

TEST(Timestamp, RejectsBadInput) {
  EXPECT_THROW(parse_timestamp("2024-03-01T00:30:00"), ValidationError);
  EXPECT_THROW(parse_timestamp("2024-13-01T00:30:00Z"), ValidationError);
  EXPECT_THROW(parse_timestamp("1969-12-31T23:59:59Z"), ValidationError);
  EXPECT_THROW(parse_timestamp("2100-01-01T00:00:00Z"), ValidationError);
  EXPECT_THROW(parse_timestamp("yesterday"), ValidationError);
}

TEST(Load, ThreeLinesAndEmpty) {
  std::string jsonl =
      R"({"review_id":"b","nickname":"n","merchant_id":"m","merchant_address":"a","timestamp":"2024-01-02T00:00:00Z","rating":5,"text":"x y"})"
      "\n"
      R"({"review_id":"a","nickname":"n","merchant_id":"m","merchant_address":"a","timestamp":"2024-01-02T00:00:00Z","rating":null,"text":"x"})"
      "\n\n"
      R"({"review_id":"c","nickname":"n","merchant_id":"m","merchant_address":"a","timestamp":"2024-01-01T00:00:00Z","text":"x","source":"web"})"
      "\n";
  auto c = parse_corpus(jsonl);
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c.reviews[0].review_id, "c");
  EXPECT_EQ(c.reviews[1].review_id, "a");
  EXPECT_FALSE(c.reviews[1].rating.has_value());
  EXPECT_EQ(c.reviews[0].extra.at("source"), "web");
  EXPECT_EQ(parse_corpus("").size(), 0u);
  auto again = parse_corpus(serialize_corpus(c));
  EXPECT_EQ(serialize_corpus(again), serialize_corpus(c));
}

TEST(Load, ErrorNamesLine) {
  std::string jsonl =
      R"({"review_id":"a","nickname":"n","merchant_id":"m","merchant_address":"a","timestamp":"2024-01-02T00:00:00Z","text":"x"})"
      "\n"
      R"({"review_id":"b","nickname":"n","merchant_id":"m","merchant_address":"a","timestamp":"2024-01-02T00:00:00Z"})"
      "\n";
  try {
    parse_corpus(jsonl, "f.jsonl");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("text"), std::string::npos) << e.what();
  }
}

TEST(Load, DuplicateIdsAndBadRatings) {
  std::string line =
      R"({"review_id":"a","nickname":"n","merchant_id":"m","merchant_address":"a","timestamp":"2024-01-02T00:00:00Z","text":"x"})";
  EXPECT_THROW(parse_corpus(line + "\n" + line + "\n"), ValidationError);
  EXPECT_THROW(parse_line(R"({"review_id":"a","nickname":"n","merchant_id":"m","merchant_address":"a","timestamp":"2024-01-02T00:00:00Z","text":"x","rating":6})"),
               ValidationError);
  EXPECT_THROW(load_corpus("/nonexistent/corpus.jsonl"), IoError);
}

TEST(Review, WordCountOnNormalizedText) {
  auto r = mk("a", " foodie ", "m", "Seoul  ", "2024-01-01T00:00:00Z", "정말\xE3\x80\x80맛있어요  !!");
  EXPECT_EQ(r.word_count, 3u);
  EXPECT_EQ(r.reviewer.nickname, "foodie");
}

TEST(Filters, MinWordsBoundary) {
  Corpus c;
  c.reviews = {mk("1", "a", "m", "x", "2024-01-01T00:00:00Z", "Good"),
               mk("5", "a", "m", "x", "2024-01-01T00:00:00Z", "one two three four five"),
               mk("6", "a", "m", "x", "2024-01-01T00:00:00Z", kSix)};
  EXPECT_EQ(ids(filter_min_words(c)), std::set<std::string>{"6"});
}

TEST(Filters, Disambiguation) {
  Corpus c;
  c.reviews = {mk("1", "foodie", "m1", "Gangnam", "2024-01-01T00:00:00Z", kSix),
               mk("2", "foodie", "m2", "Mapo", "2024-01-01T00:00:00Z", kSix),
               mk("3", "foodie", "m3", "Gangnam", "2024-01-01T00:00:00Z", kSix),
               mk("4", "eater", "m3", "Gangnam", "2024-01-01T00:00:00Z", kSix)};
  auto d = disambiguate_reviewers(c);
  EXPECT_EQ(corpus_stats(c).n_users, 2u);
  EXPECT_EQ(corpus_stats(d).n_users, 3u);
  EXPECT_EQ(d.size(), c.size());
  EXPECT_EQ(d.reviews[0].text, c.reviews[0].text);
}

TEST(Filters, OutlierBoundary) {
  auto year_of = [](const std::string& nick, int n, const std::string& year) {
    std::vector<Review> v;
    for (int i = 0; i < n; ++i) {
      char ts[32];
      std::snprintf(ts, sizeof ts, "%s-01-01T00:00:00Z", year.c_str());
      auto t = parse_timestamp(ts) + std::chrono::hours(i * 23);
      auto r = mk(nick + std::to_string(i), nick, "m", "x", format_timestamp(t), kSix);
      v.push_back(r);
    }
    return v;
  };
  Corpus c;
  for (const auto& v : {year_of("heavy", 366, "2024"), year_of("edge", 365, "2024"),
                        year_of("light", 10, "2024")})
    c.reviews.insert(c.reviews.end(), v.begin(), v.end());
  c.sort();
  auto out = remove_outliers(disambiguate_reviewers(c));
  auto st = corpus_stats(out);
  EXPECT_EQ(st.n_users, 2u);
  EXPECT_EQ(st.n_reviews, 375u);
}

TEST(KCore, Fixtures) {
  // complete 2x2, each pair twice
  auto full = graph_corpus({{0, 0}, {0, 0}, {0, 1}, {0, 1}, {1, 0}, {1, 0}, {1, 1}, {1, 1}});
  EXPECT_EQ(kcore_filter(full, 2).size(), 8u);
  auto star = graph_corpus({{0, 0}, {1, 0}, {2, 0}, {3, 0}, {4, 0}});
  EXPECT_TRUE(kcore_filter(star, 2).empty());
  // u2 has one review of m1; dropping it leaves m1 with one review, which cascades.
  auto chain = graph_corpus({{0, 0}, {0, 0}, {1, 0}, {1, 0}, {1, 1}, {2, 1}});
  EXPECT_EQ(ids(kcore_filter(chain, 2)), (std::set<std::string>{"e0000", "e0001", "e0002", "e0003"}));
  EXPECT_THROW(kcore_filter(chain, 0), ValidationError);
}

TEST(KCore, MatchesBruteForceOracle) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    int users = 2 + int(rng() % 14), items = 2 + int(rng() % 14);
    int k = 2 + int(rng() % 2);
    int n_edges = int(rng() % 60);
    std::vector<std::pair<int, int>> edges;
    for (int e = 0; e < n_edges; ++e) edges.emplace_back(int(rng() % users), int(rng() % items));
    auto c = graph_corpus(edges);
    auto got = ids(kcore_filter(c, k));
    std::set<std::string> want;
    for (auto e : oracle::kcore(edges, k)) {
      char id[16];
      std::snprintf(id, sizeof id, "e%04zu", e);
      want.insert(id);
    }
    EXPECT_EQ(got, want) << "trial " << trial;
  }
}

TEST(Preprocess, InvariantsAndIdempotence) {
  auto raw = synth_corpus(11, 60, 12, 3000);
  PreprocessReport rep;
  auto out = preprocess(raw, PreprocessOptions{6, 365, 10}, &rep);
  ASSERT_FALSE(out.empty());
  std::map<ReviewerId, std::size_t> du;
  std::map<std::string, std::size_t> di;
  std::map<std::pair<ReviewerId, int>, std::size_t> per_year;
  for (const auto& r : out.reviews) {
    EXPECT_GE(r.word_count, 6u);
    du[r.reviewer]++;
    di[r.merchant_id]++;
    per_year[{r.reviewer, utc_year(r.timestamp)}]++;
  }
  for (auto& [_, d] : du) EXPECT_GE(d, 10u);
  for (auto& [_, d] : di) EXPECT_GE(d, 10u);
  for (auto& [_, n] : per_year) EXPECT_LE(n, 365u);
  EXPECT_EQ(ids(filter_min_words(out)), ids(out));
  EXPECT_EQ(ids(remove_outliers(out)), ids(out));
  EXPECT_EQ(ids(kcore_filter(out, 10)), ids(out));
  // each step keeps a subset
  EXPECT_LE(rep.after_min_words.n_reviews, rep.input.n_reviews);
  EXPECT_EQ(rep.after_disambiguation.n_reviews, rep.after_min_words.n_reviews);
  EXPECT_LE(rep.after_kcore.n_reviews, rep.after_outliers.n_reviews);
  EXPECT_NE(out.provenance.find("kcore"), std::string::npos) << out.provenance;
}

TEST(Synth, DeterministicAndSeedSensitive) {
  auto a = serialize_corpus(synth_corpus(7, 10, 5, 100));
  auto b = serialize_corpus(synth_corpus(7, 10, 5, 100));
  auto c = serialize_corpus(synth_corpus(8, 10, 5, 100));
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  EXPECT_THROW(synth_corpus(7, 0, 5, 100), ValidationError);
}

TEST(Synth, SharesNicknamesAcrossAddresses) {
  auto c = disambiguate_reviewers(synth_corpus(7, 10, 5, 100));
  std::map<std::string, std::set<std::string>> addrs;
  for (const auto& r : c.reviews) addrs[r.reviewer.nickname].insert(r.reviewer.merchant_address);
  EXPECT_TRUE(std::any_of(addrs.begin(), addrs.end(), [](auto& kv) { return kv.second.size() >= 2; }));
}

TEST(Stats, CountsAndTable) {
  EXPECT_EQ(corpus_stats(Corpus{}), (CorpusStats{0, 0, 0}));
  Corpus c;
  c.reviews = {mk("1", "u", "m1", "x", "2024-01-01T00:00:00Z", kSix),
               mk("2", "u", "m2", "x", "2024-01-01T00:00:00Z", kSix),
               mk("3", "u", "m2", "x", "2024-01-01T00:00:00Z", kSix)};
  EXPECT_EQ(corpus_stats(c), (CorpusStats{1, 2, 3}));
  auto table = format_stats_table(CorpusStats{1234, 56, 1234567}, "Baemin");
  EXPECT_NE(table.find("1,234,567"), std::string::npos) << table;
  EXPECT_NE(table.find("Dataset | # Users | # Items | # Reviews"), std::string::npos);
}

TEST(Stats, SyntheticGolden) {
  auto out = preprocess(synth_corpus(7, 10, 5, 100), PreprocessOptions{});
  expect_golden("synth7_stats.txt", format_stats_table(corpus_stats(out), "synthetic"));
}
