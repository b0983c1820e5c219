#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "paran/error.hpp"
#include "paran/evaluation.hpp"
#include "paran/metrics.hpp"
#include "paran/porter_stemmer.hpp"

using namespace paran;
using namespace paran::metrics;

namespace {

TokenSequence T(std::vector<std::string> t) { return make_tokens(std::move(t)); }

const std::vector<std::string> kVocab = {"the",  "a",     "good",   "pizza",  "food",  "foods",
                                         "eat",  "eats",  "eating", "run",    "runs",  "running",
                                         "cat",  "cats",  "tasty",  "served", "serve", "serves"};

oracle::Tokens random_tokens(std::mt19937_64& rng, std::size_t max_len = 12) {
  oracle::Tokens t(1 + rng() % max_len);
  for (auto& w : t) w = kVocab[rng() % kVocab.size()];
  return t;
}

// Embeds through a fixed table so the oracle can see the same vectors.
class TableEmbedder : public EmbeddingProvider {
 public:
  std::vector<std::vector<double>> embed(const std::vector<std::string>& tokens) override {
    std::vector<std::vector<double>> out;
    for (const auto& t : tokens) out.push_back(vec(t));
    return out;
  }
  std::string name() const override { return "table"; }
  static std::vector<double> vec(const std::string& t) {
    std::mt19937_64 g(std::hash<std::string>{}(t));
    std::vector<double> v(8);
    for (auto& x : v) x = double(g() % 2001) / 1000.0 - 1.0;
    v[0] += 0.01;  // never all-zero
    return v;
  }
};

// Maps "x<i>" to the i-th standard basis vector.
class OrthoEmbedder : public EmbeddingProvider {
 public:
  std::vector<std::vector<double>> embed(const std::vector<std::string>& tokens) override {
    std::vector<std::vector<double>> out;
    for (const auto& t : tokens) {
      std::vector<double> v(16, 0.0);
      v[std::stoi(t.substr(1))] = 1.0;
      out.push_back(v);
    }
    return out;
  }
  std::string name() const override { return "ortho"; }
};

}  // namespace

TEST(Tokenize, Modes) {
  EXPECT_EQ(tokenize("Great pizza!").tokens, (std::vector<std::string>{"great", "pizza!"}));
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_EQ(tokenize("abc", TokenMode::char_bigram).tokens, (std::vector<std::string>{"ab", "bc"}));
  EXPECT_EQ(tokenize("맛 있어", TokenMode::char_bigram).tokens,
            (std::vector<std::string>{"맛있", "있어"}));
}

TEST(Rouge2, Fixtures) {
  EXPECT_DOUBLE_EQ(rouge2(T({"a", "b", "c", "d"}), T({"a", "b", "c", "d"})), 1.0);
  EXPECT_NEAR(rouge2(T({"a", "b", "c"}), T({"a", "b", "c", "d"})), 0.8, 1e-12);
  EXPECT_EQ(rouge2(T({"a"}), T({"a", "b"})), 0.0);
  EXPECT_THROW(rouge2(T({"a", "b"}), make_tokens({"ab"}, TokenMode::char_bigram)), ValidationError);
}

TEST(Bleu, Fixtures) {
  EXPECT_NEAR(bleu(T({"a", "b", "c", "d", "e"}), T({"a", "b", "c", "d", "e"})), 1.0, 1e-12);
  EXPECT_NEAR(bleu(T({"a", "b", "c", "d"}), T({"a", "b", "c", "d", "e"})), std::exp(1.0 - 5.0 / 4.0), 1e-12);
  EXPECT_NEAR(bleu(T({"a", "b", "c", "d"}), T({"a", "b", "c", "d", "e"})), 0.7788, 1e-4);
  EXPECT_EQ(bleu(T({"x", "y"}), T({"a", "b"})), 0.0);
  auto a = T({"the", "good", "pizza", "was", "served"});
  auto b = T({"the", "good", "pizza"});
  EXPECT_NE(bleu(a, b), bleu(b, a));
}

TEST(Meteor, Fixtures) {
  EXPECT_NEAR(meteor(T({"good", "pizza"}), T({"good", "pizza"})), 0.9375, 1e-12);
  EXPECT_EQ(meteor(T({"x"}), T({"y"})), 0.0);
  EXPECT_NEAR(meteor(T({"the", "cat", "sat"}), T({"cat", "the", "sat"})), 0.5, 1e-12);
  auto al = meteor_align(T({"cats", "running"}), T({"run", "cat"}));
  EXPECT_EQ(al.matches, 2u);
  EXPECT_EQ(al.chunks, 2u);
  EXPECT_THROW(meteor(make_tokens({"ab"}, TokenMode::char_bigram), make_tokens({"ab"}, TokenMode::char_bigram)),
               ValidationError);
}

TEST(Distinct2, Fixtures) {
  std::vector<TokenSequence> one{T({"great", "food", "great", "food"})};
  EXPECT_DOUBLE_EQ(distinct2(one).distinct2, 0.5);
  std::vector<TokenSequence> four{T({"a", "b", "c", "d"})};
  EXPECT_DOUBLE_EQ(distinct2(four).distinct2, 0.75);
  std::vector<TokenSequence> single{T({"a"})};
  EXPECT_DOUBLE_EQ(distinct2(single).distinct2, 0.0);
  EXPECT_DOUBLE_EQ(distinct2(std::vector<TokenSequence>{}).distinct2, 0.0);
}

TEST(Distinct2, AppendingSeenBigramsNeverIncreases) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<TokenSequence> rs;
    for (int i = 0; i < 4; ++i) rs.push_back(T(random_tokens(rng)));
    double before = distinct2(rs).distinct2;
    rs.push_back(rs[rng() % rs.size()]);
    EXPECT_LE(distinct2(rs).distinct2, before + 1e-15);
  }
}

TEST(BertScore, Fixtures) {
  EXPECT_NEAR(bertscore_from_cosines({{1, 0}, {0, 0.5}}), 0.75, 1e-12);
  OrthoEmbedder ortho;
  EXPECT_EQ(bertscore_f1(T({"x1", "x2"}), T({"x3", "x4", "x5"}), ortho), 0.0);
  HashEmbedder h;
  auto a = tokenize("the soup was warm and lovely");
  EXPECT_NEAR(bertscore_f1(a, a, h), 1.0, 1e-9);
  EXPECT_THROW(bertscore_f1(T({}), a, h), ValidationError);
  class Zero : public EmbeddingProvider {
   public:
    std::vector<std::vector<double>> embed(const std::vector<std::string>& t) override {
      return std::vector<std::vector<double>>(t.size(), std::vector<double>(4, 0.0));
    }
    std::string name() const override { return "zero"; }
  } zero;
  EXPECT_THROW(bertscore_f1(a, a, zero), ValidationError);
}

TEST(Oracle, RandomPairsAgree) {
  std::mt19937_64 rng(42);
  TableEmbedder emb;
  for (int i = 0; i < 200; ++i) {
    auto c = random_tokens(rng), r = random_tokens(rng);
    EXPECT_NEAR(rouge2(T(c), T(r)), oracle::rouge2(c, r), 1e-9);
    EXPECT_NEAR(bleu(T(c), T(r)), oracle::bleu(c, r), 1e-9);
    EXPECT_NEAR(meteor(T(c), T(r)), oracle::meteor(c, r), 1e-9);
    std::vector<std::vector<double>> cv, rv;
    for (auto& t : c) cv.push_back(TableEmbedder::vec(t));
    for (auto& t : r) rv.push_back(TableEmbedder::vec(t));
    EXPECT_NEAR(bertscore_f1(T(c), T(r), emb), oracle::bertscore(cv, rv), 1e-9);
    std::vector<TokenSequence> seqs{T(c), T(r)};
    EXPECT_NEAR(distinct2(seqs).distinct2, oracle::distinct2({c, r}), 1e-9);
  }
}

TEST(Ranges, ThousandRandomPairs) {
  std::mt19937_64 rng(99);
  HashEmbedder h;
  for (int i = 0; i < 1000; ++i) {
    auto c = T(random_tokens(rng)), r = T(random_tokens(rng));
    for (double v : {rouge2(c, r), bleu(c, r), meteor(c, r)}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0 + 1e-12);
    }
    double b = bertscore_f1(c, r, h);
    EXPECT_GE(b, -1.0);
    EXPECT_LE(b, 1.0 + 1e-12);
    if (c.size() >= 4) {
      EXPECT_NEAR(rouge2(c, c), 1.0, 1e-12);
      EXPECT_NEAR(bleu(c, c), 1.0, 1e-12);
    }
  }
}

TEST(Porter, ReferencePairs) {
  const std::pair<const char*, const char*> pairs[] = {
      {"caresses", "caress"},   {"ponies", "poni"},         {"ties", "ti"},
      {"cats", "cat"},          {"feed", "feed"},           {"agreed", "agre"},
      {"plastered", "plaster"}, {"bled", "bled"},           {"motoring", "motor"},
      {"sing", "sing"},         {"conflated", "conflat"},   {"troubled", "troubl"},
      {"sized", "size"},        {"hopping", "hop"},         {"tanned", "tan"},
      {"falling", "fall"},      {"hissing", "hiss"},        {"fizzed", "fizz"},
      {"failing", "fail"},      {"filing", "file"},         {"happy", "happi"},
      {"sky", "sky"},           {"relational", "relat"},    {"conditional", "condit"},
      {"rational", "ration"},   {"digitizer", "digit"},     {"operator", "oper"},
      {"feudalism", "feudal"},  {"decisiveness", "decis"},  {"hopefulness", "hope"},
      {"callousness", "callous"}, {"formaliti", "formal"},  {"sensitiviti", "sensit"},
      {"triplicate", "triplic"}, {"formative", "form"},     {"formalize", "formal"},
      {"electrical", "electr"}, {"hopeful", "hope"},        {"goodness", "good"},
      {"revival", "reviv"},     {"allowance", "allow"},     {"inference", "infer"},
      {"airliner", "airlin"},   {"adjustable", "adjust"},   {"defensible", "defens"},
      {"replacement", "replac"}, {"adjustment", "adjust"},  {"dependent", "depend"},
      {"adoption", "adopt"},    {"communism", "commun"},    {"activate", "activ"},
      {"effective", "effect"},  {"bowdlerize", "bowdler"},  {"probate", "probat"},
      {"rate", "rate"},         {"cease", "ceas"},          {"controll", "control"},
      {"roll", "roll"},         {"generalizations", "gener"}, {"oscillators", "oscil"},
      {"running", "run"},       {"eating", "eat"},          {"tasty", "tasti"},
      {"served", "serv"},       {"serves", "serv"},         {"serve", "serv"},
      {"is", "is"},             {"the", "the"}};
  for (auto [w, s] : pairs) EXPECT_EQ(porter_stem(w), s) << w;
  EXPECT_EQ(porter_stem("맛있는"), "맛있는");
}

TEST(EvaluateArm, IdentityAndErrors) {
  corpus::RawReview raw{"r1", "n", "m", "a", "2024-01-01T00:00:00Z", 5, "the noodles were hot and fresh", {}};
  auto review = corpus::Review::from_raw(raw);
  generator::GeneratedResponse resp;
  resp.text = review.text;
  resp.request.review = review;
  resp.response_tokens = tokenize(resp.text).tokens;
  HashEmbedder h;
  std::vector<generator::GeneratedResponse> rs{resp};
  std::vector<corpus::Review> refs{review};
  auto ev = evaluate_arm(rs, refs, h);
  EXPECT_NEAR(ev.scores.rouge2_f, 1.0, 1e-12);
  EXPECT_NEAR(ev.scores.bleu, 1.0, 1e-12);
  EXPECT_LT(ev.scores.meteor, 1.0);
  EXPECT_NEAR(ev.scores.bertscore_f1, 1.0, 1e-9);
  EXPECT_EQ(ev.n, 1u);
  EXPECT_THROW(evaluate_arm({}, refs, h), ValidationError);
  auto other = review;
  other.review_id = "r2";
  std::vector<corpus::Review> wrong{other};
  EXPECT_THROW(evaluate_arm(rs, wrong, h), ValidationError);
}
