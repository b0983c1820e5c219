#include <algorithm>
#include <cctype>
#include <random>
#include <regex>
#include <sstream>

#include "paran/hash.hpp"
#include "paran/llm_gateway.hpp"
#include "paran/persona.hpp"
#include "paran/prompts.hpp"
#include "paran/text.hpp"

// Routing:
//   explicit-extraction marker -> keyword-spotting explicit persona JSON
//   implicit-inference marker  -> cue-based implicit persona JSON (fenced)
//   merchant-reply marker      -> templated reply echoing the persona lines
//   anything else              -> short acknowledgement
// Temperature only affects replies: each phrase slot keeps its first
// option with probability 1 - temperature, otherwise draws uniformly from
// the slot, using a generator seeded by the request's cache key.
namespace paran::llm {

namespace {

using nlohmann::json;
using persona::Factor;

struct Keywords {
  Factor factor;
  std::vector<std::string_view> words;
};

const std::vector<Keywords>& lexicon() {
  static const std::vector<Keywords> k = {
      {Factor::food_taste, {"taste", "tasty", "delicious", "bland", "flavor", "flavour", "sauce"}},
      {Factor::portion_size, {"portion", "serving"}},
      {Factor::freshness, {"fresh"}},
      {Factor::menu_diversity, {"menu"}},
      {Factor::price, {"price", "value", "expensive", "cheap"}},
      {Factor::service_satisfaction, {"service"}},
      {Factor::delivery_experience, {"delivery", "delivered", "arrived"}},
      {Factor::trust, {"trust"}},
      {Factor::friendliness, {"friendly", "rude", "kind"}},
      {Factor::prior_review_reference, {"reviews"}},
      {Factor::rating_alignment, {"stars", "star"}},
      {Factor::cleanliness, {"clean", "dirty", "hygien"}},
      {Factor::loyalty, {"go-to", "every week", "order again", "regular"}},
      {Factor::social_context, {"friends", "family", "kids", "husband", "wife"}},
      {Factor::temporal_event, {"rainy", "birthday", "holiday", "weekend"}},
  };
  return k;
}

// A trailing '*' allows any continuation; otherwise cues match whole words.
const std::vector<std::string_view> kPositiveCues = {
    "amazing", "delicious", "great", "fresh", "fast",  "friendly", "clean",      "perfect",
    "lov*",    "good",      "huge",  "so many", "trust", "praised", "five stars", "go-to",
    "value",   "hot",       "kindly", "neatly", "comfort", "tasty", "thanks"};
const std::vector<std::string_view> kNegativeCues = {
    "bland", "cold",     "rude",   "dirty",  "too small", "expensive", "disappoint*",
    "wrong", "late",     "let down", "spoil*", "was off", "few",      "sticky",
    "two stars", "hard to", "not", "worse",  "anymore"};

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool contains(std::string_view hay, std::string_view needle) {
  return hay.find(needle) != std::string_view::npos;
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '\''; }

// First occurrence of `cue` starting at a word boundary; see the cue lists
// for the '*' convention.
std::size_t find_cue(std::string_view hay, std::string_view cue) {
  const bool prefix = !cue.empty() && cue.back() == '*';
  if (prefix) cue.remove_suffix(1);
  for (std::size_t pos = hay.find(cue); pos != std::string_view::npos; pos = hay.find(cue, pos + 1)) {
    if (pos > 0 && is_word_char(hay[pos - 1])) continue;
    const std::size_t end = pos + cue.size();
    if (!prefix && end < hay.size() && is_word_char(hay[end])) continue;
    return pos;
  }
  return std::string_view::npos;
}

std::size_t count_cues(std::string_view lowered, const std::vector<std::string_view>& cues) {
  std::size_t n = 0;
  for (auto c : cues)
    if (find_cue(lowered, c) != std::string_view::npos) ++n;
  return n;
}

persona::Polarity polarity_of(std::string_view lowered) {
  const std::size_t pos = count_cues(lowered, kPositiveCues);
  const std::size_t neg = count_cues(lowered, kNegativeCues);
  if (pos && neg) {
    return find_cue(lowered, "not") != std::string_view::npos ? persona::Polarity::negative
                                                              : persona::Polarity::mixed;
  }
  if (neg) return persona::Polarity::negative;
  if (pos) return persona::Polarity::positive;
  return persona::Polarity::neutral;
}

// [begin, end) of the sentence around `pos`, trimmed of spaces.
std::pair<std::size_t, std::size_t> sentence_around(const std::string& s, std::size_t pos) {
  auto is_stop = [](char c) { return c == '.' || c == '!' || c == '?' || c == '\n'; };
  std::size_t begin = pos;
  while (begin > 0 && !is_stop(s[begin - 1])) --begin;
  std::size_t end = pos;
  while (end < s.size() && !is_stop(s[end])) ++end;
  while (begin < end && s[begin] == ' ') ++begin;
  while (end > begin && s[end - 1] == ' ') --end;
  return {begin, end};
}

std::string explicit_reply(const std::string& review) {
  const std::string lowered = lower_ascii(review);
  json out = json::object();
  for (Factor f : persona::all_factors()) {
    out[std::string(persona::to_string(f))] = {
        {"mentioned", false}, {"polarity", "neutral"}, {"evidence", ""}};
  }
  for (const auto& entry : lexicon()) {
    std::size_t hit = std::string::npos;
    for (auto w : entry.words) hit = std::min(hit, find_cue(lowered, std::string(w) + "*"));
    if (hit == std::string::npos) continue;
    const auto [b, e] = sentence_around(review, hit);
    const std::string evidence = review.substr(b, e - b);
    out[std::string(persona::to_string(entry.factor))] = {
        {"mentioned", true},
        {"polarity", persona::to_string(polarity_of(lower_ascii(evidence)))},
        {"evidence", evidence}};
  }
  return out.dump(2);
}

std::string implicit_reply(const std::string& review) {
  const std::string l = lower_ascii(review);
  json out{{"gender", "unknown"},          {"gender_confidence", 0.3},
           {"age_group", "unknown"},       {"age_group_confidence", 0.3},
           {"tone", "unknown"},            {"tone_confidence", 0.3},
           {"dietary_preference", "unknown"}, {"dietary_preference_confidence", 0.3},
           {"lifestyle", "unknown"},       {"lifestyle_confidence", 0.3},
           {"sentiment", "neutral"},       {"sentiment_confidence", 0.5}};
  auto set = [&](const char* field, const char* value, double confidence) {
    out[field] = value;
    out[std::string(field) + "_confidence"] = confidence;
  };
  if (contains(l, "my husband")) set("gender", "female", 0.7);
  else if (contains(l, "my wife")) set("gender", "male", 0.7);

  if (contains(l, "college") || contains(l, "student")) set("age_group", "20s", 0.7);
  else if (contains(l, "retire")) set("age_group", "50s_plus", 0.7);
  else if (contains(l, "kids")) set("age_group", "30s", 0.5);
  else if (contains(l, " lol")) set("age_group", "20s", 0.4);

  if (contains(l, "!!")) set("tone", "enthusiastic", 0.8);
  else if (contains(l, "^^")) set("tone", "cheerful", 0.7);
  else if (contains(l, " lol")) set("tone", "casual", 0.7);
  else if (contains(l, "honestly")) set("tone", "candid", 0.6);

  if (contains(l, "spicy")) set("dietary_preference", "spicy food lover", 0.6);
  else if (contains(l, "vegetables")) set("dietary_preference", "vegetable lover", 0.4);

  if (contains(l, "student")) set("lifestyle", "student", 0.8);
  else if (contains(l, "office") || contains(l, "shift")) set("lifestyle", "office worker", 0.6);
  else if (contains(l, "kids")) set("lifestyle", "parent", 0.7);
  else if (contains(l, "retire")) set("lifestyle", "retiree", 0.7);

  switch (polarity_of(l)) {
    case persona::Polarity::positive: set("sentiment", "positive", 0.8); break;
    case persona::Polarity::negative: set("sentiment", "negative", 0.8); break;
    case persona::Polarity::mixed: set("sentiment", "mixed", 0.6); break;
    case persona::Polarity::neutral: break;
  }
  return "```json\n" + out.dump(2) + "\n```";
}

class PhraseDraw {
 public:
  PhraseDraw(std::uint64_t seed, double temperature) : rng_(seed), temperature_(temperature) {}

  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

  template <std::size_t N>
  std::string_view pick(const std::array<std::string_view, N>& options) {
    if (temperature_ <= 0.0) return options[0];
    if (uniform() >= temperature_) return options[0];
    return options[static_cast<std::size_t>(rng_() % N)];
  }

  bool chance(double p) { return temperature_ > 0.0 && uniform() < p; }
  double temperature() const { return temperature_; }

 private:
  std::mt19937_64 rng_;
  double temperature_;
};

constexpr std::array<std::string_view, 8> kGreetings = {
    "Thank you for your review",
    "Thanks so much for taking the time to write to us",
    "We really appreciate your honest feedback",
    "Hello and thank you for ordering from our kitchen",
    "Reading your note genuinely made our day",
    "Thank you for choosing our little restaurant",
    "We are grateful you shared your experience",
    "Your message means a lot to the whole team",
};
constexpr std::array<std::string_view, 6> kPositiveEcho = {
    "We are so glad to hear that {x}",
    "It means a lot that {x}",
    "Our cooks will be thrilled that {x}",
    "Nothing makes us happier than knowing {x}",
    "We smiled reading that {x}",
    "It is wonderful news that {x}",
};
constexpr std::array<std::string_view, 6> kNegativeEcho = {
    "We are sorry that {x}",
    "Please accept our apology because {x}",
    "We feel terrible that {x}",
    "It is on us that {x}",
    "We regret hearing that {x}",
    "We are working on it since {x}",
};
constexpr std::array<std::string_view, 6> kNeutralEcho = {
    "Thank you for mentioning that {x}",
    "We noted that {x}",
    "We hear you on the point that {x}",
    "It helps us to know that {x}",
    "We appreciate the remark that {x}",
    "Good to learn that {x}",
};
constexpr std::array<std::string_view, 6> kSnippetEcho = {
    "You mentioned that {x}",
    "We read that {x}",
    "We took note that {x}",
    "It caught our eye that {x}",
    "We heard you when you wrote that {x}",
    "Your words that {x} stay with us",
};
constexpr std::array<std::string_view, 6> kToneLines = {
    "We loved the {x} spirit of your message",
    "Your {x} words brightened our kitchen",
    "That {x} energy is contagious",
    "We could feel how {x} you were",
    "Thanks for the {x} vibe",
    "Such a {x} note deserves a reply",
};
constexpr std::array<std::string_view, 6> kLifestyleLines = {
    "We hope it suited your days as a {x}",
    "Cooking for a {x} like you is a joy",
    "Every {x} deserves a good meal",
    "We know life as a {x} is busy",
    "A {x} needs proper fuel",
    "We keep a {x} like you in mind",
};
constexpr std::array<std::string_view, 6> kApologyLines = {
    "We will do better next time",
    "Please give us another chance",
    "We are already fixing this",
    "The team has taken this to heart",
    "Next order will show our improvement",
    "Let us make it right soon",
};
constexpr std::array<std::string_view, 8> kClosings = {
    "We hope to serve you again soon",
    "See you next time",
    "Please visit us again",
    "Looking forward to your next order",
    "Take care and enjoy your day",
    "Stay healthy and come back soon",
    "We will keep cooking with care",
    "Have a wonderful week",
};
constexpr std::array<std::string_view, 6> kAdverbs = {"truly", "really", "honestly",
                                                      "sincerely", "warmly", "genuinely"};

std::string_view factor_label(Factor f) {
  switch (f) {
    case Factor::food_taste: return "the taste";
    case Factor::portion_size: return "the portion";
    case Factor::freshness: return "the freshness";
    case Factor::menu_diversity: return "our menu";
    case Factor::price: return "the price";
    case Factor::service_satisfaction: return "our service";
    case Factor::delivery_experience: return "the delivery";
    case Factor::trust: return "your trust";
    case Factor::friendliness: return "our staff";
    case Factor::prior_review_reference: return "the other reviews";
    case Factor::rating_alignment: return "your rating";
    case Factor::cleanliness: return "the packaging";
    case Factor::loyalty: return "your visits";
    case Factor::social_context: return "your get-together";
    case Factor::temporal_event: return "the occasion";
  }
  return "your order";
}

std::string fill(std::string_view tmpl, std::string_view x) {
  std::string out(tmpl);
  const auto pos = out.find("{x}");
  if (pos != std::string::npos) out.replace(pos, 3, x);
  return out;
}

// Lowercases the first character and drops trailing punctuation.
std::string as_clause(std::string s) {
  while (!s.empty() && std::ispunct(static_cast<unsigned char>(s.back())) && s.back() != ')')
    s.pop_back();
  if (!s.empty() && s[0] >= 'A' && s[0] <= 'Z' && !(s.size() > 1 && s[1] == ' ' && s[0] == 'I'))
    s[0] = static_cast<char>(s[0] - 'A' + 'a');
  return s;
}

std::string first_words(const std::string& s, std::size_t n) {
  const auto words = text::split_whitespace(s);
  std::string out;
  for (std::size_t i = 0; i < words.size() && i < n; ++i) {
    if (i) out += ' ';
    out += words[i];
  }
  return out;
}

struct ExplicitLine {
  Factor factor;
  persona::Polarity polarity;
  std::string evidence;
};

std::string reply_text(const ChatRequest& req, std::uint64_t seed) {
  static const std::regex explicit_re(R"(^- ([a-z_]+) \((positive|negative|mixed|neutral)\)(?:: \"(.*)\")?$)");
  static const std::regex implicit_re(
      R"(^- (gender|age_group|tone|dietary_preference|lifestyle|sentiment): (.*) \(confidence [0-9.]+\)$)");

  const std::string review = prompts::extract_review(req.user).value_or("");
  std::vector<ExplicitLine> explicit_lines;
  std::map<std::string, std::string> implicit;
  {
    std::istringstream in(req.user);
    std::string line;
    std::smatch m;
    while (std::getline(in, line)) {
      if (std::regex_match(line, m, explicit_re)) {
        if (auto f = persona::factor_from_string(m[1].str()))
          explicit_lines.push_back(
              {*f, *persona::polarity_from_string(m[2].str()), m[3].matched ? m[3].str() : ""});
      } else if (std::regex_match(line, m, implicit_re)) {
        implicit[m[1].str()] = m[2].str();
      }
    }
  }

  PhraseDraw draw(seed, req.params.temperature);
  const double t = req.params.temperature;
  std::vector<std::string> sentences;
  sentences.emplace_back(draw.pick(kGreetings));

  if (explicit_lines.empty()) {
    const std::string first_sentence = review.substr(0, review.find_first_of(".!?\n"));
    sentences.push_back(fill(draw.pick(kSnippetEcho), as_clause(first_words(first_sentence, 12))));
  } else {
    std::size_t used = 0;
    for (const auto& line : explicit_lines) {
      if (used++ == 3) break;
      const bool echo = !line.evidence.empty() && !draw.chance(t * 0.5);
      const std::string x = echo ? as_clause(line.evidence) : std::string(factor_label(line.factor)) + " stood out";
      switch (line.polarity) {
        case persona::Polarity::positive: sentences.push_back(fill(draw.pick(kPositiveEcho), x)); break;
        case persona::Polarity::negative: sentences.push_back(fill(draw.pick(kNegativeEcho), x)); break;
        default: sentences.push_back(fill(draw.pick(kNeutralEcho), x)); break;
      }
    }
  }
  if (auto it = implicit.find("tone"); it != implicit.end())
    sentences.push_back(fill(draw.pick(kToneLines), it->second));
  if (auto it = implicit.find("lifestyle"); it != implicit.end())
    sentences.push_back(fill(draw.pick(kLifestyleLines), it->second));
  if (auto it = implicit.find("sentiment"); it != implicit.end() && it->second == "negative")
    sentences.emplace_back(draw.pick(kApologyLines));
  sentences.emplace_back(draw.pick(kClosings));

  std::string out;
  for (auto& s : sentences) {
    if (draw.chance(t * 0.5)) {
      const auto space = s.find(' ');
      if (space != std::string::npos)
        s.insert(space + 1, std::string(draw.pick(kAdverbs)) + " ");
    }
    if (!out.empty()) out += ' ';
    out += s;
    out += '.';
  }
  return out;
}

std::string truncate_words(const std::string& s, int max_tokens) {
  const auto words = text::split_whitespace(s);
  if (static_cast<int>(words.size()) <= max_tokens) return s;
  return first_words(s, static_cast<std::size_t>(max_tokens));
}

}  // namespace

std::string MockProvider::complete(const ChatRequest& req) { return mock_complete(req).text; }

ChatResponse mock_complete(const ChatRequest& req) {
  req.validate();
  if (req.model.provider != Provider::mock)
    throw ValidationError("mock_complete called for provider " + to_string(req.model.provider));
  const std::uint64_t seed = sha256_prefix64(cache_key(req));
  std::string text;
  if (req.user.find(prompts::kExplicitTaskMarker) != std::string::npos) {
    text = explicit_reply(prompts::extract_review(req.user).value_or(""));
  } else if (req.user.find(prompts::kImplicitTaskMarker) != std::string::npos) {
    text = implicit_reply(prompts::extract_review(req.user).value_or(""));
  } else if (req.user.find(prompts::kReplyTaskMarker) != std::string::npos) {
    text = truncate_words(reply_text(req, seed), req.params.max_tokens);
  } else {
    text = truncate_words("ok " + first_words(req.user, 8), req.params.max_tokens);
  }
  ChatResponse resp;
  resp.text = std::move(text);
  resp.model = req.model;
  resp.params = req.params;
  return resp;
}

}  // namespace paran::llm
