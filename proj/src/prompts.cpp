#include "paran/prompts.hpp"

#include "paran/error.hpp"
#include "paran/text.hpp"

namespace paran::prompts {

namespace {

// Keep in sync with templates/*.txt (checked by a unit test).
constexpr std::string_view kDefaultExplicit = R"tmpl(TASK: explicit-persona-extraction
You are analysing a customer review left on a food delivery platform.
Decide which of the following factors the reviewer explicitly mentions:
{{factors}}

For every factor return an entry with:
- "mentioned": true or false
- "polarity": one of "positive", "negative", "mixed", "neutral"
- "evidence": the words copied verbatim from the review that mention the factor, or "" when it is not mentioned

Evidence must be one contiguous span copied character for character from the review. Do not paraphrase or translate it.
Respond with a single JSON object whose keys are the factor names and nothing else.
Example entry: "food_taste": {"mentioned": true, "polarity": "positive", "evidence": "the soup was delicious"}

The review is enclosed between <review> and </review>:
{{review}}
)tmpl";

constexpr std::string_view kDefaultImplicit = R"tmpl(TASK: implicit-persona-inference
You are analysing the writing style of a customer review left on a food delivery platform.
Infer the following traits of the reviewer from linguistic and stylistic cues alone:
- "gender": one of "female", "male", "unknown"
- "age_group": one of "teens", "20s", "30s", "40s", "50s_plus", "unknown"
- "tone": a short label for the tone of voice, for example "enthusiastic" or "formal", or "unknown"
- "dietary_preference": a short label, for example "spicy food lover", or "unknown"
- "lifestyle": a short label, for example "student" or "parent", or "unknown"
- "sentiment": one of "positive", "negative", "mixed", "neutral"

For each trait also give a confidence between 0 and 1 under the key "<trait>_confidence".
Answer "unknown" whenever the review does not contain enough cues; do not guess.
Respond with a single flat JSON object and nothing else.

The review is enclosed between <review> and </review>:
{{review}}
)tmpl";

constexpr std::string_view kDefaultGeneration = R"tmpl(TASK: merchant-reply
You are the owner of a restaurant on a food delivery platform. Write a reply to the customer review below, speaking as the merchant.
{{explicit_block}}{{implicit_block}}
Stay faithful to what the customer actually wrote: respond to the points they raised and do not invent details that are not in the review.
Reply in two to four sentences of plain text.

The review is enclosed between <review> and </review>:
{{review}}
)tmpl";

constexpr std::string_view kDefaultExplicitBlock = R"tmpl(
Points the customer explicitly raised (explicit persona):
{{lines}}
)tmpl";

constexpr std::string_view kDefaultImplicitBlock = R"tmpl(
What the customer's writing suggests about them (implicit persona); adapt your tone accordingly:
{{lines}}
)tmpl";

constexpr std::string_view kEscapedClose = "<\\/review>";

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
  return s;
}

}  // namespace

const PromptTemplates& PromptTemplates::defaults() {
  static const PromptTemplates t{std::string(kDefaultExplicit), std::string(kDefaultImplicit),
                                 std::string(kDefaultGeneration), std::string(kDefaultExplicitBlock),
                                 std::string(kDefaultImplicitBlock)};
  return t;
}

PromptTemplates PromptTemplates::load(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir))
    throw IoError("template directory not found: " + dir.string());
  PromptTemplates t = defaults();
  auto read_if_present = [&](std::string_view name, std::string& slot) {
    const auto path = dir / std::string(name);
    if (std::filesystem::exists(path)) slot = text::read_file(path.string());
  };
  read_if_present(kExplicitFile, t.explicit_extraction);
  read_if_present(kImplicitFile, t.implicit_extraction);
  read_if_present(kGenerationFile, t.generation);
  read_if_present(kExplicitBlockFile, t.explicit_block);
  read_if_present(kImplicitBlockFile, t.implicit_block);
  return t;
}

std::string render(std::string_view tmpl, const std::map<std::string, std::string>& vars) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    const auto open = tmpl.find("{{", pos);
    if (open == std::string_view::npos) {
      out.append(tmpl.substr(pos));
      break;
    }
    const auto close = tmpl.find("}}", open + 2);
    if (close == std::string_view::npos) {
      out.append(tmpl.substr(pos));
      break;
    }
    out.append(tmpl.substr(pos, open - pos));
    const std::string name(tmpl.substr(open + 2, close - open - 2));
    auto it = vars.find(name);
    if (it == vars.end()) throw ValidationError("template placeholder {{" + name + "}} has no value");
    out.append(it->second);
    pos = close + 2;
  }
  return out;
}

std::string embed_review(std::string_view review_text) {
  std::string out(kReviewOpen);
  out += '\n';
  out += replace_all(std::string(review_text), kReviewClose, kEscapedClose);
  out += '\n';
  out += kReviewClose;
  return out;
}

std::optional<std::string> extract_review(std::string_view prompt) {
  // Match the embedded block form so prose mentioning the tags is skipped.
  const std::string open_tag = std::string(kReviewOpen) + '\n';
  const std::string close_tag = '\n' + std::string(kReviewClose);
  const auto open = prompt.find(open_tag);
  if (open == std::string_view::npos) return std::nullopt;
  const auto body = open + open_tag.size();
  const auto close = prompt.find(close_tag, body - 1);
  if (close == std::string_view::npos) return std::nullopt;
  if (close < body) return std::string();
  return replace_all(std::string(prompt.substr(body, close - body)), kEscapedClose, kReviewClose);
}

}  // namespace paran::prompts
