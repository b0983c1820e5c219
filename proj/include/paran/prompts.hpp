#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

// Prompt templates and the small amount of syntax shared between prompt
// builders and the mock provider.
namespace paran::prompts {

inline constexpr std::string_view kExplicitTaskMarker = "TASK: explicit-persona-extraction";
inline constexpr std::string_view kImplicitTaskMarker = "TASK: implicit-persona-inference";
inline constexpr std::string_view kReplyTaskMarker = "TASK: merchant-reply";

inline constexpr std::string_view kReviewOpen = "<review>";
inline constexpr std::string_view kReviewClose = "</review>";

// Placeholders use {{name}}. Rendering is single-pass: substituted values
// are never rescanned, so review text cannot inject placeholders.
struct PromptTemplates {
  std::string explicit_extraction;  // {{factors}} {{review}}
  std::string implicit_extraction;  // {{review}}
  std::string generation;           // {{explicit_block}} {{implicit_block}} {{review}}
  std::string explicit_block;       // {{lines}}
  std::string implicit_block;       // {{lines}}

  static const PromptTemplates& defaults();
  // Reads the five template files from `dir`; missing files keep defaults.
  static PromptTemplates load(const std::filesystem::path& dir);
};

inline constexpr std::string_view kExplicitFile = "explicit_persona.txt";
inline constexpr std::string_view kImplicitFile = "implicit_persona.txt";
inline constexpr std::string_view kGenerationFile = "reply.txt";
inline constexpr std::string_view kExplicitBlockFile = "explicit_block.txt";
inline constexpr std::string_view kImplicitBlockFile = "implicit_block.txt";

// Throws ValidationError for a placeholder without a value.
std::string render(std::string_view tmpl, const std::map<std::string, std::string>& vars);

// Wraps review text in <review> delimiters; an embedded closing delimiter
// is escaped so the block stays unambiguous.
std::string embed_review(std::string_view review_text);
// Inverse of embed_review over a whole prompt.
std::optional<std::string> extract_review(std::string_view prompt);

}  // namespace paran::prompts
