#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "paran/corpus.hpp"
#include "paran/error.hpp"
#include "paran/llm_gateway.hpp"
#include "paran/prompts.hpp"

// Stage one: extract the explicit persona and infer the implicit persona
// of a single review through two prompted LLM calls.
namespace paran::persona {

// To add a factor: extend the enum, kFactorCount and the table in persona.cpp.
enum class Factor {
  food_taste,
  portion_size,
  freshness,
  menu_diversity,
  price,
  service_satisfaction,
  delivery_experience,
  trust,
  friendliness,
  prior_review_reference,
  rating_alignment,
  cleanliness,
  loyalty,
  social_context,
  temporal_event,
};
inline constexpr std::size_t kFactorCount = 15;

const std::array<Factor, kFactorCount>& all_factors();
std::string_view to_string(Factor f);
std::optional<Factor> factor_from_string(std::string_view s);
std::string_view describe(Factor f);

enum class Polarity { positive, negative, mixed, neutral };
std::string_view to_string(Polarity p);
std::optional<Polarity> polarity_from_string(std::string_view s);

struct ExplicitAttribute {
  Factor name = Factor::food_taste;
  bool mentioned = false;
  Polarity polarity = Polarity::neutral;  // meaningful only when mentioned
  std::string evidence;                   // verbatim span of the review, or empty

  friend bool operator==(const ExplicitAttribute&, const ExplicitAttribute&) = default;
};

struct ExplicitPersona {
  std::array<ExplicitAttribute, kFactorCount> attributes;
  std::string source_review_id;

  ExplicitPersona();
  const ExplicitAttribute& at(Factor f) const;
  ExplicitAttribute& at(Factor f);
  std::size_t mentioned_count() const;

  friend bool operator==(const ExplicitPersona&, const ExplicitPersona&) = default;
};

enum class Gender { female, male, unknown };
enum class AgeGroup { teens, twenties, thirties, forties, fifties_plus, unknown };
std::string_view to_string(Gender g);
std::string_view to_string(AgeGroup a);

struct ImplicitConfidence {
  double gender = 0.5;
  double age_group = 0.5;
  double tone = 0.5;
  double dietary_preference = 0.5;
  double lifestyle = 0.5;
  double sentiment = 0.5;

  friend bool operator==(const ImplicitConfidence&, const ImplicitConfidence&) = default;
};

inline constexpr std::string_view kUnknown = "unknown";

struct ImplicitPersona {
  Gender gender = Gender::unknown;
  AgeGroup age_group = AgeGroup::unknown;
  std::string tone{kUnknown};
  std::string dietary_preference{kUnknown};
  std::string lifestyle{kUnknown};
  Polarity sentiment = Polarity::neutral;
  ImplicitConfidence confidence;

  friend bool operator==(const ImplicitPersona&, const ImplicitPersona&) = default;
};

// The six implicit field names, in prompt order.
const std::array<std::string_view, 6>& implicit_fields();

template <typename T>
struct Parsed {
  T value;
  std::vector<std::string> warnings;
};

struct PersonaBundle {
  std::string review_id;
  ExplicitPersona explicit_persona;
  ImplicitPersona implicit_persona;
  llm::ModelId extraction_model;
  std::string raw_explicit;
  std::string raw_implicit;
  std::vector<std::string> warnings;

  friend bool operator==(const PersonaBundle&, const PersonaBundle&) = default;
};

std::string build_explicit_prompt(const corpus::Review& r,
                                  const prompts::PromptTemplates& t = prompts::PromptTemplates::defaults());
std::string build_implicit_prompt(const corpus::Review& r,
                                  const prompts::PromptTemplates& t = prompts::PromptTemplates::defaults());

// Removes a surrounding ``` fence (with optional language tag) and any prose
// outside the outermost JSON object.
std::string strip_fencing(std::string_view raw);

// Throws ValidationError when no JSON object can be parsed.
Parsed<ExplicitPersona> parse_explicit(std::string_view raw, const corpus::Review& source);
Parsed<ImplicitPersona> parse_implicit(std::string_view raw);

// Wire forms; identical to what the extraction prompts ask the model for.
nlohmann::json to_json(const ExplicitPersona& p);
nlohmann::json to_json(const ImplicitPersona& p);
nlohmann::json to_json(const PersonaBundle& b);
PersonaBundle bundle_from_json(const nlohmann::json& j);
// Reads the wire forms back without the evidence-substring check.
ExplicitPersona explicit_from_json(const nlohmann::json& j, const std::string& source_review_id);
ImplicitPersona implicit_from_json(const nlohmann::json& j);

enum class Stage { explicit_extraction, implicit_inference };
std::string_view to_string(Stage s);

// Wraps the failure of one stage; exit code follows the underlying error.
class StageError : public Error {
 public:
  StageError(Stage stage, const Error& cause)
      : Error(cause.kind(), std::string(to_string(stage)) + " stage failed: " + cause.what()),
        stage_(stage) {}
  Stage stage() const noexcept { return stage_; }

 private:
  Stage stage_;
};

struct ExtractionOptions {
  double temperature = 0.0;
  int max_tokens = 512;
  std::string system = "You are a careful annotator. Answer with JSON only.";
  const prompts::PromptTemplates* templates = nullptr;  // defaults when null
};

// Explicit stage first, then implicit; a failure in the first stage
// prevents the second call.
PersonaBundle infer_personas(const corpus::Review& r, const llm::ModelId& model,
                             llm::Gateway& gateway, const ExtractionOptions& opts = {});

std::map<std::string, PersonaBundle> load_personas(const std::string& path);
void save_personas(const std::vector<PersonaBundle>& bundles, const std::string& path);

}  // namespace paran::persona
