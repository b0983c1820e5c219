#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "paran/corpus.hpp"
#include "paran/llm_gateway.hpp"
#include "paran/metrics.hpp"
#include "paran/persona.hpp"
#include "paran/prompts.hpp"

// Stage two: persona-conditioned reply generation. The request carries
// every conditioning input (review, both personas, temperature, model);
// token-level decoding is left to the provider.
namespace paran::generator {

enum class Arm { paran, explicit_only, implicit_only, none };

const std::array<Arm, 4>& all_arms();
std::string_view to_string(Arm a);
Arm arm_from_string(std::string_view s);
// Row labels used in ablation tables.
std::string_view display_name(Arm a);
bool uses_explicit(Arm a);
bool uses_implicit(Arm a);

struct GenerationRequest {
  corpus::Review review;
  std::optional<persona::ExplicitPersona> explicit_persona;
  std::optional<persona::ImplicitPersona> implicit_persona;
  Arm arm = Arm::paran;
  llm::ModelId model;
  llm::DecodingParams params;

  // Each persona is present exactly when the arm uses it.
  void validate() const;
};

// Copies from the bundle only the personas the arm uses.
GenerationRequest make_request(const corpus::Review& review, const persona::PersonaBundle* bundle,
                               Arm arm, const llm::ModelId& model,
                               const llm::DecodingParams& params);

struct GeneratorOptions {
  metrics::TokenMode tokenizer = metrics::TokenMode::whitespace;
  std::string system = "You write replies to customer reviews on behalf of a restaurant.";
  const prompts::PromptTemplates* templates = nullptr;  // defaults when null
};

struct GeneratedResponse {
  std::string text;
  GenerationRequest request;
  std::string system;
  std::string prompt;
  std::vector<std::string> response_tokens;
  metrics::TokenMode tokenizer = metrics::TokenMode::whitespace;
};

// Only mentioned attributes, one "- name (polarity): "evidence"" line each.
std::string explicit_lines(const persona::ExplicitPersona& p);
// Only fields that are not unknown, one "- field: value (confidence c)" line each.
std::string implicit_lines(const persona::ImplicitPersona& p);

std::string assemble_prompt(const GenerationRequest& req,
                            const prompts::PromptTemplates& t = prompts::PromptTemplates::defaults());

GeneratedResponse generate(const GenerationRequest& req, llm::Gateway& gateway,
                           const GeneratorOptions& opts = {});

nlohmann::json to_json(const GenerationRequest& r);
GenerationRequest request_from_json(const nlohmann::json& j);
nlohmann::json to_json(const GeneratedResponse& r);
GeneratedResponse response_from_json(const nlohmann::json& j);

std::vector<GeneratedResponse> load_responses(const std::string& path);
void save_responses(const std::vector<GeneratedResponse>& responses, const std::string& path);

}  // namespace paran::generator
