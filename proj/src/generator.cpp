#include "paran/generator.hpp"

#include <cstdio>
#include <sstream>

#include "paran/text.hpp"

namespace paran::generator {

using nlohmann::json;

namespace {

constexpr std::array<Arm, 4> kArms = {Arm::paran, Arm::explicit_only, Arm::implicit_only,
                                      Arm::none};

std::string confidence_text(double c) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.2f", c);
  return buf;
}

}  // namespace

const std::array<Arm, 4>& all_arms() { return kArms; }

std::string_view to_string(Arm a) {
  switch (a) {
    case Arm::paran: return "paran";
    case Arm::explicit_only: return "explicit_only";
    case Arm::implicit_only: return "implicit_only";
    case Arm::none: return "none";
  }
  return "none";
}

Arm arm_from_string(std::string_view s) {
  for (Arm a : kArms)
    if (to_string(a) == s) return a;
  throw ValidationError("unknown arm \"" + std::string(s) +
                        "\" (expected paran, explicit_only, implicit_only or none)");
}

std::string_view display_name(Arm a) {
  switch (a) {
    case Arm::paran: return "PARAN";
    case Arm::explicit_only: return "w Explicit Persona";
    case Arm::implicit_only: return "w Implicit Persona";
    case Arm::none: return "w/o E&I Persona";
  }
  return "";
}

bool uses_explicit(Arm a) { return a == Arm::paran || a == Arm::explicit_only; }
bool uses_implicit(Arm a) { return a == Arm::paran || a == Arm::implicit_only; }

void GenerationRequest::validate() const {
  if (uses_explicit(arm) != explicit_persona.has_value() ||
      uses_implicit(arm) != implicit_persona.has_value()) {
    throw ValidationError(std::string("arm ") + std::string(to_string(arm)) +
                          " is inconsistent with the personas supplied (explicit " +
                          (explicit_persona ? "present" : "absent") + ", implicit " +
                          (implicit_persona ? "present" : "absent") + ")");
  }
  params.validate();
}

GenerationRequest make_request(const corpus::Review& review, const persona::PersonaBundle* bundle,
                               Arm arm, const llm::ModelId& model,
                               const llm::DecodingParams& params) {
  GenerationRequest req;
  req.review = review;
  req.arm = arm;
  req.model = model;
  req.params = params;
  if (uses_explicit(arm) || uses_implicit(arm)) {
    if (!bundle) throw ValidationError("no persona bundle for review " + review.review_id);
    if (uses_explicit(arm)) req.explicit_persona = bundle->explicit_persona;
    if (uses_implicit(arm)) req.implicit_persona = bundle->implicit_persona;
  }
  return req;
}

std::string explicit_lines(const persona::ExplicitPersona& p) {
  std::string out;
  for (const auto& a : p.attributes) {
    if (!a.mentioned) continue;
    if (!out.empty()) out += '\n';
    out += "- ";
    out += persona::to_string(a.name);
    out += " (";
    out += persona::to_string(a.polarity);
    out += ")";
    if (!a.evidence.empty()) out += ": \"" + a.evidence + "\"";
  }
  return out.empty() ? "- none" : out;
}

std::string implicit_lines(const persona::ImplicitPersona& p) {
  std::string out;
  auto add = [&](std::string_view field, std::string_view value, double confidence) {
    if (value == persona::kUnknown) return;
    if (!out.empty()) out += '\n';
    out += "- ";
    out += field;
    out += ": ";
    out += value;
    out += " (confidence " + confidence_text(confidence) + ")";
  };
  add("gender", persona::to_string(p.gender), p.confidence.gender);
  add("age_group", persona::to_string(p.age_group), p.confidence.age_group);
  add("tone", p.tone, p.confidence.tone);
  add("dietary_preference", p.dietary_preference, p.confidence.dietary_preference);
  add("lifestyle", p.lifestyle, p.confidence.lifestyle);
  add("sentiment", persona::to_string(p.sentiment), p.confidence.sentiment);
  return out.empty() ? "- none" : out;
}

std::string assemble_prompt(const GenerationRequest& req, const prompts::PromptTemplates& t) {
  req.validate();
  if (req.review.text.empty()) throw ValidationError("review " + req.review.review_id + " has empty text");
  std::string explicit_block;
  std::string implicit_block;
  if (req.explicit_persona)
    explicit_block = prompts::render(t.explicit_block, {{"lines", explicit_lines(*req.explicit_persona)}});
  if (req.implicit_persona)
    implicit_block = prompts::render(t.implicit_block, {{"lines", implicit_lines(*req.implicit_persona)}});
  return prompts::render(t.generation, {{"explicit_block", explicit_block},
                                        {"implicit_block", implicit_block},
                                        {"review", prompts::embed_review(req.review.text)}});
}

GeneratedResponse generate(const GenerationRequest& req, llm::Gateway& gateway,
                           const GeneratorOptions& opts) {
  const auto& templates = opts.templates ? *opts.templates : prompts::PromptTemplates::defaults();
  GeneratedResponse out;
  out.request = req;
  out.system = opts.system;
  out.prompt = assemble_prompt(req, templates);
  out.tokenizer = opts.tokenizer;
  const llm::ChatRequest chat{req.model, opts.system, out.prompt, req.params};
  out.text = gateway.complete(chat).text;
  if (text::trim(out.text).empty())
    throw llm::ProviderError(llm::Failure::content,
                             "empty completion for review " + req.review.review_id);
  out.response_tokens = metrics::tokenize(out.text, opts.tokenizer).tokens;
  return out;
}

json to_json(const GenerationRequest& r) {
  return json{{"review", corpus::to_json(r.review)},
              {"explicit", r.explicit_persona ? persona::to_json(*r.explicit_persona) : json(nullptr)},
              {"implicit", r.implicit_persona ? persona::to_json(*r.implicit_persona) : json(nullptr)},
              {"arm", to_string(r.arm)},
              {"model", r.model.str()},
              {"params", llm::to_json(r.params)}};
}

GenerationRequest request_from_json(const json& j) {
  GenerationRequest r;
  try {
    r.review = corpus::review_from_json(j.at("review"));
    if (const auto& e = j.at("explicit"); !e.is_null())
      r.explicit_persona = persona::explicit_from_json(e, r.review.review_id);
    if (const auto& i = j.at("implicit"); !i.is_null())
      r.implicit_persona = persona::implicit_from_json(i);
    r.arm = arm_from_string(j.at("arm").get<std::string>());
    r.model = llm::ModelId::parse(j.at("model").get<std::string>());
    r.params = llm::params_from_json(j.at("params"));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed generation request: ") + e.what());
  }
  return r;
}

json to_json(const GeneratedResponse& r) {
  return json{{"review_id", r.request.review.review_id},
              {"model", r.request.model.str()},
              {"temperature", r.request.params.temperature},
              {"arm", to_string(r.request.arm)},
              {"text", r.text},
              {"tokenizer", metrics::to_string(r.tokenizer)},
              {"response_tokens", r.response_tokens},
              {"system", r.system},
              {"prompt", r.prompt},
              {"request", to_json(r.request)}};
}

GeneratedResponse response_from_json(const json& j) {
  GeneratedResponse r;
  try {
    r.request = request_from_json(j.at("request"));
    r.text = j.at("text").get<std::string>();
    r.tokenizer = metrics::token_mode_from_string(j.value("tokenizer", "whitespace"));
    r.response_tokens = j.at("response_tokens").get<std::vector<std::string>>();
    r.system = j.value("system", "");
    r.prompt = j.at("prompt").get<std::string>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed response record: ") + e.what());
  }
  return r;
}

std::vector<GeneratedResponse> load_responses(const std::string& path) {
  std::vector<GeneratedResponse> out;
  std::istringstream in(text::read_file(path));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(response_from_json(json::parse(line)));
    } catch (const json::parse_error& e) {
      throw ValidationError(path + ": line " + std::to_string(line_no) + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(path + ": line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void save_responses(const std::vector<GeneratedResponse>& responses, const std::string& path) {
  std::string out;
  for (const auto& r : responses) out += to_json(r).dump() + "\n";
  text::write_file_atomic(path, out);
}

}  // namespace paran::generator
