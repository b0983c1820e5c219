#include "paran/persona.hpp"

#include <algorithm>
#include <sstream>

#include "paran/text.hpp"

namespace paran::persona {

using nlohmann::json;

namespace {

struct FactorInfo {
  Factor factor;
  std::string_view name;
  std::string_view description;
};

constexpr std::array<FactorInfo, kFactorCount> kFactors = {{
    {Factor::food_taste, "food_taste", "taste and flavour of the food"},
    {Factor::portion_size, "portion_size", "amount of food received"},
    {Factor::freshness, "freshness", "freshness of the ingredients"},
    {Factor::menu_diversity, "menu_diversity", "variety of the menu"},
    {Factor::price, "price", "price or value for money"},
    {Factor::service_satisfaction, "service_satisfaction", "satisfaction with the service"},
    {Factor::delivery_experience, "delivery_experience", "speed and condition of the delivery"},
    {Factor::trust, "trust", "trust in the merchant"},
    {Factor::friendliness, "friendliness", "friendliness of the staff or rider"},
    {Factor::prior_review_reference, "prior_review_reference", "references to earlier reviews"},
    {Factor::rating_alignment, "rating_alignment", "the star rating the customer mentions"},
    {Factor::cleanliness, "cleanliness", "hygiene and packaging cleanliness"},
    {Factor::loyalty, "loyalty", "repeat ordering or intent to return"},
    {Factor::social_context, "social_context", "who the customer ate with"},
    {Factor::temporal_event, "temporal_event", "occasion, weather or time of the order"},
}};

constexpr std::array<std::string_view, 6> kImplicitFields = {
    "gender", "age_group", "tone", "dietary_preference", "lifestyle", "sentiment"};

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::optional<Gender> gender_from_string(std::string_view s) {
  if (s == "female") return Gender::female;
  if (s == "male") return Gender::male;
  if (s == "unknown") return Gender::unknown;
  return std::nullopt;
}

std::optional<AgeGroup> age_from_string(std::string_view s) {
  if (s == "teens") return AgeGroup::teens;
  if (s == "20s") return AgeGroup::twenties;
  if (s == "30s") return AgeGroup::thirties;
  if (s == "40s") return AgeGroup::forties;
  if (s == "50s_plus") return AgeGroup::fifties_plus;
  if (s == "unknown") return AgeGroup::unknown;
  return std::nullopt;
}

std::string render_factor_list() {
  std::string out;
  for (const auto& f : kFactors) {
    if (!out.empty()) out += '\n';
    out += "- ";
    out += f.name;
    out += ": ";
    out += f.description;
  }
  return out;
}

const prompts::PromptTemplates& pick(const prompts::PromptTemplates* t) {
  return t ? *t : prompts::PromptTemplates::defaults();
}

json parse_object(std::string_view raw) {
  const std::string body = strip_fencing(raw);
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("unparseable persona object: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("persona output is not a JSON object");
  return j;
}

bool read_bool(const json& v, bool& out) {
  if (v.is_boolean()) {
    out = v.get<bool>();
    return true;
  }
  if (v.is_string()) {
    const std::string s = lower_ascii(v.get<std::string>());
    if (s == "true" || s == "yes") return out = true, true;
    if (s == "false" || s == "no") return out = false, true;
  }
  return false;
}

// Free-text implicit fields: trimmed, empty or any casing of "unknown" maps to unknown.
std::string read_label(const json& v, std::string_view field, std::vector<std::string>& warnings) {
  if (v.is_null()) return std::string(kUnknown);
  if (!v.is_string()) {
    warnings.push_back(std::string(field) + ": expected a string, using unknown");
    return std::string(kUnknown);
  }
  std::string s = text::trim(v.get<std::string>());
  if (s.empty() || lower_ascii(s) == kUnknown) return std::string(kUnknown);
  return s;
}

ExplicitPersona explicit_from_wire(const json& j, std::vector<std::string>* warnings,
                                   const std::string* source_text) {
  ExplicitPersona p;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto factor = factor_from_string(it.key());
    if (!factor) {
      if (warnings) warnings->push_back("unknown factor \"" + it.key() + "\" ignored");
      continue;
    }
    ExplicitAttribute& attr = p.at(*factor);
    const json& v = it.value();
    if (!v.is_object()) {
      if (warnings) warnings->push_back(it.key() + ": entry is not an object, treated as not mentioned");
      continue;
    }
    bool mentioned = false;
    if (auto m = v.find("mentioned"); m != v.end() && !read_bool(*m, mentioned) && warnings)
      warnings->push_back(it.key() + ": unreadable \"mentioned\", treated as false");
    std::string evidence;
    if (auto e = v.find("evidence"); e != v.end() && e->is_string()) evidence = e->get<std::string>();
    if (!mentioned) continue;

    Polarity polarity = Polarity::neutral;
    if (auto pv = v.find("polarity"); pv != v.end()) {
      const auto parsed = pv->is_string() ? polarity_from_string(lower_ascii(pv->get<std::string>()))
                                          : std::nullopt;
      if (parsed) {
        polarity = *parsed;
      } else if (warnings) {
        warnings->push_back(it.key() + ": polarity " + pv->dump() + " not in vocabulary, using neutral");
      }
    }
    if (source_text && !evidence.empty() && source_text->find(evidence) == std::string::npos) {
      if (warnings)
        warnings->push_back(it.key() + ": evidence \"" + evidence +
                            "\" is not a verbatim span of the review; marked not mentioned");
      continue;
    }
    attr.mentioned = true;
    attr.polarity = polarity;
    attr.evidence = std::move(evidence);
  }
  return p;
}

}  // namespace

const std::array<Factor, kFactorCount>& all_factors() {
  static const std::array<Factor, kFactorCount> factors = [] {
    std::array<Factor, kFactorCount> out{};
    for (std::size_t i = 0; i < kFactorCount; ++i) out[i] = kFactors[i].factor;
    return out;
  }();
  return factors;
}

std::string_view to_string(Factor f) { return kFactors[static_cast<std::size_t>(f)].name; }

std::optional<Factor> factor_from_string(std::string_view s) {
  for (const auto& f : kFactors)
    if (f.name == s) return f.factor;
  return std::nullopt;
}

std::string_view describe(Factor f) { return kFactors[static_cast<std::size_t>(f)].description; }

std::string_view to_string(Polarity p) {
  switch (p) {
    case Polarity::positive: return "positive";
    case Polarity::negative: return "negative";
    case Polarity::mixed: return "mixed";
    case Polarity::neutral: return "neutral";
  }
  return "neutral";
}

std::optional<Polarity> polarity_from_string(std::string_view s) {
  if (s == "positive") return Polarity::positive;
  if (s == "negative") return Polarity::negative;
  if (s == "mixed") return Polarity::mixed;
  if (s == "neutral") return Polarity::neutral;
  return std::nullopt;
}

std::string_view to_string(Gender g) {
  switch (g) {
    case Gender::female: return "female";
    case Gender::male: return "male";
    case Gender::unknown: return "unknown";
  }
  return "unknown";
}

std::string_view to_string(AgeGroup a) {
  switch (a) {
    case AgeGroup::teens: return "teens";
    case AgeGroup::twenties: return "20s";
    case AgeGroup::thirties: return "30s";
    case AgeGroup::forties: return "40s";
    case AgeGroup::fifties_plus: return "50s_plus";
    case AgeGroup::unknown: return "unknown";
  }
  return "unknown";
}

std::string_view to_string(Stage s) {
  return s == Stage::explicit_extraction ? "explicit persona" : "implicit persona";
}

const std::array<std::string_view, 6>& implicit_fields() { return kImplicitFields; }

ExplicitPersona::ExplicitPersona() {
  for (std::size_t i = 0; i < kFactorCount; ++i) attributes[i].name = kFactors[i].factor;
}

const ExplicitAttribute& ExplicitPersona::at(Factor f) const {
  return attributes[static_cast<std::size_t>(f)];
}

ExplicitAttribute& ExplicitPersona::at(Factor f) { return attributes[static_cast<std::size_t>(f)]; }

std::size_t ExplicitPersona::mentioned_count() const {
  return static_cast<std::size_t>(std::count_if(attributes.begin(), attributes.end(),
                                                [](const auto& a) { return a.mentioned; }));
}

std::string build_explicit_prompt(const corpus::Review& r, const prompts::PromptTemplates& t) {
  if (r.text.empty()) throw ValidationError("review " + r.review_id + " has empty text");
  return prompts::render(t.explicit_extraction, {{"factors", render_factor_list()},
                                                 {"review", prompts::embed_review(r.text)}});
}

std::string build_implicit_prompt(const corpus::Review& r, const prompts::PromptTemplates& t) {
  if (r.text.empty()) throw ValidationError("review " + r.review_id + " has empty text");
  return prompts::render(t.implicit_extraction, {{"review", prompts::embed_review(r.text)}});
}

std::string strip_fencing(std::string_view raw) {
  std::string s = text::trim(raw);
  if (s.rfind("```", 0) == 0) {
    const auto eol = s.find('\n');
    s = eol == std::string::npos ? std::string() : s.substr(eol + 1);
    const auto close = s.rfind("```");
    if (close != std::string::npos) s = s.substr(0, close);
  }
  const auto first = s.find('{');
  const auto last = s.rfind('}');
  if (first != std::string::npos && last != std::string::npos && last > first)
    s = s.substr(first, last - first + 1);
  return text::trim(s);
}

Parsed<ExplicitPersona> parse_explicit(std::string_view raw, const corpus::Review& source) {
  Parsed<ExplicitPersona> out;
  const json j = parse_object(raw);
  out.value = explicit_from_wire(j, &out.warnings, &source.text);
  out.value.source_review_id = source.review_id;
  return out;
}

Parsed<ImplicitPersona> parse_implicit(std::string_view raw) {
  Parsed<ImplicitPersona> out;
  auto& w = out.warnings;
  ImplicitPersona& p = out.value;
  const json j = parse_object(raw);

  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    const bool known =
        std::find(kImplicitFields.begin(), kImplicitFields.end(), key) != kImplicitFields.end() ||
        key == "confidence" ||
        (key.size() > 11 && key.ends_with("_confidence") &&
         std::find(kImplicitFields.begin(), kImplicitFields.end(),
                   std::string_view(key).substr(0, key.size() - 11)) != kImplicitFields.end());
    if (!known) w.push_back("unknown implicit field \"" + key + "\" ignored");
  }

  auto enum_value = [&](std::string_view field) -> std::optional<std::string> {
    auto it = j.find(std::string(field));
    if (it == j.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) return it->dump();
    return lower_ascii(text::trim(it->get<std::string>()));
  };
  if (auto v = enum_value("gender")) {
    if (auto g = gender_from_string(*v)) p.gender = *g;
    else w.push_back("gender \"" + *v + "\" not in vocabulary, using unknown");
  }
  if (auto v = enum_value("age_group")) {
    if (auto a = age_from_string(*v)) p.age_group = *a;
    else w.push_back("age_group \"" + *v + "\" not in vocabulary, using unknown");
  }
  if (auto v = enum_value("sentiment")) {
    if (auto s = polarity_from_string(*v)) p.sentiment = *s;
    else w.push_back("sentiment \"" + *v + "\" not in vocabulary, using neutral");
  }
  if (auto it = j.find("tone"); it != j.end()) p.tone = read_label(*it, "tone", w);
  if (auto it = j.find("dietary_preference"); it != j.end())
    p.dietary_preference = read_label(*it, "dietary_preference", w);
  if (auto it = j.find("lifestyle"); it != j.end()) p.lifestyle = read_label(*it, "lifestyle", w);

  const json* nested = nullptr;
  if (auto it = j.find("confidence"); it != j.end() && it->is_object()) nested = &*it;
  auto confidence = [&](std::string_view field, double& slot) {
    const json* v = nullptr;
    if (auto it = j.find(std::string(field) + "_confidence"); it != j.end()) v = &*it;
    else if (nested) {
      if (auto n = nested->find(std::string(field)); n != nested->end()) v = &*n;
    }
    if (!v || v->is_null()) return;
    if (!v->is_number()) {
      w.push_back(std::string(field) + " confidence is not a number, using 0.5");
      return;
    }
    const double c = v->get<double>();
    slot = std::clamp(c, 0.0, 1.0);
    if (slot != c) w.push_back(std::string(field) + " confidence clamped into [0,1]");
  };
  confidence("gender", p.confidence.gender);
  confidence("age_group", p.confidence.age_group);
  confidence("tone", p.confidence.tone);
  confidence("dietary_preference", p.confidence.dietary_preference);
  confidence("lifestyle", p.confidence.lifestyle);
  confidence("sentiment", p.confidence.sentiment);
  return out;
}

json to_json(const ExplicitPersona& p) {
  json j = json::object();
  for (const auto& a : p.attributes) {
    j[std::string(to_string(a.name))] = {{"mentioned", a.mentioned},
                                         {"polarity", to_string(a.polarity)},
                                         {"evidence", a.evidence}};
  }
  return j;
}

json to_json(const ImplicitPersona& p) {
  return json{{"gender", to_string(p.gender)},
              {"age_group", to_string(p.age_group)},
              {"tone", p.tone},
              {"dietary_preference", p.dietary_preference},
              {"lifestyle", p.lifestyle},
              {"sentiment", to_string(p.sentiment)},
              {"gender_confidence", p.confidence.gender},
              {"age_group_confidence", p.confidence.age_group},
              {"tone_confidence", p.confidence.tone},
              {"dietary_preference_confidence", p.confidence.dietary_preference},
              {"lifestyle_confidence", p.confidence.lifestyle},
              {"sentiment_confidence", p.confidence.sentiment}};
}

json to_json(const PersonaBundle& b) {
  return json{{"review_id", b.review_id},
              {"extraction_model", b.extraction_model.str()},
              {"explicit", to_json(b.explicit_persona)},
              {"implicit", to_json(b.implicit_persona)},
              {"raw_outputs", {{"explicit", b.raw_explicit}, {"implicit", b.raw_implicit}}},
              {"warnings", b.warnings}};
}

PersonaBundle bundle_from_json(const json& j) {
  PersonaBundle b;
  try {
    b.review_id = j.at("review_id").get<std::string>();
    b.extraction_model = llm::ModelId::parse(j.at("extraction_model").get<std::string>());
    b.explicit_persona = explicit_from_json(j.at("explicit"), b.review_id);
    b.implicit_persona = implicit_from_json(j.at("implicit"));
    b.raw_explicit = j.at("raw_outputs").at("explicit").get<std::string>();
    b.raw_implicit = j.at("raw_outputs").at("implicit").get<std::string>();
    if (auto it = j.find("warnings"); it != j.end())
      b.warnings = it->get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed persona bundle: ") + e.what());
  }
  return b;
}

ExplicitPersona explicit_from_json(const json& j, const std::string& source_review_id) {
  if (!j.is_object()) throw ValidationError("explicit persona must be a JSON object");
  ExplicitPersona p = explicit_from_wire(j, nullptr, nullptr);
  p.source_review_id = source_review_id;
  return p;
}

ImplicitPersona implicit_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("implicit persona must be a JSON object");
  return parse_implicit(j.dump()).value;
}

PersonaBundle infer_personas(const corpus::Review& r, const llm::ModelId& model,
                             llm::Gateway& gateway, const ExtractionOptions& opts) {
  const auto& templates = pick(opts.templates);
  PersonaBundle bundle;
  bundle.review_id = r.review_id;
  bundle.extraction_model = model;

  auto run_stage = [&](Stage stage, const std::string& prompt) {
    llm::ChatRequest req{model, opts.system, prompt,
                         llm::DecodingParams{opts.temperature, opts.max_tokens, std::nullopt}};
    try {
      return gateway.complete(req).text;
    } catch (const Error& e) {
      throw StageError(stage, e);
    }
  };

  bundle.raw_explicit = run_stage(Stage::explicit_extraction, build_explicit_prompt(r, templates));
  try {
    auto parsed = parse_explicit(bundle.raw_explicit, r);
    bundle.explicit_persona = std::move(parsed.value);
    for (auto& w : parsed.warnings) bundle.warnings.push_back("explicit: " + w);
  } catch (const ValidationError& e) {
    throw StageError(Stage::explicit_extraction, e);
  }

  bundle.raw_implicit = run_stage(Stage::implicit_inference, build_implicit_prompt(r, templates));
  try {
    auto parsed = parse_implicit(bundle.raw_implicit);
    bundle.implicit_persona = std::move(parsed.value);
    for (auto& w : parsed.warnings) bundle.warnings.push_back("implicit: " + w);
  } catch (const ValidationError& e) {
    throw StageError(Stage::implicit_inference, e);
  }
  return bundle;
}

std::map<std::string, PersonaBundle> load_personas(const std::string& path) {
  std::map<std::string, PersonaBundle> out;
  std::istringstream in(text::read_file(path));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      PersonaBundle b = bundle_from_json(json::parse(line));
      const std::string id = b.review_id;
      if (!out.emplace(id, std::move(b)).second)
        throw ValidationError("duplicate persona for review " + id);
    } catch (const json::parse_error& e) {
      throw ValidationError(path + ": line " + std::to_string(line_no) + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(path + ": line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void save_personas(const std::vector<PersonaBundle>& bundles, const std::string& path) {
  std::string out;
  for (const auto& b : bundles) out += to_json(b).dump() + "\n";
  text::write_file_atomic(path, out);
}

}  // namespace paran::persona
