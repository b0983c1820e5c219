#include <gtest/gtest.h>

#include "golden.hpp"
#include "paran/error.hpp"
#include "paran/generator.hpp"

using namespace paran;
using namespace paran::generator;

namespace {

corpus::Review review() {
  corpus::RawReview raw{"r9", "eater", "m2", "Seoul Gangnam-gu", "2024-06-01T18:00:00Z", 5,
                        "Huge portion and the price was fair. My husband and I will order again!!",
                        {}};
  return corpus::Review::from_raw(raw);
}

persona::PersonaBundle bundle() {
  persona::PersonaBundle b;
  b.review_id = "r9";
  auto& p = b.explicit_persona;
  p.source_review_id = "r9";
  p.at(persona::Factor::portion_size) = {persona::Factor::portion_size, true,
                                         persona::Polarity::positive, "Huge portion"};
  p.at(persona::Factor::loyalty) = {persona::Factor::loyalty, true, persona::Polarity::positive,
                                    "I will order again"};
  b.implicit_persona.gender = persona::Gender::female;
  b.implicit_persona.tone = "enthusiastic";
  b.implicit_persona.confidence.gender = 0.8;
  b.extraction_model = llm::ModelId::parse("mock:x");
  return b;
}

GenerationRequest request(Arm arm, double t = 0.0) {
  auto b = bundle();
  return make_request(review(), &b, arm, llm::ModelId::parse("mock:gen"),
                      llm::DecodingParams{t, 512, std::nullopt});
}

const std::string kExplicitMarker = "explicit persona";
const std::string kImplicitMarker = "implicit persona";

}  // namespace

TEST(Arm, NamesRoundTrip) {
  for (Arm a : all_arms()) EXPECT_EQ(arm_from_string(to_string(a)), a);
  EXPECT_EQ(display_name(Arm::none), "w/o E&I Persona");
  EXPECT_THROW(arm_from_string("both"), ValidationError);
}

TEST(Request, ArmPersonaConsistency) {
  auto r = request(Arm::paran);
  EXPECT_NO_THROW(r.validate());
  r.implicit_persona.reset();
  EXPECT_THROW(r.validate(), ValidationError);
  auto n = request(Arm::none);
  EXPECT_FALSE(n.explicit_persona || n.implicit_persona);
  n.explicit_persona = bundle().explicit_persona;
  EXPECT_THROW(n.validate(), ValidationError);
  EXPECT_THROW(make_request(review(), nullptr, Arm::explicit_only, llm::ModelId::parse("mock:g"), {}),
               ValidationError);
}

TEST(Prompt, ArmIsolation) {
  auto none = assemble_prompt(request(Arm::none));
  EXPECT_EQ(none.find(kExplicitMarker), std::string::npos);
  EXPECT_EQ(none.find(kImplicitMarker), std::string::npos);
  EXPECT_NE(none.find(review().text), std::string::npos);

  auto ex = assemble_prompt(request(Arm::explicit_only));
  EXPECT_NE(ex.find(kExplicitMarker), std::string::npos);
  EXPECT_EQ(ex.find(kImplicitMarker), std::string::npos);
  EXPECT_NE(ex.find("- portion_size (positive): \"Huge portion\""), std::string::npos) << ex;
  EXPECT_NE(ex.find("- loyalty (positive): \"I will order again\""), std::string::npos);
  EXPECT_EQ(ex.find("food_taste ("), std::string::npos);

  auto im = assemble_prompt(request(Arm::implicit_only));
  EXPECT_EQ(im.find(kExplicitMarker), std::string::npos);
  EXPECT_NE(im.find("- gender: female (confidence 0.80)"), std::string::npos) << im;
  EXPECT_EQ(im.find("age_group:"), std::string::npos);
}

TEST(Prompt, ParanGolden) { expect_golden("paran_prompt.txt", assemble_prompt(request(Arm::paran))); }

TEST(Generate, DeterministicAndArmSensitive) {
  llm::Gateway gw;
  auto a = generate(request(Arm::paran), gw);
  auto b = generate(request(Arm::paran), gw);
  auto n = generate(request(Arm::none), gw);
  EXPECT_EQ(a.text, b.text);
  EXPECT_FALSE(a.text.empty());
  EXPECT_NE(a.text, n.text);
  EXPECT_EQ(a.response_tokens, metrics::tokenize(a.text).tokens);
  EXPECT_THROW(generate(request(Arm::paran, 1.2), gw), ValidationError);
}

TEST(Generate, ReplayFromStoredRequest) {
  llm::Gateway gw;
  auto a = generate(request(Arm::paran, 0.6), gw);
  auto restored = response_from_json(nlohmann::json::parse(to_json(a).dump()));
  EXPECT_EQ(restored.text, a.text);
  EXPECT_EQ(restored.prompt, a.prompt);
  auto again = generate(restored.request, gw);
  EXPECT_EQ(again.text, a.text);
  EXPECT_EQ(again.prompt, a.prompt);
}

TEST(Generate, EmptyCompletionIsProviderError) {
  class Empty : public llm::ChatProvider {
   public:
    std::string complete(const llm::ChatRequest&) override { return "  "; }
  };
  llm::Gateway gw;
  gw.set_provider(llm::Provider::mock, std::make_shared<Empty>());
  EXPECT_THROW(generate(request(Arm::none), gw), llm::ProviderError);
}

TEST(ResponsesFile, RoundTrip) {
  auto dir = fresh_dir("responses");
  llm::Gateway gw;
  std::vector<GeneratedResponse> v{generate(request(Arm::paran), gw), generate(request(Arm::none), gw)};
  auto path = (dir / "r.jsonl").string();
  save_responses(v, path);
  auto loaded = load_responses(path);
  ASSERT_EQ(loaded.size(), 2u);
  EXPECT_EQ(loaded[1].text, v[1].text);
  EXPECT_EQ(loaded[1].request.arm, Arm::none);
  EXPECT_FALSE(loaded[1].request.explicit_persona.has_value());
}
