#include <gtest/gtest.h>

#include "crowdnotes/errors.hpp"
#include "crowdnotes/gateway.hpp"
#include "crowdnotes/notegen.hpp"
#include "crowdnotes/text.hpp"
#include "support/fake_world.hpp"

using namespace crowdnotes;
using crowdnotes::testing::constant_chat;
using crowdnotes::testing::LambdaTransport;
using nlohmann::json;

namespace {

std::vector<EvidenceRef> refs(int n) {
  std::vector<EvidenceRef> out;
  for (int i = 0; i < n; ++i) out.push_back({"https://r" + std::to_string(i) + ".org/"});
  return out;
}

}  // namespace

TEST(Budget, Arithmetic) {
  EXPECT_EQ(compute_budget(280, 3), 277);
  EXPECT_EQ(compute_budget(280, 0), 280);
  EXPECT_EQ(compute_budget(280, 3, 23), 211);
  try {
    compute_budget(2, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBudgetExhausted);
  }
}

TEST(CleanGenerated, SingleLineNoUrls) {
  EXPECT_EQ(clean_generated_text("Note text."), "Note text.");
  EXPECT_EQ(clean_generated_text("A\nB"), "A B");
  EXPECT_EQ(clean_generated_text("Vaccines work, see https://x.y/z for  more."), "Vaccines work, see for more.");
  EXPECT_THROW(clean_generated_text("https://only.url/"), Error);
  EXPECT_THROW(clean_generated_text("   "), Error);
}

TEST(GenerateNote, SendsSnippetsAndBudget) {
  auto t = std::make_shared<LambdaTransport>();
  std::string prompt;
  t->chat = [&](const json& r) {
    prompt = r.at("user_prompt");
    EXPECT_EQ(r.at("model_tag"), "writer");
    return json{{"text", "Flu shots cannot\ncause flu. https://cdc.gov"}};
  };
  Gateway gw(GatewayMode::kLive, nullptr, t);
  EvidenceChunk c{"https://cdc.gov/flu", 2, "Inactivated vaccines cannot cause flu.", {0, 5}, 0.4};
  std::vector<EvidenceChunk> chunks{c};
  auto post = make_post("p", "Flu shot gave me flu", from_epoch_seconds(1700000000));
  EXPECT_EQ(generate_note(post, chunks, 279, gw, "writer"), "Flu shots cannot cause flu.");
  EXPECT_NE(prompt.find("[S1] https://cdc.gov/flu (chunk 2)\nInactivated"), std::string::npos);
  EXPECT_NE(prompt.find("≤ 279 characters"), std::string::npos);
  EXPECT_THROW(generate_note(post, {}, 279, gw, "writer"), Error);
}

TEST(Finalize, CutsToBudget) {
  std::string text(300, 'x');
  auto n = finalize_note(text, refs(2), 280);
  EXPECT_EQ(n.text.size(), 278u);
  EXPECT_TRUE(n.truncated);
  EXPECT_EQ(n.budget_chars, 278);
  EXPECT_EQ(n.full_text, text);
}

TEST(Finalize, UnderBudgetUnchanged) {
  std::string text(100, 'y');
  auto n = finalize_note(text, refs(5), 280);
  EXPECT_EQ(n.text, text);
  EXPECT_FALSE(n.truncated);
}

TEST(Finalize, ExactlyAtBudgetUnchanged) {
  std::string text(277, 'z');
  auto n = finalize_note(text, refs(3), 280);
  EXPECT_EQ(n.text, text);
  EXPECT_FALSE(n.truncated);
}

TEST(Finalize, CutLandsBeforeMultiUnitGrapheme) {
  const std::string family = "\xF0\x9F\x91\xA8\xE2\x80\x8D\xF0\x9F\x91\xA9\xE2\x80\x8D\xF0\x9F\x91\xA7";
  std::string text = std::string(277, 'a') + family + "tail";
  auto n = finalize_note(text, refs(2), 280);  // budget 278: the family is character 278
  EXPECT_EQ(n.text, std::string(277, 'a') + family);
  auto m = finalize_note(text, refs(3), 280);  // budget 277
  EXPECT_EQ(m.text, std::string(277, 'a'));
  auto b = text::grapheme_boundaries(n.text);
  EXPECT_EQ(b.back(), n.text.size());
}

TEST(Finalize, MachineNotesNeedUrls) {
  EXPECT_THROW(finalize_note("x", {}, 280, Provenance::kAutomated), Error);
  EXPECT_NO_THROW(finalize_note("x", {}, 280, Provenance::kHuman));
}

TEST(Finalize, ReapplicationIsIdempotent) {
  auto n = finalize_note(std::string(400, 'q'), refs(4), 280, Provenance::kAutomated);
  n.post_id = "p9";
  auto again = finalize_note(n, 280);
  EXPECT_EQ(again.text, n.text);
  EXPECT_EQ(again.full_text, n.full_text);
  EXPECT_TRUE(again.truncated);
  EXPECT_EQ(again.post_id, "p9");
  EXPECT_EQ(again.provenance, Provenance::kAutomated);
}
