#include <gtest/gtest.h>

#include <random>

#include "crowdnotes/errors.hpp"
#include "crowdnotes/gateway.hpp"
#include "crowdnotes/retrieval.hpp"
#include "crowdnotes/similarity.hpp"
#include "support/fake_world.hpp"

using namespace crowdnotes;
using crowdnotes::testing::FakeWorld;
using crowdnotes::testing::LambdaTransport;
using nlohmann::json;

namespace {

std::string words(std::size_t n) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s += "w" + std::to_string(i) + (i % 7 == 6 ? "\n" : " ");
  return s;
}

// Scorer with fixed scores, for tie-break checks.
class FixedScorer : public SimilarityScorer {
 public:
  explicit FixedScorer(std::vector<double> s) : scores_(std::move(s)) {}
  std::vector<double> score(std::string_view, std::span<const std::string>) override { return scores_; }
  std::string name() const override { return "fixed"; }

 private:
  std::vector<double> scores_;
};

FlaggedPost post() { return make_post("p1", "measles outbreak vaccination", from_epoch_seconds(1700000000)); }

}  // namespace

TEST(ChunkSpans, DocumentedExamples) {
  EXPECT_EQ(chunk_spans(900, 512, 128), (std::vector<TokenSpan>{{0, 512}, {384, 896}, {768, 900}}));
  EXPECT_EQ(chunk_spans(512, 512, 128), (std::vector<TokenSpan>{{0, 512}}));
  EXPECT_EQ(chunk_spans(513, 512, 128), (std::vector<TokenSpan>{{0, 512}, {384, 513}}));
  EXPECT_EQ(chunk_spans(3, 512, 128), (std::vector<TokenSpan>{{0, 3}}));
}

TEST(ChunkSpans, RejectsBadGeometry) {
  EXPECT_THROW(chunk_spans(0, 512, 128), Error);
  EXPECT_THROW(chunk_spans(10, 4, 4), Error);
}

TEST(ChunkSpans, CoverageAndOverlapForArbitraryGeometry) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 2000; ++i) {
    std::size_t size = 1 + rng() % 64, overlap = rng() % size, total = 1 + rng() % 500;
    auto spans = chunk_spans(total, size, overlap);
    ASSERT_EQ(spans.front().start, 0u);
    ASSERT_EQ(spans.back().end, total);
    for (std::size_t k = 0; k < spans.size(); ++k) {
      ASSERT_LE(spans[k].size(), size);
      ASSERT_GT(spans[k].size(), 0u);
      if (k) {
        ASSERT_EQ(spans[k].start, spans[k - 1].start + size - overlap);
        ASSERT_LT(spans[k - 1].end, total);
      }
    }
  }
}

TEST(Segment, ChunksCarryExactTokenText) {
  std::string text = words(900);
  auto chunks = segment_passages(text, 512, 128, default_tokenizer(), "https://a.org/");
  ASSERT_EQ(chunks.size(), 3u);
  EXPECT_EQ(chunks[1].token_span, (TokenSpan{384, 896}));
  EXPECT_EQ(chunks[1].chunk_index, 1u);
  EXPECT_EQ(chunks[1].url, "https://a.org/");
  EXPECT_TRUE(chunks[1].text.starts_with("w384"));
  EXPECT_TRUE(chunks[1].text.ends_with("w895"));
  EXPECT_TRUE(chunks[2].text.ends_with("w899"));
}

TEST(Segment, TokenizerSplitsUnicodeWhitespace) {
  auto ranges = WhitespaceTokenizer().tokenize("a\xC2\xA0" "bb  c");
  ASSERT_EQ(ranges.size(), 3u);
  EXPECT_EQ(ranges[1], (ByteRange{3, 5}));
}

TEST(MatchBestChunk, TieGoesToLowestIndex) {
  std::vector<EvidenceChunk> chunks(3);
  for (std::size_t i = 0; i < 3; ++i) chunks[i].chunk_index = i;
  FixedScorer scorer({0.2, 0.9, 0.9});
  auto best = match_best_chunk("q", chunks, scorer);
  EXPECT_EQ(best.chunk_index, 1u);
  EXPECT_DOUBLE_EQ(*best.score, 0.9);
}

TEST(MatchBestChunk, SingletonAndLexical) {
  std::vector<EvidenceChunk> one(1);
  FixedScorer low({-0.5});
  EXPECT_EQ(match_best_chunk("q", one, low).chunk_index, 0u);

  std::vector<EvidenceChunk> chunks(2);
  chunks[0].text = "Tax law changes for small businesses.";
  chunks[0].chunk_index = 0;
  chunks[1].text = "A measles outbreak was reported in the county.";
  chunks[1].chunk_index = 1;
  LexicalScorer lexical;
  EXPECT_EQ(match_best_chunk("measles outbreak", chunks, lexical).chunk_index, 1u);
}

TEST(CollectEvidence, OneChunkPerReachableSourceInOrder) {
  FakeWorld world;
  auto t = std::make_shared<LambdaTransport>();
  world.install(*t);
  Gateway gw(GatewayMode::kLive, nullptr, t);
  LexicalScorer scorer;
  std::vector<EvidenceRef> refs{{world.page_url(0)}, {world.page_url(8)}, {world.page_url(16)}};
  auto r = collect_evidence_chunks(post(), refs, RunConfig{}, gw, scorer);
  ASSERT_EQ(r.chunks.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(r.chunks[i].url, refs[i].url);
  EXPECT_TRUE(r.skips.empty());
  for (const auto& c : r.chunks) {
    EXPECT_EQ(c.text.find("Home"), std::string::npos) << "navigation leaked";
    EXPECT_EQ(c.text.find("Smith J."), std::string::npos) << "references leaked";
    EXPECT_TRUE(c.score.has_value());
  }
}

TEST(CollectEvidence, SkipsUnreachableAndDuplicates) {
  FakeWorld world;
  auto t = std::make_shared<LambdaTransport>();
  world.install(*t);
  Gateway gw(GatewayMode::kLive, nullptr, t);
  LexicalScorer scorer;
  std::vector<EvidenceRef> refs{{world.page_url(0)}, {FakeWorld::dead_url(1)}, {world.page_url(0)},
                                {"https://files.example.org/doc-1.pdf"}};
  auto r = collect_evidence_chunks(post(), refs, RunConfig{}, gw, scorer);
  ASSERT_EQ(r.chunks.size(), 1u);
  ASSERT_EQ(r.skips.size(), 3u);
  EXPECT_EQ(r.skips[0].reason, "unreachable");
  EXPECT_EQ(r.skips[1].reason, "duplicate");
  EXPECT_EQ(r.skips[2].reason, "non_text");
}

TEST(CollectEvidence, ProviderFailuresAreSkippedNotFatal) {
  auto t = std::make_shared<LambdaTransport>();
  t->fetch = [](const json& r) -> json {
    if (r.at("url").get<std::string>().find("bad") != std::string::npos) fail(ErrorCode::kProviderError, "boom");
    return json{{"status", "OK"}, {"raw", "<p>measles facts</p>"}};
  };
  Gateway gw(GatewayMode::kLive, nullptr, t, RetryPolicy{1, {}, 1.0});
  LexicalScorer scorer;
  std::vector<EvidenceRef> refs{{"https://bad.org/"}, {"https://good.org/"}, {"https://empty.org/"}};
  auto r = collect_evidence_chunks(post(), refs, RunConfig{}, gw, scorer);
  ASSERT_EQ(r.chunks.size(), 2u);
  ASSERT_EQ(r.skips.size(), 1u);
  EXPECT_TRUE(r.skips[0].reason.starts_with("ProviderError")) << r.skips[0].reason;
}

TEST(RetrieveEvidence, AllSourcesFailed) {
  FakeWorld world;
  auto t = std::make_shared<LambdaTransport>();
  world.install(*t);
  Gateway gw(GatewayMode::kLive, nullptr, t);
  LexicalScorer scorer;
  std::vector<EvidenceRef> refs{{FakeWorld::dead_url(1)}, {FakeWorld::dead_url(2)}};
  try {
    retrieve_evidence_chunks(post(), refs, RunConfig{}, gw, scorer);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAllSourcesFailed);
  }
}

TEST(RetrieveEvidence, CassetteMissPropagates) {
  Gateway gw(GatewayMode::kReplay, nullptr, nullptr);
  LexicalScorer scorer;
  std::vector<EvidenceRef> refs{{"https://a.org/"}};
  try {
    collect_evidence_chunks(post(), refs, RunConfig{}, gw, scorer);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCassetteMiss);
  }
}
