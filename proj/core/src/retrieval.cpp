#include "crowdnotes/retrieval.hpp"

#include <algorithm>
#include <unordered_set>

#include "crowdnotes/errors.hpp"
#include "crowdnotes/similarity.hpp"
#include "crowdnotes/text.hpp"

namespace crowdnotes {

std::vector<ByteRange> WhitespaceTokenizer::tokenize(std::string_view text) const {
  std::vector<ByteRange> out;
  for (std::string_view token : text::split_whitespace(text)) {
    std::size_t begin = static_cast<std::size_t>(token.data() - text.data());
    out.emplace_back(begin, begin + token.size());
  }
  return out;
}

const Tokenizer& default_tokenizer() {
  static const WhitespaceTokenizer tokenizer;
  return tokenizer;
}

std::vector<TokenSpan> chunk_spans(std::size_t total_tokens, std::size_t chunk_size,
                                   std::size_t overlap) {
  if (chunk_size == 0 || overlap >= chunk_size) {
    fail(ErrorCode::kInvalidArgument, "chunk overlap must be smaller than chunk size");
  }
  if (total_tokens == 0) fail(ErrorCode::kInvalidArgument, "cannot segment an empty text");
  const std::size_t stride = chunk_size - overlap;
  std::vector<TokenSpan> spans;
  for (std::size_t start = 0;; start += stride) {
    std::size_t end = std::min(start + chunk_size, total_tokens);
    spans.push_back({start, end});
    if (end == total_tokens) break;
  }
  return spans;
}

std::vector<EvidenceChunk> segment_passages(std::string_view text, std::size_t chunk_size,
                                            std::size_t overlap, const Tokenizer& tokenizer,
                                            std::string_view url) {
  auto tokens = tokenizer.tokenize(text);
  auto spans = chunk_spans(tokens.size(), chunk_size, overlap);
  std::vector<EvidenceChunk> chunks;
  chunks.reserve(spans.size());
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const auto& span = spans[i];
    std::size_t begin = tokens[span.start].first;
    std::size_t end = tokens[span.end - 1].second;
    chunks.push_back(EvidenceChunk{std::string(url), i,
                                   std::string(text.substr(begin, end - begin)), span,
                                   std::nullopt});
  }
  return chunks;
}

EvidenceChunk match_best_chunk(std::string_view post_text, std::span<const EvidenceChunk> chunks,
                               SimilarityScorer& scorer) {
  if (chunks.empty()) fail(ErrorCode::kPreconditionViolation, "no chunks to match");
  for (const auto& c : chunks) {
    if (c.url != chunks.front().url) {
      fail(ErrorCode::kPreconditionViolation, "chunks come from more than one source");
    }
  }
  std::vector<std::string> passages;
  passages.reserve(chunks.size());
  for (const auto& c : chunks) passages.push_back(c.text);
  auto scores = score_similarity(scorer, post_text, passages);

  std::size_t best = 0;
  for (std::size_t i = 1; i < chunks.size(); ++i) {
    if (scores[i] > scores[best] ||
        (scores[i] == scores[best] && chunks[i].chunk_index < chunks[best].chunk_index)) {
      best = i;
    }
  }
  EvidenceChunk out = chunks[best];
  out.score = scores[best];
  return out;
}

RetrievalResult collect_evidence_chunks(const FlaggedPost& post,
                                        std::span<const EvidenceRef> evidence,
                                        const RunConfig& config, Gateway& gateway,
                                        SimilarityScorer& scorer, const Tokenizer& tokenizer) {
  RetrievalResult result;
  std::unordered_set<std::string> seen;
  for (const auto& ref : evidence) {
    if (!seen.insert(ref.url).second) {
      result.skips.push_back({ref.url, "duplicate"});
      continue;
    }
    FetchedDocument doc;
    try {
      doc = gateway.fetch(ref.url);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kProviderError && e.code() != ErrorCode::kParseError) throw;
      result.skips.push_back({ref.url, std::string(to_string(e.code())) + ": " + e.what()});
      continue;
    }
    if (doc.status == FetchStatus::kUnreachable) {
      result.skips.push_back({ref.url, "unreachable"});
      continue;
    }
    if (doc.status == FetchStatus::kNonText) {
      result.skips.push_back({ref.url, "non_text"});
      continue;
    }
    CleanedText cleaned;
    try {
      cleaned = clean_document(doc);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kEmptyAfterClean) throw;
      result.skips.push_back({ref.url, "empty_after_clean"});
      continue;
    }
    auto chunks =
        segment_passages(cleaned.text, config.chunk_size, config.chunk_overlap, tokenizer, ref.url);
    result.chunks.push_back(match_best_chunk(post.text, chunks, scorer));
  }
  return result;
}

RetrievalResult retrieve_evidence_chunks(const FlaggedPost& post,
                                         std::span<const EvidenceRef> evidence,
                                         const RunConfig& config, Gateway& gateway,
                                         SimilarityScorer& scorer, const Tokenizer& tokenizer) {
  auto result = collect_evidence_chunks(post, evidence, config, gateway, scorer, tokenizer);
  if (result.chunks.empty()) {
    fail(ErrorCode::kAllSourcesFailed,
         "no evidence source yielded a passage for post " + post.post_id);
  }
  return result;
}

}  // namespace crowdnotes
