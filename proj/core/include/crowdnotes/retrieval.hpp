#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "crowdnotes/domain.hpp"
#include "crowdnotes/gateway.hpp"

namespace crowdnotes {

class SimilarityScorer;

struct RemovedRegions {
  int header = 0;
  int footer = 0;
  int sidebar = 0;
  int references = 0;
  int script = 0;

  friend bool operator==(const RemovedRegions&, const RemovedRegions&) = default;
};

struct CleanedText {
  std::string url;
  std::string text;
  RemovedRegions removed;
};

// Strips markup and boilerplate (nav, header, footer, aside, script, style,
// reference sections). Plain text only gets whitespace normalization.
// Throws kPreconditionViolation unless doc.status is kOk and kEmptyAfterClean
// when no body text survives.
CleanedText clean_document(const FetchedDocument& doc);

bool looks_like_markup(std::string_view raw);

/// Byte range [first, second) of one token inside the text.
using ByteRange = std::pair<std::size_t, std::size_t>;

class Tokenizer {
 public:
  virtual ~Tokenizer() = default;
  virtual std::vector<ByteRange> tokenize(std::string_view text) const = 0;
};

// Unicode-whitespace-delimited words.
class WhitespaceTokenizer final : public Tokenizer {
 public:
  std::vector<ByteRange> tokenize(std::string_view text) const override;
};

const Tokenizer& default_tokenizer();

// Window geometry: starts at 0, s, 2s, ... with s = chunk_size - overlap;
// the last window ends at total_tokens. Throws kInvalidArgument unless
// overlap < chunk_size and total_tokens > 0.
std::vector<TokenSpan> chunk_spans(std::size_t total_tokens, std::size_t chunk_size,
                                   std::size_t overlap);

std::vector<EvidenceChunk> segment_passages(std::string_view text, std::size_t chunk_size,
                                            std::size_t overlap,
                                            const Tokenizer& tokenizer = default_tokenizer(),
                                            std::string_view url = {});

// Highest scoring chunk; ties go to the lowest chunk_index. The returned
// chunk carries its score.
EvidenceChunk match_best_chunk(std::string_view post_text, std::span<const EvidenceChunk> chunks,
                               SimilarityScorer& scorer);

struct SkipEntry {
  std::string url;
  std::string reason;

  friend bool operator==(const SkipEntry&, const SkipEntry&) = default;
};

struct RetrievalResult {
  std::vector<EvidenceChunk> chunks;  // one per reachable source, evidence order
  std::vector<SkipEntry> skips;
};

// fetch -> clean -> segment -> match for each source. Never throws for
// per-source problems; those land in the skip log. Cassette misses and
// scorer failures propagate.
RetrievalResult collect_evidence_chunks(const FlaggedPost& post,
                                        std::span<const EvidenceRef> evidence,
                                        const RunConfig& config, Gateway& gateway,
                                        SimilarityScorer& scorer,
                                        const Tokenizer& tokenizer = default_tokenizer());

// As above, but throws kAllSourcesFailed when no source yields a chunk.
RetrievalResult retrieve_evidence_chunks(const FlaggedPost& post,
                                         std::span<const EvidenceRef> evidence,
                                         const RunConfig& config, Gateway& gateway,
                                         SimilarityScorer& scorer,
                                         const Tokenizer& tokenizer = default_tokenizer());

}  // namespace crowdnotes
