#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "crowdnotes/time.hpp"

namespace crowdnotes {

enum class NoteStatus { kHelpful, kNotHelpful };
enum class Provenance { kHuman, kAugmented, kAutomated };

enum class RunMode {
  kHumanBaseline,
  kAugment,
  kAutomate,
  kAutomateNoDiversity,
  kAutomateNoUtility,
};

enum class TimeCutoff { kNoteCreation, kNone };

/// A potentially misleading post flagged for a note.
struct FlaggedPost {
  std::string post_id;
  std::string text;
  Timestamp created_at;
};

/// A source URL plus the search metadata that surfaced it, when any.
struct EvidenceRef {
  std::string url;  // canonical, see normalize_url
  std::optional<std::string> title;
  std::optional<std::string> snippet;
  std::optional<std::string> source_query;
  std::optional<int> search_rank;  // 1-based
  std::optional<Timestamp> published_at;

  friend bool operator==(const EvidenceRef&, const EvidenceRef&) = default;
};

/// Half-open token range [start, end).
struct TokenSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - start; }
  friend bool operator==(const TokenSpan&, const TokenSpan&) = default;
};

/// A passage cut from one source document.
struct EvidenceChunk {
  std::string url;
  std::size_t chunk_index = 0;
  std::string text;
  TokenSpan token_span;
  std::optional<double> score;
};

struct NoteRecord {
  std::string note_id;
  std::string post_id;
  std::string text;
  std::vector<EvidenceRef> urls;
  Timestamp created_at;
  std::optional<NoteStatus> status;  // HUMAN provenance only
  Provenance provenance = Provenance::kHuman;
};

/// Evidence quota: a fixed count or AUTO, meaning |E_h| for each sample.
class Quota {
 public:
  static Quota automatic() { return Quota{}; }
  static Quota fixed(int n);

  bool is_auto() const { return !value_; }
  int resolve(std::size_t human_url_count) const;
  std::string to_string() const;

  friend bool operator==(const Quota&, const Quota&) = default;

 private:
  std::optional<int> value_;
};

struct RunConfig {
  Quota quota = Quota::automatic();
  int num_queries = 3;
  int top_k = 10;
  std::size_t chunk_size = 512;
  std::size_t chunk_overlap = 128;
  int char_limit = 280;
  int url_char_cost = 1;
  RunMode mode = RunMode::kAugment;
  TimeCutoff time_cutoff = TimeCutoff::kNoteCreation;

  // Throws kInvalidArgument when an invariant does not hold.
  void validate() const;
};

// Canonicalizes an absolute http(s) URL: lowercase scheme and host, no
// fragment, tracking parameters (utm_*, fbclid, gclid) removed, remaining
// query parameters sorted by key, empty path rendered as "/".
// Throws kMalformedUrl.
std::string normalize_url(std::string_view raw);

// Case-insensitive; accepts helpful / currently_rated_helpful and the
// not-helpful equivalents. Anything else, including needs_more_ratings,
// throws kUnknownStatus.
NoteStatus parse_status(std::string_view label);
std::string_view render_status(NoteStatus status);

std::string_view to_string(Provenance provenance);
std::string_view to_string(RunMode mode);
RunMode parse_run_mode(std::string_view name);
std::string_view to_string(TimeCutoff cutoff);

// Throws kInvalidArgument if text is blank.
FlaggedPost make_post(std::string post_id, std::string text, Timestamp created_at);

}  // namespace crowdnotes
