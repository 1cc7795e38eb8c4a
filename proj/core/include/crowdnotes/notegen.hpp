#pragma once

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "crowdnotes/domain.hpp"

namespace crowdnotes {

class Gateway;

struct GeneratedNote {
  std::string post_id;
  std::string text;       // within budget; what the helpfulness judge sees
  std::string full_text;  // untruncated; what relevance/correctness see
  std::vector<EvidenceRef> urls;
  Provenance provenance = Provenance::kAugmented;
  int budget_chars = 0;
  bool truncated = false;
};

// char_limit - url_count * url_char_cost. Throws kBudgetExhausted if <= 0.
int compute_budget(int char_limit, int url_count, int url_char_cost = 1);

// Line breaks become spaces, absolute URLs are removed, whitespace is
// collapsed. Throws kEmptyGeneration when nothing is left.
std::string clean_generated_text(std::string_view reply);

std::string generate_note(const FlaggedPost& post, std::span<const EvidenceChunk> chunks,
                          int budget, Gateway& gateway, std::string_view model_tag);

// Cuts at the last grapheme boundary at or below `budget` characters.
// Returns the kept prefix and whether anything was cut.
std::pair<std::string, bool> truncate_graphemes(std::string_view text, int budget);

GeneratedNote finalize_note(std::string_view text, std::vector<EvidenceRef> urls, int char_limit,
                            Provenance provenance = Provenance::kAugmented,
                            int url_char_cost = 1);

// Idempotent re-application; keeps the truncated flag and full_text.
GeneratedNote finalize_note(const GeneratedNote& note, int char_limit, int url_char_cost = 1);

}  // namespace crowdnotes
