#include "crowdnotes/notegen.hpp"

#include "crowdnotes/errors.hpp"
#include "crowdnotes/gateway.hpp"
#include "crowdnotes/prompts.hpp"
#include "crowdnotes/text.hpp"

namespace crowdnotes {

int compute_budget(int char_limit, int url_count, int url_char_cost) {
  if (char_limit <= 0 || url_count < 0 || url_char_cost < 0) {
    fail(ErrorCode::kInvalidArgument, "character limit and URL count must be non-negative");
  }
  long long budget = static_cast<long long>(char_limit) -
                     static_cast<long long>(url_count) * static_cast<long long>(url_char_cost);
  if (budget <= 0) {
    fail(ErrorCode::kBudgetExhausted, std::to_string(url_count) +
                                          " URLs leave no room for text under a limit of " +
                                          std::to_string(char_limit));
  }
  return static_cast<int>(budget);
}

std::string clean_generated_text(std::string_view reply) {
  std::string cleaned = text::collapse_whitespace(text::strip_urls(reply));
  if (cleaned.empty()) fail(ErrorCode::kEmptyGeneration, "model returned an empty note");
  return cleaned;
}

std::string generate_note(const FlaggedPost& post, std::span<const EvidenceChunk> chunks,
                          int budget, Gateway& gateway, std::string_view model_tag) {
  if (chunks.empty()) fail(ErrorCode::kPreconditionViolation, "note generation needs evidence");
  if (budget <= 0) fail(ErrorCode::kBudgetExhausted, "no character budget for the note");
  auto prompt = prompts::render_note_generation(post.text, chunks, budget);
  ChatRequest request{prompt.system, prompt.user, 0.0, std::nullopt, std::string(model_tag),
                      std::nullopt};
  return clean_generated_text(gateway.chat(request));
}

std::pair<std::string, bool> truncate_graphemes(std::string_view text, int budget) {
  if (budget < 0) fail(ErrorCode::kInvalidArgument, "negative budget");
  std::string_view kept = text::grapheme_prefix(text, static_cast<std::size_t>(budget));
  return {std::string(kept), kept.size() != text.size()};
}

GeneratedNote finalize_note(std::string_view text, std::vector<EvidenceRef> urls, int char_limit,
                            Provenance provenance, int url_char_cost) {
  if (provenance != Provenance::kHuman && urls.empty()) {
    fail(ErrorCode::kPreconditionViolation, "machine notes must cite at least one URL");
  }
  GeneratedNote note;
  note.budget_chars = compute_budget(char_limit, static_cast<int>(urls.size()), url_char_cost);
  note.full_text = std::string(text);
  std::tie(note.text, note.truncated) = truncate_graphemes(text, note.budget_chars);
  note.urls = std::move(urls);
  note.provenance = provenance;
  return note;
}

GeneratedNote finalize_note(const GeneratedNote& note, int char_limit, int url_char_cost) {
  GeneratedNote out = finalize_note(note.text, note.urls, char_limit, note.provenance, url_char_cost);
  out.post_id = note.post_id;
  out.full_text = note.full_text.empty() ? note.text : note.full_text;
  out.truncated = out.truncated || note.truncated;
  return out;
}

}  // namespace crowdnotes
