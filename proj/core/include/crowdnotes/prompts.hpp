#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crowdnotes/domain.hpp"

// Prompt assets. Every template is versioned; bump the version whenever the
// wording changes so recorded cassettes are not silently reused.
namespace crowdnotes::prompts {

struct PromptAsset {
  std::string_view name;
  std::string_view version;
  std::string_view system;
  std::string_view user;
};

struct RenderedPrompt {
  std::string system;
  std::string user;

  friend bool operator==(const RenderedPrompt&, const RenderedPrompt&) = default;
};

const PromptAsset& utility_selection();
const PromptAsset& note_generation();
const PromptAsset& relevance();
const PromptAsset& correctness();
const PromptAsset& helpfulness();
const PromptAsset& query_generation();
const PromptAsset& pairwise_comparison();

std::vector<const PromptAsset*> all_assets();

// Single-pass substitution of {name} placeholders present in `values`.
// Unknown braces are copied through, and substituted text is never
// rescanned.
std::string fill(std::string_view tmpl, const std::map<std::string, std::string>& values);

// "[S{index}] {url} (chunk {chunk_id})\n{text}" blocks, 1-based.
std::string snippet_blocks(std::span<const EvidenceChunk> chunks);

// "[{idx}] Title: ..." candidate blocks, 1-based.
std::string candidate_blocks(std::span<const EvidenceRef> items);

RenderedPrompt render_utility_selection(int round_no, std::string_view tweet,
                                        std::span<const EvidenceRef> remaining);
RenderedPrompt render_note_generation(std::string_view query, std::span<const EvidenceChunk> chunks,
                                      int budget_chars);
RenderedPrompt render_relevance(std::string_view query, std::span<const EvidenceChunk> chunks);
RenderedPrompt render_correctness(std::string_view note, std::span<const EvidenceChunk> chunks);
RenderedPrompt render_helpfulness(std::string_view tweet_text, std::string_view note_text);
RenderedPrompt render_query_generation(std::string_view tweet, int n);
RenderedPrompt render_pairwise(std::string_view tweet, std::span<const EvidenceRef> set_a,
                               std::span<const EvidenceRef> set_b);

}  // namespace crowdnotes::prompts
