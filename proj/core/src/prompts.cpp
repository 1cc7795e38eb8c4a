#include "crowdnotes/prompts.hpp"

#include <string>

namespace crowdnotes::prompts {

namespace {

constexpr std::string_view kUtilitySystem =
    "You are a careful selector. Output exactly ONE integer as instructed.";

constexpr std::string_view kUtilityUser =
    "You are selecting one source (healthcare-related Community Note utility).\n"
    "This is selection round #{round_no}. Choose exactly ONE result that has the highest "
    "utility.\n"
    "\n"
    "## Utility should reflect whether the search result is:\n"
    "- Relevant to the tweet's topic.\n"
    "- Likely to add meaningful background or clarification.\n"
    "- Reliable enough to be worth retrieving.\n"
    "\n"
    "## OUTPUT FORMAT (critical):\n"
    "- Output EXACTLY one integer, the index of your chosen item (1..{len(items_remaining)}).\n"
    "- No extra words. No numbering other than the single integer. No explanations.\n"
    "\n"
    "## Tweet:\n"
    "{tweet}\n"
    "\n"
    "## Search Results (candidates):\n"
    "{items}";

constexpr std::string_view kNoteSystem =
    "Community notes is a collaborative way to add helpful context to posts and keep people "
    "better informed. Now you are a highly experienced community note writer.";

constexpr std::string_view kNoteUser =
    "Task: Write a community note based ONLY on the source snippets below.\n"
    "\n"
    "Hard constraints:\n"
    "- The note MUST be in English.\n"
    "- DO NOT include any URLs in the note.\n"
    "- The note MUST be a single line (no line breaks, no bullets).\n"
    "- Note length MUST be \u2264 {budget_chars} characters. Do not exceed this budget.\n"
    "- Be specific, objective, and verifiable.\n"
    "\n"
    "Tweet:\n"
    "{query}\n"
    "\n"
    "Source snippets:\n"
    "{snippets}\n"
    "\n"
    "Output only the note content. Remember: length \u2264 {budget_chars}, no URLs.";

constexpr std::string_view kInspectorSystem = "You are a very meticulous inspector";

constexpr std::string_view kRelevanceUser =
    "You are given a Tweet and one or more Source snippets:\n"
    "Tweet:\n"
    "{query}\n"
    "\n"
    "Source snippets:\n"
    "{snippets}\n"
    "\n"
    "Task: Determine whether any of the Source snippets adds meaningful factual background, "
    "clarification, or supporting information that helps better understand or evaluate the "
    "claim made in the Tweet.\n"
    "1. Check each snippet independently.\n"
    "2. If at least one snippet meets the requirements, output \"Final decision: yes\"; "
    "otherwise output \"Final decision: no\".";

constexpr std::string_view kCorrectnessUser =
    "You are given a Community note and one or more Source snippets:\n"
    "\n"
    "Community Note:\n"
    "{note}\n"
    "\n"
    "Source snippets:\n"
    "{snippets}\n"
    "\n"
    "Task: Decide whether the Community note distorts the information in any of the provided "
    "Source snippets.\n"
    "1. Check each snippet independently.\n"
    "2. If at least one distortion is found, output \"Final decision: yes\"; otherwise output "
    "\"Final decision: no\".";

constexpr std::string_view kHelpfulnessSystem = "You are a precise text classifier.";

constexpr std::string_view kHelpfulnessUser =
    "You are given a Tweet and its corresponding Note:\n"
    "\n"
    "Tweet: {tweet_text}\n"
    "Note: {note_text}\n"
    "\n"
    "The purpose of note is to add helpful context to tweet and keep people better informed.\n"
    "Your task is to evaluate whether the Note is Helpful or Not Helpful based on the following "
    "criteria:\n"
    "\n"
    "**Helpful Criteria:**\n"
    "- Clear and/or well-written\n"
    "- Cites high-quality sources\n"
    "- Directly addresses the Tweet's claim\n"
    "- Provides important context\n"
    "- Neutral or unbiased language\n"
    "- Other (any additional positive reason)\n"
    "\n"
    "**Not Helpful Criteria:**\n"
    "- Incorrect information\n"
    "- Sources missing or unreliable\n"
    "- Misses key points or irrelevant\n"
    "- Hard to understand\n"
    "- Argumentative or biased language\n"
    "- Spam, harassment, or abuse\n"
    "- Sources do not support note\n"
    "- Opinion or speculation\n"
    "- Note not needed on this Tweet\n"
    "- Other (any additional negative reason)\n"
    "\n"
    "Instructions:\n"
    "1. Carefully read the Tweet and the Note.\n"
    "2. Analyze the Note using the Helpful and Not Helpful criteria above.\n"
    "3. Respond with \"Final decision: yes\" (if Helpful) or \"Final decision: no\" (if Not "
    "Helpful).";

constexpr std::string_view kQuerySystem =
    "You write web search queries for fact-checking social media posts.";

constexpr std::string_view kQueryUser =
    "Write {n} diverse web search queries that would help verify or refute the claims in the "
    "tweet below. Each query should cover a different aspect of the claim.\n"
    "Output one query per line, with no numbering, bullets, quotes, or extra text.\n"
    "\n"
    "Tweet:\n"
    "{tweet}";

constexpr std::string_view kPairwiseSystem = "You are an impartial evaluator of evidence quality.";

constexpr std::string_view kPairwiseUser =
    "Two sets of evidence sources were collected to write a Community Note for the tweet below.\n"
    "\n"
    "Tweet:\n"
    "{tweet}\n"
    "\n"
    "Evidence set A:\n"
    "{set_a}\n"
    "\n"
    "Evidence set B:\n"
    "{set_b}\n"
    "\n"
    "Task: Decide which evidence set is more useful for adding accurate, relevant and reliable "
    "context to the tweet. You may open the sources if you can browse. Explain briefly.\n"
    "Answer on the final line with exactly one of: A, B, TIE";

const PromptAsset kUtilityAsset{"utility_selection", "utility_selection/v1", kUtilitySystem,
                                kUtilityUser};
const PromptAsset kNoteAsset{"note_generation", "note_generation/v1", kNoteSystem, kNoteUser};
const PromptAsset kRelevanceAsset{"relevance", "relevance/v1", kInspectorSystem, kRelevanceUser};
const PromptAsset kCorrectnessAsset{"correctness", "correctness/v1", kInspectorSystem,
                                    kCorrectnessUser};
const PromptAsset kHelpfulnessAsset{"helpfulness", "helpfulness/v1", kHelpfulnessSystem,
                                    kHelpfulnessUser};
const PromptAsset kQueryAsset{"query_generation", "query_generation/v1", kQuerySystem,
                              kQueryUser};
const PromptAsset kPairwiseAsset{"pairwise_comparison", "pairwise_comparison/v1",
                                 kPairwiseSystem, kPairwiseUser};

std::string evidence_list(std::span<const EvidenceRef> refs) {
  std::string out;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    if (i) out += "\n";
    out += "[" + std::to_string(i + 1) + "] ";
    if (refs[i].title && !refs[i].title->empty()) out += *refs[i].title + "\n    URL: ";
    out += refs[i].url;
  }
  return out;
}

RenderedPrompt render(const PromptAsset& asset, const std::map<std::string, std::string>& values) {
  return {std::string(asset.system), fill(asset.user, values)};
}

}  // namespace

const PromptAsset& utility_selection() { return kUtilityAsset; }
const PromptAsset& note_generation() { return kNoteAsset; }
const PromptAsset& relevance() { return kRelevanceAsset; }
const PromptAsset& correctness() { return kCorrectnessAsset; }
const PromptAsset& helpfulness() { return kHelpfulnessAsset; }
const PromptAsset& query_generation() { return kQueryAsset; }
const PromptAsset& pairwise_comparison() { return kPairwiseAsset; }

std::vector<const PromptAsset*> all_assets() {
  return {&kUtilityAsset,     &kNoteAsset,  &kRelevanceAsset, &kCorrectnessAsset,
          &kHelpfulnessAsset, &kQueryAsset, &kPairwiseAsset};
}

std::string fill(std::string_view tmpl, const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    std::size_t open = tmpl.find('{', pos);
    if (open == std::string_view::npos) break;
    std::size_t close = tmpl.find_first_of("{}", open + 1);
    if (close == std::string_view::npos || tmpl[close] == '{') {
      out.append(tmpl.substr(pos, open + 1 - pos));
      pos = open + 1;
      continue;
    }
    auto it = values.find(std::string(tmpl.substr(open + 1, close - open - 1)));
    if (it == values.end()) {
      out.append(tmpl.substr(pos, close + 1 - pos));
    } else {
      out.append(tmpl.substr(pos, open - pos));
      out.append(it->second);
    }
    pos = close + 1;
  }
  out.append(tmpl.substr(pos));
  return out;
}

std::string snippet_blocks(std::span<const EvidenceChunk> chunks) {
  std::string out;
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    if (i) out += "\n\n";
    out += "[S" + std::to_string(i + 1) + "] " + chunks[i].url + " (chunk " +
           std::to_string(chunks[i].chunk_index) + ")\n" + chunks[i].text;
  }
  return out;
}

std::string candidate_blocks(std::span<const EvidenceRef> items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += "\n\n";
    out += "[" + std::to_string(i + 1) + "] Title: " + items[i].title.value_or("") +
           "\n        Snippet: " + items[i].snippet.value_or("") + "\n        URL: " +
           items[i].url;
  }
  return out;
}

RenderedPrompt render_utility_selection(int round_no, std::string_view tweet,
                                        std::span<const EvidenceRef> remaining) {
  return render(kUtilityAsset, {{"round_no", std::to_string(round_no)},
                                {"len(items_remaining)", std::to_string(remaining.size())},
                                {"tweet", std::string(tweet)},
                                {"items", candidate_blocks(remaining)}});
}

RenderedPrompt render_note_generation(std::string_view query, std::span<const EvidenceChunk> chunks,
                                      int budget_chars) {
  return render(kNoteAsset, {{"budget_chars", std::to_string(budget_chars)},
                             {"query", std::string(query)},
                             {"snippets", snippet_blocks(chunks)}});
}

RenderedPrompt render_relevance(std::string_view query, std::span<const EvidenceChunk> chunks) {
  return render(kRelevanceAsset,
                {{"query", std::string(query)}, {"snippets", snippet_blocks(chunks)}});
}

RenderedPrompt render_correctness(std::string_view note, std::span<const EvidenceChunk> chunks) {
  return render(kCorrectnessAsset,
                {{"note", std::string(note)}, {"snippets", snippet_blocks(chunks)}});
}

RenderedPrompt render_helpfulness(std::string_view tweet_text, std::string_view note_text) {
  return render(kHelpfulnessAsset,
                {{"tweet_text", std::string(tweet_text)}, {"note_text", std::string(note_text)}});
}

RenderedPrompt render_query_generation(std::string_view tweet, int n) {
  return render(kQueryAsset, {{"n", std::to_string(n)}, {"tweet", std::string(tweet)}});
}

RenderedPrompt render_pairwise(std::string_view tweet, std::span<const EvidenceRef> set_a,
                               std::span<const EvidenceRef> set_b) {
  return render(kPairwiseAsset, {{"tweet", std::string(tweet)},
                                 {"set_a", evidence_list(set_a)},
                                 {"set_b", evidence_list(set_b)}});
}

}  // namespace crowdnotes::prompts
