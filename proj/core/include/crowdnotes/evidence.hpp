#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "crowdnotes/domain.hpp"

namespace crowdnotes {

class Gateway;

/// Search queries planned for one post.
struct QueryPlan {
  std::string post_id;
  std::vector<std::string> queries;
  std::string generator_tag;
};

/// Deduplicated search results in first-seen order. Each item carries its
/// source_query and search_rank.
struct CandidatePool {
  std::vector<EvidenceRef> items;
};

struct SelectionRound {
  int round = 0;
  std::vector<int> shown_indices;  // 1-based positions in the original pool
  std::string raw_reply;
  std::string chosen_url;
  bool fallback = false;  // reply unparseable twice, index 1 taken
};

struct UtilitySelection {
  std::vector<EvidenceRef> selected;  // pick order
  bool quota_shortfall = false;
  std::vector<SelectionRound> audit;
};

// Non-empty lines, list markers stripped, deduplicated case-insensitively.
std::vector<std::string> parse_query_lines(std::string_view reply);

// Asks the chat model for n queries, one per line. If fewer than n distinct
// queries come back the raw post text is appended as a final query.
QueryPlan generate_queries(const FlaggedPost& post, int n, Gateway& gateway,
                           std::string_view model_tag);

// The "- Query Diversity" ablation: the post text is the only query.
QueryPlan single_query_plan(const FlaggedPost& post);

// One search per query (with `before = cutoff`), merged in query order then
// rank order, keeping the first occurrence of each canonical URL. Results
// with malformed URLs are dropped. Throws kEmptyPool.
CandidatePool build_pool(const QueryPlan& plan, int top_k, std::optional<Timestamp> cutoff,
                         Gateway& gateway);

// Exactly one integer in [1, max_index], else nullopt.
std::optional<int> parse_selection_index(std::string_view reply, int max_index);

// min(tau, |pool|) rounds of "pick the most useful remaining item". The
// prompt is re-rendered over the remaining items every round.
UtilitySelection select_by_utility(const FlaggedPost& post, const CandidatePool& pool, int tau,
                                   Gateway& gateway, std::string_view model_tag);

// The "- Utility Judgment" ablation: first tau pool items, no chat calls.
UtilitySelection select_first(const CandidatePool& pool, int tau);

struct EvidenceModels {
  std::string query_generator;
  std::string selector;
};

struct AcquiredEvidence {
  QueryPlan plan;
  CandidatePool pool;
  UtilitySelection selection;
};

// Full automated acquisition for the three AUTOMATE* modes.
AcquiredEvidence acquire_evidence(const FlaggedPost& post, int tau, const RunConfig& config,
                                  std::optional<Timestamp> cutoff, Gateway& gateway,
                                  const EvidenceModels& models);

}  // namespace crowdnotes
