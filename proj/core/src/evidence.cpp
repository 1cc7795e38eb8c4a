#include "crowdnotes/evidence.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

#include <spdlog/spdlog.h>

#include "crowdnotes/errors.hpp"
#include "crowdnotes/gateway.hpp"
#include "crowdnotes/prompts.hpp"
#include "crowdnotes/text.hpp"

namespace crowdnotes {

namespace {

// "1. ", "2) ", "- ", "* ", "• " and surrounding quotes.
std::string_view strip_list_marker(std::string_view line) {
  line = text::trim(line);
  std::size_t i = 0;
  while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
  if (i > 0 && i + 1 < line.size() && (line[i] == '.' || line[i] == ')') && line[i + 1] == ' ') {
    line.remove_prefix(i + 2);
  } else if (line.size() > 2 && (line[0] == '-' || line[0] == '*') && line[1] == ' ') {
    line.remove_prefix(2);
  } else if (line.starts_with("•")) {
    line.remove_prefix(std::string_view("•").size());
  }
  line = text::trim(line);
  if (line.size() >= 2 && line.front() == '"' && line.back() == '"') {
    line = text::trim(line.substr(1, line.size() - 2));
  }
  return line;
}

std::string dedup_key(std::string_view query) {
  return text::case_fold(text::collapse_whitespace(query));
}

}  // namespace

std::vector<std::string> parse_query_lines(std::string_view reply) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  std::size_t pos = 0;
  while (pos <= reply.size()) {
    std::size_t nl = reply.find('\n', pos);
    if (nl == std::string_view::npos) nl = reply.size();
    std::string query = text::collapse_whitespace(strip_list_marker(reply.substr(pos, nl - pos)));
    pos = nl + 1;
    if (!query.empty() && seen.insert(dedup_key(query)).second) out.push_back(std::move(query));
  }
  return out;
}

QueryPlan generate_queries(const FlaggedPost& post, int n, Gateway& gateway,
                           std::string_view model_tag) {
  if (n < 1) fail(ErrorCode::kInvalidArgument, "number of queries must be at least 1");
  auto prompt = prompts::render_query_generation(post.text, n);
  ChatRequest request{prompt.system, prompt.user, 0.0, std::nullopt, std::string(model_tag),
                      std::nullopt};
  auto queries = parse_query_lines(gateway.chat(request));
  if (queries.size() > static_cast<std::size_t>(n)) queries.resize(static_cast<std::size_t>(n));

  if (queries.size() < static_cast<std::size_t>(n)) {
    std::string fallback = text::collapse_whitespace(post.text);
    bool already = std::any_of(queries.begin(), queries.end(), [&](const std::string& q) {
      return dedup_key(q) == dedup_key(fallback);
    });
    if (!fallback.empty() && !already) queries.push_back(std::move(fallback));
  }
  if (queries.empty()) {
    fail(ErrorCode::kDegenerateQueries, "no usable query for post " + post.post_id);
  }
  return QueryPlan{post.post_id, std::move(queries), std::string(model_tag)};
}

QueryPlan single_query_plan(const FlaggedPost& post) {
  std::string query = text::collapse_whitespace(post.text);
  if (query.empty()) fail(ErrorCode::kDegenerateQueries, "post " + post.post_id + " has no text");
  return QueryPlan{post.post_id, {std::move(query)}, "post-text"};
}

CandidatePool build_pool(const QueryPlan& plan, int top_k, std::optional<Timestamp> cutoff,
                         Gateway& gateway) {
  if (plan.queries.empty()) fail(ErrorCode::kPreconditionViolation, "query plan is empty");
  if (top_k < 1) fail(ErrorCode::kInvalidArgument, "top_k must be at least 1");
  CandidatePool pool;
  std::unordered_set<std::string> admitted;
  for (const auto& query : plan.queries) {
    auto items = gateway.search(SearchRequest{query, top_k, cutoff});
    for (std::size_t rank = 0; rank < items.size(); ++rank) {
      const auto& item = items[rank];
      std::string url;
      try {
        url = normalize_url(item.url);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kMalformedUrl) throw;
        spdlog::debug("dropping search result with malformed url '{}'", item.url);
        continue;
      }
      // Defensive: a provider that ignores the date bound must not leak
      // later sources into the pool.
      if (cutoff && item.published_at && *item.published_at > *cutoff) continue;
      if (!admitted.insert(url).second) continue;
      pool.items.push_back(EvidenceRef{url, item.title, item.snippet, query,
                                       static_cast<int>(rank + 1), item.published_at});
    }
  }
  if (pool.items.empty()) {
    fail(ErrorCode::kEmptyPool, "searches returned no usable results for post " + plan.post_id);
  }
  return pool;
}

std::optional<int> parse_selection_index(std::string_view reply, int max_index) {
  std::optional<long long> found;
  std::size_t i = 0;
  while (i < reply.size()) {
    if (!std::isdigit(static_cast<unsigned char>(reply[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < reply.size() && std::isdigit(static_cast<unsigned char>(reply[j]))) ++j;
    if (found) return std::nullopt;  // more than one integer
    if (j - i > 9) return std::nullopt;
    bool negative = i > 0 && reply[i - 1] == '-';
    found = std::stoll(std::string(reply.substr(i, j - i))) * (negative ? -1 : 1);
    i = j;
  }
  if (!found || *found < 1 || *found > max_index) return std::nullopt;
  return static_cast<int>(*found);
}

UtilitySelection select_by_utility(const FlaggedPost& post, const CandidatePool& pool, int tau,
                                   Gateway& gateway, std::string_view model_tag) {
  if (pool.items.empty()) fail(ErrorCode::kPreconditionViolation, "candidate pool is empty");
  if (tau < 1) fail(ErrorCode::kInvalidArgument, "quota must be at least 1");

  UtilitySelection out;
  out.quota_shortfall = static_cast<std::size_t>(tau) > pool.items.size();
  const std::size_t rounds = std::min(static_cast<std::size_t>(tau), pool.items.size());

  std::vector<int> remaining(pool.items.size());
  for (std::size_t i = 0; i < remaining.size(); ++i) remaining[i] = static_cast<int>(i);

  for (std::size_t r = 1; r <= rounds; ++r) {
    std::vector<EvidenceRef> shown;
    SelectionRound audit;
    audit.round = static_cast<int>(r);
    for (int idx : remaining) {
      shown.push_back(pool.items[static_cast<std::size_t>(idx)]);
      audit.shown_indices.push_back(idx + 1);
    }
    const int max_index = static_cast<int>(shown.size());
    auto prompt = prompts::render_utility_selection(static_cast<int>(r), post.text, shown);
    ChatRequest request{prompt.system, prompt.user, 0.0, std::nullopt, std::string(model_tag),
                        std::nullopt};
    audit.raw_reply = gateway.chat(request);
    auto choice = parse_selection_index(audit.raw_reply, max_index);
    if (!choice) {
      request.user_prompt += "\n\nYour previous reply could not be parsed. Reply with a single "
                             "integer between 1 and " +
                             std::to_string(max_index) + ".";
      audit.raw_reply = gateway.chat(request);
      choice = parse_selection_index(audit.raw_reply, max_index);
    }
    if (!choice) {
      spdlog::warn("post {}: selection round {} unparseable, taking index 1", post.post_id, r);
      audit.fallback = true;
      choice = 1;
    }
    auto pick = remaining.begin() + (*choice - 1);
    const EvidenceRef& chosen = pool.items[static_cast<std::size_t>(*pick)];
    audit.chosen_url = chosen.url;
    out.selected.push_back(chosen);
    remaining.erase(pick);
    out.audit.push_back(std::move(audit));
  }
  return out;
}

UtilitySelection select_first(const CandidatePool& pool, int tau) {
  if (pool.items.empty()) fail(ErrorCode::kPreconditionViolation, "candidate pool is empty");
  if (tau < 1) fail(ErrorCode::kInvalidArgument, "quota must be at least 1");
  UtilitySelection out;
  out.quota_shortfall = static_cast<std::size_t>(tau) > pool.items.size();
  std::size_t n = std::min(static_cast<std::size_t>(tau), pool.items.size());
  out.selected.assign(pool.items.begin(), pool.items.begin() + static_cast<std::ptrdiff_t>(n));
  return out;
}

AcquiredEvidence acquire_evidence(const FlaggedPost& post, int tau, const RunConfig& config,
                                  std::optional<Timestamp> cutoff, Gateway& gateway,
                                  const EvidenceModels& models) {
  AcquiredEvidence out;
  switch (config.mode) {
    case RunMode::kAutomate:
      out.plan = generate_queries(post, config.num_queries, gateway, models.query_generator);
      break;
    case RunMode::kAutomateNoDiversity:
    case RunMode::kAutomateNoUtility:
      out.plan = single_query_plan(post);
      break;
    default:
      fail(ErrorCode::kPreconditionViolation,
           std::string("mode ") + std::string(to_string(config.mode)) +
               " does not acquire evidence automatically");
  }
  out.pool = build_pool(out.plan, config.top_k, cutoff, gateway);
  out.selection = config.mode == RunMode::kAutomateNoUtility
                      ? select_first(out.pool, tau)
                      : select_by_utility(post, out.pool, tau, gateway, models.selector);
  return out;
}

}  // namespace crowdnotes
