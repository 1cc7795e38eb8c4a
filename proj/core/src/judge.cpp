#include "crowdnotes/judge.hpp"

#include <algorithm>
#include <random>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "crowdnotes/digest.hpp"
#include "crowdnotes/errors.hpp"
#include "crowdnotes/gateway.hpp"
#include "crowdnotes/notegen.hpp"
#include "crowdnotes/prompts.hpp"
#include "crowdnotes/text.hpp"

namespace crowdnotes {

namespace {

constexpr std::string_view kDecisionReprompt =
    "\n\nYour previous reply did not end with a decision. End your reply with "
    "\"Final decision: yes\" or \"Final decision: no\".";

constexpr std::string_view kPairwiseReprompt =
    "\n\nYour previous reply did not end with a valid label. End your reply with a final line "
    "containing exactly one of: A, B, TIE";

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

void require(bool condition, const char* message) {
  if (!condition) fail(ErrorCode::kPreconditionViolation, message);
}

Verdict verdict_from(Decision d, bool yes_passes) {
  return (d == Decision::kYes) == yes_passes ? Verdict::kPass : Verdict::kFail;
}

}  // namespace

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::kPass: return "PASS";
    case Verdict::kFail: return "FAIL";
    case Verdict::kNotEvaluated: return "NOT_EVALUATED";
  }
  return "?";
}

std::string_view to_string(PairwiseResult result) {
  switch (result) {
    case PairwiseResult::kWin: return "WIN";
    case PairwiseResult::kLose: return "LOSE";
    case PairwiseResult::kTie: return "TIE";
  }
  return "?";
}

bool EvalOutcome::gating_consistent() const {
  if (relevance == Verdict::kNotEvaluated) return false;
  if ((correctness == Verdict::kNotEvaluated) != (relevance == Verdict::kFail)) return false;
  if ((helpfulness == Verdict::kNotEvaluated) != (correctness != Verdict::kPass)) return false;
  return true;
}

Decision parse_decision(std::string_view reply) {
  static constexpr std::string_view kMarker = "final decision:";
  std::string lower = text::ascii_lower(reply);
  std::size_t at = lower.rfind(kMarker);
  if (at == std::string::npos) {
    fail(ErrorCode::kUnparseableDecision, "no 'Final decision:' marker in reply");
  }
  std::size_t p = at + kMarker.size();
  while (p < lower.size() && (std::isspace(static_cast<unsigned char>(lower[p])) ||
                              std::string_view("*\"'`[(_").find(lower[p]) != std::string_view::npos)) {
    ++p;
  }
  auto token_is = [&](std::string_view word) {
    return lower.compare(p, word.size(), word) == 0 &&
           (p + word.size() == lower.size() || !is_word_char(lower[p + word.size()]));
  };
  if (token_is("yes")) return Decision::kYes;
  if (token_is("no")) return Decision::kNo;
  fail(ErrorCode::kUnparseableDecision, "no yes/no token after the decision marker");
}

std::optional<std::string> parse_pairwise_label(std::string_view reply) {
  std::string_view last;
  std::size_t pos = 0;
  while (pos <= reply.size()) {
    std::size_t nl = reply.find('\n', pos);
    if (nl == std::string_view::npos) nl = reply.size();
    auto line = text::trim(reply.substr(pos, nl - pos));
    if (!line.empty()) last = line;
    pos = nl + 1;
  }
  std::string label = text::ascii_lower(last);
  for (std::string_view prefix : {"final answer:", "answer:", "final decision:", "label:"}) {
    if (label.starts_with(prefix)) label = std::string(text::trim(label.substr(prefix.size())));
  }
  label.erase(std::remove_if(label.begin(), label.end(),
                             [](char c) {
                               return std::string_view("*\"'`.()[]").find(c) !=
                                      std::string_view::npos;
                             }),
              label.end());
  label = std::string(text::trim(label));
  if (label.starts_with("set ")) label = label.substr(4);
  if (label == "a") return "A";
  if (label == "b") return "B";
  if (label == "tie") return "TIE";
  return std::nullopt;
}

std::string evidence_digest(std::span<const EvidenceChunk> chunks) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : chunks) arr.push_back({c.url, c.chunk_index, c.text});
  return sha256_hex(arr.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace));
}

Judge::Judge(Gateway& gateway, JudgeModels models)
    : gateway_(&gateway), models_(std::move(models)) {}

Decision Judge::ask_decision(const std::string& system, const std::string& user,
                             const std::string& model, StageTranscript* transcript) {
  ChatRequest request{system, user, 0.0, std::nullopt, model, std::nullopt};
  for (int attempt = 0; attempt < 2; ++attempt) {
    if (attempt == 1) request.user_prompt += kDecisionReprompt;
    std::string reply = gateway_->chat(request);
    if (transcript) transcript->replies.push_back(reply);
    try {
      return parse_decision(reply);
    } catch (const Error& e) {
      if (attempt == 1) throw;
    }
  }
  fail(ErrorCode::kUnparseableDecision, "unreachable");
}

Verdict Judge::judge_relevance(const FlaggedPost& post, std::span<const EvidenceChunk> chunks,
                               StageTranscript* transcript) {
  require(!chunks.empty(), "relevance needs at least one evidence chunk");
  if (transcript) transcript->stage = "relevance";
  std::string key = post.post_id + '\x1f' + evidence_digest(chunks) + '\x1f' + models_.relevance;
  {
    std::lock_guard lock(cache_mutex_);
    if (auto it = relevance_cache_.find(key); it != relevance_cache_.end()) return it->second;
  }
  auto prompt = prompts::render_relevance(post.text, chunks);
  Verdict verdict;
  try {
    verdict = verdict_from(ask_decision(prompt.system, prompt.user, models_.relevance, transcript),
                           true);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kUnparseableDecision) throw;
    spdlog::warn("post {}: relevance reply unparseable, scoring FAIL", post.post_id);
    if (transcript) transcript->error = e.what();
    verdict = Verdict::kFail;
  }
  std::lock_guard lock(cache_mutex_);
  return relevance_cache_.emplace(key, verdict).first->second;
}

Verdict Judge::judge_correctness(Verdict relevance, std::string_view note_text,
                                 std::span<const EvidenceChunk> chunks,
                                 StageTranscript* transcript) {
  require(relevance == Verdict::kPass, "correctness is only judged after relevance passes");
  require(!chunks.empty(), "correctness needs at least one evidence chunk");
  if (transcript) transcript->stage = "correctness";
  auto prompt = prompts::render_correctness(note_text, chunks);
  try {
    // "Does the note distort the sources?" -- yes means the note fails.
    return verdict_from(
        ask_decision(prompt.system, prompt.user, models_.correctness, transcript), false);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kUnparseableDecision) throw;
    spdlog::warn("correctness reply unparseable, scoring FAIL");
    if (transcript) transcript->error = e.what();
    return Verdict::kFail;
  }
}

Verdict Judge::judge_helpfulness(Verdict correctness, const FlaggedPost& post,
                                 std::string_view note_text, StageTranscript* transcript) {
  require(correctness == Verdict::kPass, "helpfulness is only judged after correctness passes");
  if (transcript) transcript->stage = "helpfulness";
  std::string body(note_text);
  if (text::contains_url(body)) body = text::strip_urls(body);
  auto prompt = prompts::render_helpfulness(post.text, body);
  try {
    return verdict_from(
        ask_decision(prompt.system, prompt.user, models_.helpfulness, transcript), true);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kUnparseableDecision) throw;
    spdlog::warn("post {}: helpfulness reply unparseable, scoring FAIL", post.post_id);
    if (transcript) transcript->error = e.what();
    return Verdict::kFail;
  }
}

Verdict Judge::judge_helpfulness(Verdict correctness, const FlaggedPost& post,
                                 const GeneratedNote& note, StageTranscript* transcript) {
  return judge_helpfulness(correctness, post, std::string_view(note.text), transcript);
}

Verdict Judge::judge_helpfulness(Verdict correctness, const FlaggedPost& post,
                                 const NoteRecord& note, StageTranscript* transcript) {
  // Human notes carry their URLs inline; judge the text alone, cut to the
  // default 280-character budget.
  auto finalized = finalize_note(text::strip_urls(note.text), note.urls, 280, Provenance::kHuman);
  return judge_helpfulness(correctness, post, std::string_view(finalized.text), transcript);
}

EvalOutcome Judge::evaluate_note(const EvalSample& sample) {
  EvalOutcome outcome;
  outcome.sample_id = sample.sample_id;

  auto run_stage = [&](std::string_view stage, auto&& body) -> Verdict {
    StageTranscript transcript;
    transcript.stage = std::string(stage);
    Verdict v = Verdict::kFail;
    try {
      v = body(&transcript);
    } catch (const Error& e) {
      spdlog::warn("sample {}: {} stage failed: {}", sample.sample_id, stage, e.what());
      transcript.error = std::string(to_string(e.code())) + ": " + e.what();
    }
    transcript.stage = std::string(stage);
    outcome.transcripts.push_back(std::move(transcript));
    return v;
  };

  outcome.relevance = run_stage("relevance", [&](StageTranscript* t) {
    if (sample.chunks.empty()) {
      fail(ErrorCode::kAllSourcesFailed, "no evidence chunks for sample " + sample.sample_id);
    }
    return judge_relevance(sample.post, sample.chunks, t);
  });
  if (outcome.relevance != Verdict::kPass) return outcome;

  outcome.correctness = run_stage("correctness", [&](StageTranscript* t) {
    return judge_correctness(outcome.relevance, sample.note_text, sample.chunks, t);
  });
  if (outcome.correctness != Verdict::kPass) return outcome;

  outcome.helpfulness = run_stage("helpfulness", [&](StageTranscript* t) {
    return judge_helpfulness(outcome.correctness, sample.post,
                             std::string_view(sample.helpfulness_text), t);
  });
  return outcome;
}

PairwiseOutcome Judge::compare_evidence(const FlaggedPost& post,
                                        std::span<const EvidenceRef> human,
                                        std::span<const EvidenceRef> machine, std::uint64_t seed) {
  require(!human.empty() && !machine.empty(), "pairwise comparison needs two non-empty sets");
  PairwiseOutcome out;
  out.post_id = post.post_id;
  out.seed = seed;
  std::mt19937_64 rng(seed);
  out.machine_shown_first = (rng() & 1U) == 0;

  auto prompt = out.machine_shown_first ? prompts::render_pairwise(post.text, machine, human)
                                        : prompts::render_pairwise(post.text, human, machine);
  ChatRequest request{prompt.system, prompt.user, 0.0, std::nullopt, models_.pairwise, seed};
  std::optional<std::string> label;
  for (int attempt = 0; attempt < 2 && !label; ++attempt) {
    if (attempt == 1) request.user_prompt += kPairwiseReprompt;
    out.rationale = gateway_->chat(request);
    label = parse_pairwise_label(out.rationale);
  }
  if (!label) {
    spdlog::warn("post {}: pairwise reply unparseable, scoring TIE", post.post_id);
    out.fallback = true;
    out.result = PairwiseResult::kTie;
  } else if (*label == "TIE") {
    out.result = PairwiseResult::kTie;
  } else {
    bool a_won = *label == "A";
    out.result = a_won == out.machine_shown_first ? PairwiseResult::kWin : PairwiseResult::kLose;
  }
  return out;
}

std::size_t Judge::relevance_cache_size() const {
  std::lock_guard lock(cache_mutex_);
  return relevance_cache_.size();
}

}  // namespace crowdnotes
