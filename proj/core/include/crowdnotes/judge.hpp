#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crowdnotes/domain.hpp"

namespace crowdnotes {

class Gateway;
struct GeneratedNote;

enum class Verdict { kPass, kFail, kNotEvaluated };
enum class Decision { kYes, kNo };
enum class PairwiseResult { kWin, kLose, kTie };

std::string_view to_string(Verdict verdict);
std::string_view to_string(PairwiseResult result);

struct StageTranscript {
  std::string stage;
  std::vector<std::string> replies;  // one per chat call, reprompts included
  std::optional<std::string> error;
};

/// Staged verdicts. PASS states always form a prefix of
/// (relevance, correctness, helpfulness).
struct EvalOutcome {
  std::string sample_id;
  Verdict relevance = Verdict::kFail;
  Verdict correctness = Verdict::kNotEvaluated;
  Verdict helpfulness = Verdict::kNotEvaluated;
  std::vector<StageTranscript> transcripts;

  bool gating_consistent() const;
};

struct PairwiseOutcome {
  std::string post_id;
  PairwiseResult result = PairwiseResult::kTie;
  std::string rationale;
  bool machine_shown_first = true;
  std::uint64_t seed = 0;
  bool fallback = false;
};

// Last "final decision:" marker (any case) followed by yes/no.
// Throws kUnparseableDecision.
Decision parse_decision(std::string_view reply);

// Final non-empty line reduced to A, B or TIE; nullopt otherwise.
std::optional<std::string> parse_pairwise_label(std::string_view reply);

// Digest over (url, chunk_index, text) of every chunk, in order.
std::string evidence_digest(std::span<const EvidenceChunk> chunks);

struct JudgeModels {
  std::string relevance = "relevance-judge";
  std::string correctness = "correctness-judge";
  std::string helpfulness = "helpfulness-judge";
  std::string pairwise = "pairwise-judge";
};

struct EvalSample {
  std::string sample_id;
  FlaggedPost post;
  std::string note_text;         // untruncated, no URLs
  std::string helpfulness_text;  // after the character budget is applied
  std::vector<EvidenceChunk> chunks;
};

/// Gated relevance -> correctness -> helpfulness evaluation.
///
/// Relevance is a property of (post, evidence) and is cached, so every
/// generator sharing one evidence set sees the same verdict. The cache is
/// first-writer-wins and safe for concurrent use.
class Judge {
 public:
  Judge(Gateway& gateway, JudgeModels models = {});

  // Requires non-empty chunks.
  Verdict judge_relevance(const FlaggedPost& post, std::span<const EvidenceChunk> chunks,
                          StageTranscript* transcript = nullptr);

  // The prompt asks whether the note distorts its sources: yes -> FAIL.
  // Requires relevance == PASS; note_text must be untruncated.
  Verdict judge_correctness(Verdict relevance, std::string_view note_text,
                            std::span<const EvidenceChunk> chunks,
                            StageTranscript* transcript = nullptr);

  // Requires correctness == PASS; note_text must already fit the budget.
  Verdict judge_helpfulness(Verdict correctness, const FlaggedPost& post,
                            std::string_view note_text, StageTranscript* transcript = nullptr);
  Verdict judge_helpfulness(Verdict correctness, const FlaggedPost& post,
                            const GeneratedNote& note, StageTranscript* transcript = nullptr);
  Verdict judge_helpfulness(Verdict correctness, const FlaggedPost& post, const NoteRecord& note,
                            StageTranscript* transcript = nullptr);

  // Never throws for stage failures; they are recorded and gate to FAIL.
  EvalOutcome evaluate_note(const EvalSample& sample);

  // Presentation order is drawn from `seed`; the machine set is labelled A
  // when shown first. Unparseable replies fall back to TIE.
  PairwiseOutcome compare_evidence(const FlaggedPost& post, std::span<const EvidenceRef> human,
                                   std::span<const EvidenceRef> machine, std::uint64_t seed);

  std::size_t relevance_cache_size() const;

 private:
  Decision ask_decision(const std::string& system, const std::string& user,
                        const std::string& model, StageTranscript* transcript);

  Gateway* gateway_;
  JudgeModels models_;
  mutable std::mutex cache_mutex_;
  std::map<std::string, Verdict> relevance_cache_;
};

}  // namespace crowdnotes
