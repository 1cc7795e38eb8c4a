#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "crowdnotes/domain.hpp"
#include "crowdnotes/evidence.hpp"
#include "crowdnotes/judge.hpp"
#include "crowdnotes/notegen.hpp"
#include "crowdnotes/retrieval.hpp"

namespace crowdnotes {

class Gateway;
class SimilarityScorer;

struct BenchSample {
  std::string note_id;
  FlaggedPost post;
  NoteRecord human_note;
  NoteStatus subset = NoteStatus::kHelpful;
  std::string topic;
};

struct LoadIssue {
  std::size_t line = 0;
  std::string message;
};

struct LoadedDataset {
  std::vector<BenchSample> samples;
  std::vector<LoadIssue> errors;
};

// One JSON object per line:
//   {note_id, post_id, post_text, post_created_at, note_text,
//    note_created_at, urls[], status, topic}
// Timestamps are ISO-8601 strings or integer epoch milliseconds.
// Throws kSchemaError.
BenchSample parse_sample(const nlohmann::json& record);

// Invalid lines are reported, not fatal. Throws kEmptyDataset when nothing
// loads and kIoError when the file cannot be read.
LoadedDataset parse_dataset(std::istream& in);
LoadedDataset load_dataset(const std::filesystem::path& path);

struct LedgerEntry {
  std::string note_id;
  std::string stage;
  std::string error;

  friend bool operator==(const LedgerEntry&, const LedgerEntry&) = default;
};

/// Everything produced for one sample besides its verdicts.
struct SampleArtifacts {
  std::string note_id;
  int tau = 0;
  std::vector<EvidenceRef> evidence;
  std::vector<EvidenceChunk> chunks;
  std::vector<SkipEntry> skips;
  std::optional<GeneratedNote> note;
  std::optional<QueryPlan> plan;
  std::vector<SelectionRound> selection_audit;
  bool quota_shortfall = false;
};

struct PipelineModels {
  std::string generator = "note-writer";
  EvidenceModels evidence{"query-planner", "utility-selector"};
  JudgeModels judges;
};

/// Shared services for one run. Gateway, scorer and judge must outlive it.
struct Pipeline {
  Gateway& gateway;
  SimilarityScorer& scorer;
  Judge& judge;
  PipelineModels models;
  const Tokenizer* tokenizer = &default_tokenizer();
  int parallelism = 1;
};

struct RunResult {
  RunMode mode = RunMode::kAugment;
  RunConfig config;
  std::vector<EvalOutcome> outcomes;        // sorted by note_id
  std::vector<SampleArtifacts> artifacts;  // same order
  std::vector<LedgerEntry> ledger;         // sorted by note_id, then stage
};

// Evidence for each sample (E_h, or E_m in the automated modes), the note
// (human, or generated and budgeted), then the gated evaluation. Per-sample
// failures gate to relevance FAIL and are logged; they never abort.
RunResult run_mode(std::span<const BenchSample> samples, const RunConfig& config,
                   Pipeline& pipeline);

/// Percentage held as integer hundredths so table values round exactly.
class Percent {
 public:
  Percent() = default;
  static Percent from_hundredths(std::int64_t h) { return Percent{h}; }
  // 100 * k / n rounded half-up to 2 decimals; 0 when n == 0.
  static Percent from_ratio(std::size_t k, std::size_t n);
  // Arithmetic mean of already-rounded values, rounded half-up.
  static Percent mean(std::span<const Percent> values);

  std::int64_t hundredths() const { return hundredths_; }
  double value() const { return static_cast<double>(hundredths_) / 100.0; }
  std::string str() const;

  friend auto operator<=>(const Percent&, const Percent&) = default;

 private:
  explicit Percent(std::int64_t h) : hundredths_(h) {}
  std::int64_t hundredths_ = 0;
};

struct SubsetMetrics {
  NoteStatus subset = NoteStatus::kHelpful;
  std::size_t n = 0;
  std::size_t relevance_pass = 0;
  std::size_t correctness_pass = 0;  // relevance and correctness
  std::size_t helpfulness_pass = 0;  // all three
  Percent r, c, h;
};

/// Cumulative survival rates per subset plus the macro-averaged H.
struct StageMetrics {
  std::vector<SubsetMetrics> subsets;  // HELPFUL then NOT_HELPFUL, when present
  Percent overall_h;

  const SubsetMetrics* find(NoteStatus subset) const;
};

// Outcomes are matched to samples by note_id; a sample without an outcome
// counts as a failure at every stage.
StageMetrics aggregate(std::span<const EvalOutcome> outcomes,
                       std::span<const BenchSample> samples);

struct ComparisonRun {
  std::vector<PairwiseOutcome> outcomes;  // sorted by post_id
  std::vector<LedgerEntry> ledger;
};

// E_h against E_m (acquired with config.mode's evidence policy) per sample.
ComparisonRun run_comparison(std::span<const BenchSample> samples, const RunConfig& config,
                             Pipeline& pipeline, std::uint64_t seed);

struct PairwiseSummary {
  std::size_t n = 0;
  Percent win, lose, tie;
};

PairwiseSummary summarize_pairwise(std::span<const PairwiseOutcome> outcomes);

// Per-comparison seed derived from the run seed and the post id.
std::uint64_t derive_seed(std::uint64_t run_seed, std::string_view key);

}  // namespace crowdnotes
