#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "crowdnotes/bench.hpp"

namespace crowdnotes {

struct ReportContext {
  std::string gateway_mode;
  std::optional<std::filesystem::path> cassette_path;
  std::optional<std::string> cassette_digest;
  std::uint64_t seed = 0;
  std::string scorer;
};

struct ModeReport {
  RunResult run;
  StageMetrics metrics;
};

// Row per mode: setting, then n/R/C/H for each subset, then overall H.
std::string results_csv(std::span<const ModeReport> reports);
std::string pairwise_csv(std::string_view setting, const PairwiseSummary& summary);

nlohmann::json config_json(const RunConfig& config);
nlohmann::json manifest_json(std::span<const ModeReport> reports, const ReportContext& context,
                             const std::vector<LedgerEntry>* extra_ledger = nullptr);

std::string outcomes_jsonl(const RunResult& run);
std::string ledger_jsonl(std::span<const LedgerEntry> ledger);
std::string skip_log_jsonl(const RunResult& run);
std::string selection_audit_jsonl(const RunResult& run);
std::string notes_jsonl(const RunResult& run);

// Writes results.csv, manifest.json and per-mode outcome, ledger, skip,
// selection-audit and note logs into `out_dir`. Output contains no wall
// clock values, so replayed runs are byte-identical. Throws kIoError.
void emit_report(std::span<const ModeReport> reports, const ReportContext& context,
                 const std::filesystem::path& out_dir);

void emit_pairwise_report(std::string_view setting, const ComparisonRun& run,
                          const ReportContext& context, const std::filesystem::path& out_dir);

void write_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace crowdnotes
