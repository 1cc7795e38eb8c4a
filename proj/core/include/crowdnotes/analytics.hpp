#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "crowdnotes/domain.hpp"

namespace crowdnotes::analytics {

/// Contiguous per-day counts with explicit zeros.
struct DailySeries {
  Day start;
  std::vector<std::int64_t> counts;

  std::size_t size() const { return counts.size(); }
  Day day_at(std::size_t i) const { return start + std::chrono::days(static_cast<int>(i)); }
};

// Counts posts by UTC calendar day over [first, last]. Throws
// kInvalidArgument if a post falls outside the range or last < first.
DailySeries daily_counts(std::span<const FlaggedPost> posts, Day first, Day last);

struct SpikeParams {
  int window = 28;
  double z = 2.5;
  int min_history = 14;
};

struct Spike {
  Day day;
  std::int64_t count = 0;
  double rolling_mean = 0.0;
  double rolling_std = 0.0;
  double z_value = 0.0;
};

struct SpikeReport {
  SpikeParams params;
  std::vector<Spike> spikes;
};

// A day with at least min_history prior days is compared with the mean and
// sample standard deviation of up to `window` days strictly before it, and
// flagged when std > 0 and (count - mean) / std > z.
SpikeReport detect_spikes(const DailySeries& series, SpikeParams params = {});

struct TermCount {
  std::string term;
  std::int64_t count = 0;

  friend bool operator==(const TermCount&, const TermCount&) = default;
};

// Terms from posts in [center - 1, center + 1], case-folded, punctuation
// stripped, stopwords and tokens under 3 characters removed. Sorted by count
// descending, then term.
std::vector<TermCount> trending_terms(std::span<const FlaggedPost> posts, Day center,
                                      const std::unordered_set<std::string>& stopwords);

struct DelayObservation {
  Timestamp post_time;
  Timestamp first_note_time;
  std::optional<Timestamp> first_status_time;
};

struct DelayRow {
  int percentile = 0;
  double post_to_first_note = 0.0;                    // hours
  std::optional<double> first_note_to_first_status;  // hours
};

struct DelayTable {
  std::vector<DelayRow> rows;  // 25, 50, 75, 90
  std::size_t observations = 0;
  std::size_t with_status = 0;
};

inline constexpr int kDelayPercentiles[] = {25, 50, 75, 90};

// Inclusive linear interpolation between order statistics. `pct` in
// [0, 100]; values must be non-empty.
double percentile_linear(std::vector<double> values, double pct);

// Throws kEmptyInput; kInvalidArgument when a note predates its post.
DelayTable delay_percentiles(std::span<const DelayObservation> observations);

// ---------------------------------------------------------------------------
// Public notes dump ingestion (tab-separated, header row, millisecond
// epochs).

struct DumpNote {
  std::string note_id;
  std::string post_id;
  Timestamp created_at;
};

struct DumpStatus {
  std::string note_id;
  std::optional<Timestamp> first_status_at;
};

// notes-*.tsv: noteId, tweetId, createdAtMillis (other columns ignored).
std::vector<DumpNote> read_notes_tsv(std::istream& in);
// noteStatusHistory-*.tsv: noteId, timestampMillisOfFirstNonNMRStatus.
std::vector<DumpStatus> read_status_tsv(std::istream& in);
// Post metadata: tweetId, createdAtMillis, text.
std::vector<FlaggedPost> read_posts_tsv(std::istream& in);

// One observation per post that has at least one note: the earliest note,
// and that note's first non-"needs more ratings" status if it ever had one.
std::vector<DelayObservation> build_delay_observations(std::span<const FlaggedPost> posts,
                                                       std::span<const DumpNote> notes,
                                                       std::span<const DumpStatus> statuses);

struct AnalysisReport {
  DailySeries series;
  SpikeReport spikes;
  std::vector<std::vector<TermCount>> spike_terms;  // aligned with spikes
  std::optional<DelayTable> delays;
};

AnalysisReport analyze(std::span<const FlaggedPost> posts, std::span<const DumpNote> notes,
                       std::span<const DumpStatus> statuses, SpikeParams params = {},
                       std::size_t terms_per_spike = 10);

std::string daily_series_csv(const DailySeries& series);
std::string delay_table_csv(const DelayTable& table);
std::string spike_report_json(const AnalysisReport& report);

}  // namespace crowdnotes::analytics
