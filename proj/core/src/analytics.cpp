#include "crowdnotes/analytics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "crowdnotes/errors.hpp"
#include "crowdnotes/similarity.hpp"
#include "crowdnotes/text.hpp"

namespace crowdnotes::analytics {

namespace {

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

double hours_between(Timestamp from, Timestamp to) {
  return static_cast<double>((to - from).count()) / 3600.0;
}

// ---- TSV helpers -----------------------------------------------------------

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    std::size_t tab = line.find('\t', pos);
    out.push_back(line.substr(pos, tab == std::string::npos ? std::string::npos : tab - pos));
    if (tab == std::string::npos) break;
    pos = tab + 1;
  }
  if (!out.empty() && !out.back().empty() && out.back().back() == '\r') out.back().pop_back();
  return out;
}

struct TsvTable {
  std::vector<std::string> header;
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;  // (line number, fields)

  std::size_t column(std::string_view name) const {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) fail(ErrorCode::kSchemaError, "missing column " + std::string(name));
    return static_cast<std::size_t>(it - header.begin());
  }
};

TsvTable read_tsv(std::istream& in) {
  TsvTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) {
      table.header = split_tabs(line);
      continue;
    }
    if (text::is_blank(line)) continue;
    table.rows.emplace_back(line_no, split_tabs(line));
  }
  if (table.header.empty()) fail(ErrorCode::kSchemaError, "missing header row");
  return table;
}

const std::string& field(const std::pair<std::size_t, std::vector<std::string>>& row,
                         std::size_t col) {
  if (col >= row.second.size()) {
    fail(ErrorCode::kSchemaError, "line " + std::to_string(row.first) + ": too few columns");
  }
  return row.second[col];
}

std::int64_t parse_millis(const std::string& s, std::size_t line_no) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    fail(ErrorCode::kSchemaError,
         "line " + std::to_string(line_no) + ": bad millisecond timestamp '" + s + "'");
  }
  return v;
}

}  // namespace

DailySeries daily_counts(std::span<const FlaggedPost> posts, Day first, Day last) {
  if (last < first) fail(ErrorCode::kInvalidArgument, "day range is reversed");
  DailySeries series{first, std::vector<std::int64_t>(
                                static_cast<std::size_t>((last - first).count() + 1), 0)};
  for (const auto& post : posts) {
    Day d = day_of(post.created_at);
    if (d < first || d > last) {
      fail(ErrorCode::kInvalidArgument, "post " + post.post_id + " falls outside the day range");
    }
    ++series.counts[static_cast<std::size_t>((d - first).count())];
  }
  return series;
}

// Exact for any realistic daily count and window.
__extension__ using Wide = __int128;

SpikeReport detect_spikes(const DailySeries& series, SpikeParams params) {
  if (params.min_history < 2 || params.window < params.min_history) {
    fail(ErrorCode::kInvalidArgument, "spike detection needs window >= min_history >= 2");
  }
  SpikeReport report{params, {}};
  const auto& c = series.counts;
  for (std::size_t i = static_cast<std::size_t>(params.min_history); i < c.size(); ++i) {
    std::size_t n = std::min(i, static_cast<std::size_t>(params.window));
    // Exact integer moments; floating point only for the reported values.
    Wide sum = 0;
    Wide sum_sq = 0;
    for (std::size_t j = i - n; j < i; ++j) {
      sum += c[j];
      sum_sq += static_cast<Wide>(c[j]) * c[j];
    }
    const Wide nn = static_cast<Wide>(n);
    const Wide spread = nn * sum_sq - sum * sum;  // n (n-1) s^2
    if (spread <= 0) continue;
    const Wide dev = nn * c[i] - sum;  // n * (count - mean)
    if (dev <= 0) continue;
    // (dev/n) / sqrt(spread / (n (n-1))) > z  <=>  dev^2 (n-1) > z^2 n spread
    long double lhs = static_cast<long double>(dev * dev * (nn - 1));
    long double rhs = static_cast<long double>(params.z) * params.z * static_cast<long double>(nn * spread);
    if (!(lhs > rhs)) continue;
    double mean = static_cast<double>(sum) / static_cast<double>(n);
    double var = static_cast<double>(spread) / (static_cast<double>(n) * static_cast<double>(n - 1));
    double sd = std::sqrt(var);
    report.spikes.push_back(
        Spike{series.day_at(i), c[i], mean, sd, (static_cast<double>(c[i]) - mean) / sd});
  }
  return report;
}

std::vector<TermCount> trending_terms(std::span<const FlaggedPost> posts, Day center,
                                      const std::unordered_set<std::string>& stopwords) {
  std::map<std::string, std::int64_t> counts;
  for (const auto& post : posts) {
    Day d = day_of(post.created_at);
    if (d < center - std::chrono::days(1) || d > center + std::chrono::days(1)) continue;
    std::string body = text::strip_urls(post.text);
    for (std::string_view raw : text::split_whitespace(body)) {
      std::string folded = text::case_fold(raw);
      std::string term = text::strip_punctuation(folded);
      if (term.empty() || stopwords.contains(term) || stopwords.contains(folded)) continue;
      if (text::grapheme_count(term) < 3) continue;
      ++counts[term];
    }
  }
  std::vector<TermCount> out;
  out.reserve(counts.size());
  for (auto& [term, count] : counts) out.push_back({term, count});
  std::stable_sort(out.begin(), out.end(),
                   [](const TermCount& a, const TermCount& b) { return a.count > b.count; });
  return out;
}

double percentile_linear(std::vector<double> values, double pct) {
  if (values.empty()) fail(ErrorCode::kEmptyInput, "percentile of an empty sample");
  if (pct < 0.0 || pct > 100.0) fail(ErrorCode::kInvalidArgument, "percentile out of range");
  std::sort(values.begin(), values.end());
  double h = (static_cast<double>(values.size()) - 1.0) * pct / 100.0;
  auto lo = static_cast<std::size_t>(std::floor(h));
  std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

DelayTable delay_percentiles(std::span<const DelayObservation> observations) {
  if (observations.empty()) fail(ErrorCode::kEmptyInput, "no delay observations");
  std::vector<double> to_note;
  std::vector<double> to_status;
  for (const auto& o : observations) {
    if (o.first_note_time < o.post_time) {
      fail(ErrorCode::kInvalidArgument, "a first note predates its post");
    }
    to_note.push_back(hours_between(o.post_time, o.first_note_time));
    if (o.first_status_time) to_status.push_back(hours_between(o.first_note_time, *o.first_status_time));
  }
  DelayTable table;
  table.observations = observations.size();
  table.with_status = to_status.size();
  for (int p : kDelayPercentiles) {
    DelayRow row;
    row.percentile = p;
    row.post_to_first_note = percentile_linear(to_note, p);
    if (!to_status.empty()) row.first_note_to_first_status = percentile_linear(to_status, p);
    table.rows.push_back(row);
  }
  return table;
}

std::vector<DumpNote> read_notes_tsv(std::istream& in) {
  auto table = read_tsv(in);
  auto c_note = table.column("noteId");
  auto c_post = table.column("tweetId");
  auto c_time = table.column("createdAtMillis");
  std::vector<DumpNote> out;
  for (const auto& row : table.rows) {
    out.push_back({field(row, c_note), field(row, c_post),
                   from_epoch_millis(parse_millis(field(row, c_time), row.first))});
  }
  return out;
}

std::vector<DumpStatus> read_status_tsv(std::istream& in) {
  auto table = read_tsv(in);
  auto c_note = table.column("noteId");
  auto c_time = table.column("timestampMillisOfFirstNonNMRStatus");
  std::vector<DumpStatus> out;
  for (const auto& row : table.rows) {
    DumpStatus s{field(row, c_note), std::nullopt};
    const auto& raw = field(row, c_time);
    if (!raw.empty() && raw != "-1") s.first_status_at = from_epoch_millis(parse_millis(raw, row.first));
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<FlaggedPost> read_posts_tsv(std::istream& in) {
  auto table = read_tsv(in);
  auto c_post = table.column("tweetId");
  auto c_time = table.column("createdAtMillis");
  auto c_text = table.column("text");
  std::vector<FlaggedPost> out;
  for (const auto& row : table.rows) {
    std::string body = field(row, c_text);
    // text is free-form; tabs inside it split into extra trailing fields
    if (c_text + 1 == table.header.size()) {
      for (std::size_t i = c_text + 1; i < row.second.size(); ++i) body += " " + row.second[i];
    }
    if (text::is_blank(body)) continue;
    out.push_back(FlaggedPost{field(row, c_post), body,
                              from_epoch_millis(parse_millis(field(row, c_time), row.first))});
  }
  return out;
}

std::vector<DelayObservation> build_delay_observations(std::span<const FlaggedPost> posts,
                                                       std::span<const DumpNote> notes,
                                                       std::span<const DumpStatus> statuses) {
  std::unordered_map<std::string, Timestamp> post_time;
  for (const auto& p : posts) post_time.emplace(p.post_id, p.created_at);

  std::unordered_map<std::string, std::optional<Timestamp>> status_time;
  for (const auto& s : statuses) status_time.emplace(s.note_id, s.first_status_at);

  // earliest note per post; ties go to the smaller note id
  std::map<std::string, const DumpNote*> first_note;
  for (const auto& n : notes) {
    auto& slot = first_note[n.post_id];
    if (!slot || n.created_at < slot->created_at ||
        (n.created_at == slot->created_at && n.note_id < slot->note_id)) {
      slot = &n;
    }
  }

  std::vector<DelayObservation> out;
  for (const auto& [post_id, note] : first_note) {
    auto pt = post_time.find(post_id);
    if (pt == post_time.end() || note->created_at < pt->second) continue;
    DelayObservation obs{pt->second, note->created_at, std::nullopt};
    if (auto st = status_time.find(note->note_id); st != status_time.end() && st->second &&
                                                    *st->second >= note->created_at) {
      obs.first_status_time = st->second;
    }
    out.push_back(obs);
  }
  return out;
}

AnalysisReport analyze(std::span<const FlaggedPost> posts, std::span<const DumpNote> notes,
                       std::span<const DumpStatus> statuses, SpikeParams params,
                       std::size_t terms_per_spike) {
  if (posts.empty()) fail(ErrorCode::kEmptyInput, "no posts to analyze");
  auto [lo, hi] = std::minmax_element(posts.begin(), posts.end(), [](const auto& a, const auto& b) {
    return a.created_at < b.created_at;
  });
  AnalysisReport report;
  report.series = daily_counts(posts, day_of(lo->created_at), day_of(hi->created_at));
  report.spikes = detect_spikes(report.series, params);
  for (const auto& spike : report.spikes.spikes) {
    auto terms = trending_terms(posts, spike.day, english_stopwords());
    if (terms.size() > terms_per_spike) terms.resize(terms_per_spike);
    report.spike_terms.push_back(std::move(terms));
  }
  auto observations = build_delay_observations(posts, notes, statuses);
  if (!observations.empty()) report.delays = delay_percentiles(observations);
  return report;
}

std::string daily_series_csv(const DailySeries& series) {
  std::ostringstream out;
  out << "day,count\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    out << format_date(series.day_at(i)) << ',' << series.counts[i] << '\n';
  }
  return out.str();
}

std::string delay_table_csv(const DelayTable& table) {
  std::ostringstream out;
  out << "percentile,post_to_first_note_hours,first_note_to_first_status_hours\n";
  for (const auto& row : table.rows) {
    out << row.percentile << ',' << fixed(row.post_to_first_note, 1) << ','
        << (row.first_note_to_first_status ? fixed(*row.first_note_to_first_status, 1) : "")
        << '\n';
  }
  return out.str();
}

std::string spike_report_json(const AnalysisReport& report) {
  nlohmann::ordered_json j;
  j["method"] = {
      {"window_days", report.spikes.params.window},
      {"z_threshold", report.spikes.params.z},
      {"min_history_days", report.spikes.params.min_history},
      {"window_includes_current_day", false},
      {"std", "sample (n-1)"},
      {"percentiles", "linear interpolation, inclusive"},
      {"stopwords", std::string(kStopwordListVersion)},
  };
  j["range"] = {{"start", format_date(report.series.start)},
                {"end", format_date(report.series.day_at(report.series.size() - 1))},
                {"days", report.series.size()}};
  nlohmann::ordered_json spikes = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < report.spikes.spikes.size(); ++i) {
    const auto& s = report.spikes.spikes[i];
    nlohmann::ordered_json terms = nlohmann::ordered_json::array();
    if (i < report.spike_terms.size()) {
      for (const auto& t : report.spike_terms[i]) terms.push_back({{"term", t.term}, {"count", t.count}});
    }
    spikes.push_back({{"day", format_date(s.day)},
                      {"count", s.count},
                      {"rolling_mean", s.rolling_mean},
                      {"rolling_std", s.rolling_std},
                      {"z_value", s.z_value},
                      {"terms", terms}});
  }
  j["spikes"] = spikes;
  if (report.delays) {
    j["delays"] = {{"observations", report.delays->observations},
                   {"with_status", report.delays->with_status}};
  }
  return j.dump(2) + "\n";
}

}  // namespace crowdnotes::analytics
