#include "crowdnotes/report.hpp"

#include <fstream>
#include <sstream>

#include "crowdnotes/digest.hpp"
#include "crowdnotes/errors.hpp"
#include "crowdnotes/prompts.hpp"
#include "crowdnotes/similarity.hpp"
#include "crowdnotes/text.hpp"

namespace crowdnotes {

namespace {

using nlohmann::json;

std::string dump_line(const json& j) {
  return j.dump(-1, ' ', false, json::error_handler_t::replace) + "\n";
}

std::string mode_dir(RunMode mode) { return text::ascii_lower(to_string(mode)); }

json metrics_json(const StageMetrics& m) {
  json subsets = json::object();
  for (const auto& s : m.subsets) {
    subsets[std::string(render_status(s.subset))] = {
        {"n", s.n},
        {"relevance_pass", s.relevance_pass},
        {"correctness_pass", s.correctness_pass},
        {"helpfulness_pass", s.helpfulness_pass},
        {"R", s.r.str()},
        {"C", s.c.str()},
        {"H", s.h.str()},
    };
  }
  return {{"subsets", subsets}, {"overall_H", m.overall_h.str()}};
}

json ledger_array(std::span<const LedgerEntry> ledger) {
  json arr = json::array();
  for (const auto& e : ledger) arr.push_back({{"note_id", e.note_id}, {"stage", e.stage}, {"error", e.error}});
  return arr;
}

json ref_json(const EvidenceRef& ref) {
  json j = {{"url", ref.url}};
  if (ref.title) j["title"] = *ref.title;
  if (ref.snippet) j["snippet"] = *ref.snippet;
  if (ref.source_query) j["source_query"] = *ref.source_query;
  if (ref.search_rank) j["search_rank"] = *ref.search_rank;
  if (ref.published_at) j["published_at"] = format_iso8601(*ref.published_at);
  return j;
}

}  // namespace

std::string results_csv(std::span<const ModeReport> reports) {
  std::ostringstream out;
  out << "setting,helpful_n,helpful_R,helpful_C,helpful_H,not_helpful_n,not_helpful_R,"
         "not_helpful_C,not_helpful_H,overall_H\n";
  for (const auto& report : reports) {
    out << to_string(report.run.mode);
    for (NoteStatus subset : {NoteStatus::kHelpful, NoteStatus::kNotHelpful}) {
      if (const auto* s = report.metrics.find(subset)) {
        out << ',' << s->n << ',' << s->r.str() << ',' << s->c.str() << ',' << s->h.str();
      } else {
        out << ",,,,";
      }
    }
    out << ',' << report.metrics.overall_h.str() << '\n';
  }
  return out.str();
}

std::string pairwise_csv(std::string_view setting, const PairwiseSummary& summary) {
  std::ostringstream out;
  out << "setting,n,win,lose,tie\n"
      << setting << ',' << summary.n << ',' << summary.win.str() << ',' << summary.lose.str()
      << ',' << summary.tie.str() << '\n';
  return out.str();
}

nlohmann::json config_json(const RunConfig& config) {
  return {
      {"mode", std::string(to_string(config.mode))},
      {"tau", config.quota.to_string()},
      {"tau_policy", config.quota.is_auto() ? "per-sample |E_h|" : "fixed"},
      {"num_queries", config.num_queries},
      {"top_k", config.top_k},
      {"chunk_size", config.chunk_size},
      {"chunk_overlap", config.chunk_overlap},
      {"char_limit", config.char_limit},
      {"url_char_cost", config.url_char_cost},
      {"time_cutoff", std::string(to_string(config.time_cutoff))},
  };
}

nlohmann::json manifest_json(std::span<const ModeReport> reports, const ReportContext& context,
                             const std::vector<LedgerEntry>* extra_ledger) {
  json runs = json::array();
  std::vector<LedgerEntry> ledger;
  for (const auto& report : reports) {
    runs.push_back({{"mode", std::string(to_string(report.run.mode))},
                    {"config", config_json(report.run.config)},
                    {"samples", report.run.outcomes.size()},
                    {"metrics", metrics_json(report.metrics)},
                    {"ledger_entries", report.run.ledger.size()}});
    for (const auto& e : report.run.ledger) ledger.push_back(e);
  }
  if (extra_ledger) ledger.insert(ledger.end(), extra_ledger->begin(), extra_ledger->end());

  json assets = json::array();
  for (const auto* asset : prompts::all_assets()) {
    assets.push_back({{"name", std::string(asset->name)},
                      {"version", std::string(asset->version)},
                      {"sha256", sha256_hex(std::string(asset->system) + '\x1f' +
                                            std::string(asset->user))}});
  }
  json cassette = json::object();
  if (context.cassette_path) cassette["path"] = context.cassette_path->generic_string();
  if (context.cassette_digest) cassette["sha256"] = *context.cassette_digest;

  return {{"runs", runs},
          {"gateway_mode", context.gateway_mode},
          {"cassette", cassette},
          {"seed", context.seed},
          {"scorer", context.scorer},
          {"stopwords", std::string(kStopwordListVersion)},
          {"prompt_assets", assets},
          {"ledger", ledger_array(ledger)}};
}

std::string outcomes_jsonl(const RunResult& run) {
  std::string out;
  for (const auto& o : run.outcomes) {
    json transcripts = json::array();
    for (const auto& t : o.transcripts) {
      std::string joined;
      for (const auto& r : t.replies) joined += r + '\x1e';
      json tj = {{"stage", t.stage}, {"calls", t.replies.size()}, {"digest", sha256_hex(joined)}};
      if (t.error) tj["error"] = *t.error;
      transcripts.push_back(tj);
    }
    out += dump_line({{"sample_id", o.sample_id},
                      {"R", std::string(to_string(o.relevance))},
                      {"C", std::string(to_string(o.correctness))},
                      {"H", std::string(to_string(o.helpfulness))},
                      {"transcripts", transcripts}});
  }
  return out;
}

std::string ledger_jsonl(std::span<const LedgerEntry> ledger) {
  std::string out;
  for (const auto& e : ledger) out += dump_line({{"note_id", e.note_id}, {"stage", e.stage}, {"error", e.error}});
  return out;
}

std::string skip_log_jsonl(const RunResult& run) {
  std::string out;
  for (const auto& a : run.artifacts) {
    for (const auto& s : a.skips) {
      out += dump_line({{"note_id", a.note_id}, {"url", s.url}, {"reason", s.reason}});
    }
  }
  return out;
}

std::string selection_audit_jsonl(const RunResult& run) {
  std::string out;
  for (const auto& a : run.artifacts) {
    for (const auto& r : a.selection_audit) {
      out += dump_line({{"note_id", a.note_id},
                        {"round", r.round},
                        {"shown_indices", r.shown_indices},
                        {"raw_reply", r.raw_reply},
                        {"chosen_url", r.chosen_url},
                        {"fallback", r.fallback}});
    }
  }
  return out;
}

std::string notes_jsonl(const RunResult& run) {
  std::string out;
  for (const auto& a : run.artifacts) {
    json j = {{"note_id", a.note_id}, {"tau", a.tau}, {"quota_shortfall", a.quota_shortfall}};
    json evidence = json::array();
    for (const auto& e : a.evidence) evidence.push_back(ref_json(e));
    j["evidence"] = evidence;
    if (a.plan) j["queries"] = a.plan->queries;
    json chunks = json::array();
    for (const auto& c : a.chunks) {
      chunks.push_back({{"url", c.url},
                        {"chunk_index", c.chunk_index},
                        {"token_span", {c.token_span.start, c.token_span.end}},
                        {"score", c.score.value_or(0.0)}});
    }
    j["chunks"] = chunks;
    if (a.note) {
      json urls = json::array();
      for (const auto& u : a.note->urls) urls.push_back(u.url);
      j["note"] = {{"provenance", std::string(to_string(a.note->provenance))},
                   {"text", a.note->text},
                   {"full_text", a.note->full_text},
                   {"urls", urls},
                   {"budget_chars", a.note->budget_chars},
                   {"truncated", a.note->truncated}};
    }
    out += dump_line(j);
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIoError, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) fail(ErrorCode::kIoError, "short write to " + path.string());
}

void emit_report(std::span<const ModeReport> reports, const ReportContext& context,
                 const std::filesystem::path& out_dir) {
  write_text_file(out_dir / "results.csv", results_csv(reports));
  write_text_file(out_dir / "manifest.json", manifest_json(reports, context).dump(2) + "\n");
  for (const auto& report : reports) {
    auto dir = out_dir / mode_dir(report.run.mode);
    write_text_file(dir / "outcomes.jsonl", outcomes_jsonl(report.run));
    write_text_file(dir / "ledger.jsonl", ledger_jsonl(report.run.ledger));
    write_text_file(dir / "skips.jsonl", skip_log_jsonl(report.run));
    write_text_file(dir / "selection_audit.jsonl", selection_audit_jsonl(report.run));
    write_text_file(dir / "notes.jsonl", notes_jsonl(report.run));
  }
}

void emit_pairwise_report(std::string_view setting, const ComparisonRun& run,
                          const ReportContext& context, const std::filesystem::path& out_dir) {
  write_text_file(out_dir / "pairwise.csv", pairwise_csv(setting, summarize_pairwise(run.outcomes)));
  std::string lines;
  for (const auto& o : run.outcomes) {
    lines += dump_line({{"post_id", o.post_id},
                        {"result", std::string(to_string(o.result))},
                        {"machine_shown_first", o.machine_shown_first},
                        {"seed", o.seed},
                        {"fallback", o.fallback},
                        {"rationale", o.rationale}});
  }
  write_text_file(out_dir / "pairwise.jsonl", lines);
  write_text_file(out_dir / "ledger.jsonl", ledger_jsonl(run.ledger));
  json manifest = manifest_json({}, context, &run.ledger);
  manifest["comparison"] = {{"setting", std::string(setting)}, {"samples", run.outcomes.size()}};
  write_text_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace crowdnotes
