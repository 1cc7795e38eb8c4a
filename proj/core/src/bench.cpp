#include "crowdnotes/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include <spdlog/spdlog.h>

#include "crowdnotes/digest.hpp"
#include "crowdnotes/errors.hpp"
#include "crowdnotes/gateway.hpp"
#include "crowdnotes/similarity.hpp"
#include "crowdnotes/text.hpp"

namespace crowdnotes {

namespace {

using nlohmann::json;

const json& required(const json& record, const char* key) {
  if (!record.contains(key) || record.at(key).is_null()) {
    fail(ErrorCode::kSchemaError, std::string("missing field '") + key + "'");
  }
  return record.at(key);
}

std::string required_string(const json& record, const char* key) {
  const json& v = required(record, key);
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (!v.is_string()) fail(ErrorCode::kSchemaError, std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

Timestamp required_time(const json& record, const char* key) {
  const json& v = required(record, key);
  if (v.is_number_integer()) return from_epoch_millis(v.get<std::int64_t>());
  if (v.is_string()) {
    if (auto t = parse_iso8601(v.get<std::string>())) return *t;
  }
  fail(ErrorCode::kSchemaError, std::string("field '") + key + "' is not a timestamp");
}

EvidenceRef parse_url_entry(const json& entry) {
  EvidenceRef ref;
  std::string raw;
  if (entry.is_string()) {
    raw = entry.get<std::string>();
  } else if (entry.is_object()) {
    raw = required_string(entry, "url");
    if (entry.contains("title") && entry["title"].is_string()) ref.title = entry["title"].get<std::string>();
    if (entry.contains("snippet") && entry["snippet"].is_string()) {
      ref.snippet = entry["snippet"].get<std::string>();
    }
  } else {
    fail(ErrorCode::kSchemaError, "url entries must be strings or objects");
  }
  try {
    ref.url = normalize_url(raw);
  } catch (const Error& e) {
    fail(ErrorCode::kSchemaError, std::string("bad evidence url: ") + e.what());
  }
  return ref;
}

template <typename Fn>
void parallel_for(std::size_t n, int parallelism, Fn&& fn) {
  std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, parallelism)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

bool is_automated(RunMode mode) {
  return mode == RunMode::kAutomate || mode == RunMode::kAutomateNoDiversity ||
         mode == RunMode::kAutomateNoUtility;
}

std::optional<Timestamp> cutoff_for(const BenchSample& sample, const RunConfig& config) {
  if (config.time_cutoff == TimeCutoff::kNoteCreation) return sample.human_note.created_at;
  return std::nullopt;
}

std::string describe(const std::exception& e) {
  // Error messages already lead with their code
  if (dynamic_cast<const Error*>(&e)) return e.what();
  return std::string("internal: ") + e.what();
}

EvalOutcome gated_failure(const std::string& note_id) {
  EvalOutcome out;
  out.sample_id = note_id;
  out.relevance = Verdict::kFail;
  return out;
}

struct SampleResult {
  EvalOutcome outcome;
  SampleArtifacts artifacts;
  std::vector<LedgerEntry> ledger;
};

SampleResult process_sample(const BenchSample& sample, const RunConfig& config, Pipeline& pipeline) {
  SampleResult r;
  r.artifacts.note_id = sample.note_id;
  const auto& human_urls = sample.human_note.urls;
  std::string stage = "evidence";
  try {
    // 1. evidence
    if (is_automated(config.mode)) {
      r.artifacts.tau = config.quota.resolve(human_urls.size());
      auto acquired = acquire_evidence(sample.post, r.artifacts.tau, config,
                                       cutoff_for(sample, config), pipeline.gateway,
                                       pipeline.models.evidence);
      r.artifacts.plan = std::move(acquired.plan);
      r.artifacts.selection_audit = std::move(acquired.selection.audit);
      r.artifacts.quota_shortfall = acquired.selection.quota_shortfall;
      r.artifacts.evidence = std::move(acquired.selection.selected);
    } else {
      r.artifacts.tau = static_cast<int>(human_urls.size());
      r.artifacts.evidence = human_urls;
    }

    // 2. retrieval
    stage = "retrieval";
    auto retrieved = collect_evidence_chunks(sample.post, r.artifacts.evidence, config,
                                             pipeline.gateway, pipeline.scorer, *pipeline.tokenizer);
    r.artifacts.skips = std::move(retrieved.skips);
    r.artifacts.chunks = std::move(retrieved.chunks);
    if (r.artifacts.chunks.empty()) {
      fail(ErrorCode::kAllSourcesFailed, "no evidence source yielded a passage");
    }

    // 3. note
    stage = "generation";
    GeneratedNote note;
    if (config.mode == RunMode::kHumanBaseline) {
      std::string body = text::strip_urls(sample.human_note.text);
      if (body.empty()) fail(ErrorCode::kEmptyInput, "human note has no text besides URLs");
      note = finalize_note(body, human_urls, config.char_limit, Provenance::kHuman,
                           config.url_char_cost);
    } else {
      std::vector<EvidenceRef> cited;
      for (const auto& chunk : r.artifacts.chunks) {
        auto it = std::find_if(r.artifacts.evidence.begin(), r.artifacts.evidence.end(),
                               [&](const EvidenceRef& e) { return e.url == chunk.url; });
        if (it != r.artifacts.evidence.end()) cited.push_back(*it);
      }
      int budget = compute_budget(config.char_limit, static_cast<int>(cited.size()),
                                  config.url_char_cost);
      std::string body = generate_note(sample.post, r.artifacts.chunks, budget, pipeline.gateway,
                                       pipeline.models.generator);
      Provenance provenance =
          config.mode == RunMode::kAugment ? Provenance::kAugmented : Provenance::kAutomated;
      note = finalize_note(body, std::move(cited), config.char_limit, provenance,
                           config.url_char_cost);
    }
    note.post_id = sample.post.post_id;
    r.artifacts.note = note;

    // 4. evaluation
    stage = "evaluation";
    EvalSample eval{sample.note_id, sample.post, note.full_text, note.text, r.artifacts.chunks};
    r.outcome = pipeline.judge.evaluate_note(eval);
    for (const auto& t : r.outcome.transcripts) {
      if (t.error) r.ledger.push_back({sample.note_id, t.stage, *t.error});
    }
  } catch (const std::exception& e) {
    spdlog::warn("sample {}: {} failed: {}", sample.note_id, stage, e.what());
    r.outcome = gated_failure(sample.note_id);
    r.ledger.push_back({sample.note_id, stage, describe(e)});
  }
  r.outcome.sample_id = sample.note_id;
  return r;
}

}  // namespace

BenchSample parse_sample(const nlohmann::json& record) {
  if (!record.is_object()) fail(ErrorCode::kSchemaError, "record is not a JSON object");
  try {
    BenchSample s;
    s.note_id = required_string(record, "note_id");
    std::string post_id = required_string(record, "post_id");
    std::string post_text = required_string(record, "post_text");
    Timestamp post_time = required_time(record, "post_created_at");
    std::string note_text = required_string(record, "note_text");
    Timestamp note_time = required_time(record, "note_created_at");
    std::string status_label = required_string(record, "status");
    s.topic = record.contains("topic") && record["topic"].is_string()
                  ? record["topic"].get<std::string>()
                  : std::string();
    if (s.note_id.empty()) fail(ErrorCode::kSchemaError, "empty note_id");

    const json& urls = required(record, "urls");
    if (!urls.is_array()) fail(ErrorCode::kSchemaError, "field 'urls' must be an array");
    std::vector<EvidenceRef> refs;
    for (const auto& entry : urls) refs.push_back(parse_url_entry(entry));
    if (refs.empty()) fail(ErrorCode::kSchemaError, "a benchmark note needs at least one url");

    NoteStatus status;
    try {
      status = parse_status(status_label);
    } catch (const Error& e) {
      fail(ErrorCode::kSchemaError, e.what());
    }
    try {
      s.post = make_post(post_id, post_text, post_time);
    } catch (const Error& e) {
      fail(ErrorCode::kSchemaError, e.what());
    }
    s.human_note = NoteRecord{s.note_id, post_id, note_text, std::move(refs), note_time, status,
                              Provenance::kHuman};
    s.subset = status;
    return s;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kSchemaError, e.what());
  }
}

LoadedDataset parse_dataset(std::istream& in) {
  LoadedDataset out;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::is_blank(line)) continue;
    try {
      auto record = json::parse(line);
      auto sample = parse_sample(record);
      if (!ids.insert(sample.note_id).second) {
        fail(ErrorCode::kSchemaError, "duplicate note_id " + sample.note_id);
      }
      out.samples.push_back(std::move(sample));
    } catch (const json::exception& e) {
      out.errors.push_back({line_no, std::string("SchemaError: ") + e.what()});
    } catch (const Error& e) {
      out.errors.push_back({line_no, std::string(to_string(e.code())) + ": " + e.what()});
    }
  }
  if (out.samples.empty()) {
    std::string msg = "no valid samples";
    if (!out.errors.empty()) {
      msg += " (" + std::to_string(out.errors.size()) + " invalid lines, first at line " +
             std::to_string(out.errors.front().line) + ": " + out.errors.front().message + ")";
    }
    fail(ErrorCode::kEmptyDataset, msg);
  }
  return out;
}

LoadedDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIoError, "cannot open dataset " + path.string());
  return parse_dataset(in);
}

RunResult run_mode(std::span<const BenchSample> samples, const RunConfig& config,
                   Pipeline& pipeline) {
  config.validate();
  std::vector<SampleResult> results(samples.size());
  parallel_for(samples.size(), pipeline.parallelism,
               [&](std::size_t i) { results[i] = process_sample(samples[i], config, pipeline); });

  std::vector<std::size_t> order(samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return samples[a].note_id < samples[b].note_id;
  });

  RunResult run;
  run.mode = config.mode;
  run.config = config;
  for (std::size_t i : order) {
    run.outcomes.push_back(std::move(results[i].outcome));
    run.artifacts.push_back(std::move(results[i].artifacts));
    for (auto& entry : results[i].ledger) run.ledger.push_back(std::move(entry));
  }
  return run;
}

Percent Percent::from_ratio(std::size_t k, std::size_t n) {
  if (n == 0) return Percent{0};
  if (k > n) fail(ErrorCode::kInvalidArgument, "count exceeds total");
  auto kk = static_cast<std::int64_t>(k);
  auto nn = static_cast<std::int64_t>(n);
  return Percent{(20000 * kk + nn) / (2 * nn)};
}

Percent Percent::mean(std::span<const Percent> values) {
  if (values.empty()) return Percent{0};
  std::int64_t sum = 0;
  for (const auto& v : values) sum += v.hundredths_;
  auto m = static_cast<std::int64_t>(values.size());
  return Percent{(2 * sum + m) / (2 * m)};
}

std::string Percent::str() const {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%" PRId64 ".%02" PRId64, hundredths_ / 100, hundredths_ % 100);
  return buf;
}

const SubsetMetrics* StageMetrics::find(NoteStatus subset) const {
  for (const auto& s : subsets) {
    if (s.subset == subset) return &s;
  }
  return nullptr;
}

StageMetrics aggregate(std::span<const EvalOutcome> outcomes,
                       std::span<const BenchSample> samples) {
  std::unordered_map<std::string, const EvalOutcome*> by_id;
  for (const auto& o : outcomes) by_id.emplace(o.sample_id, &o);

  std::map<NoteStatus, SubsetMetrics> acc;
  for (const auto& sample : samples) {
    auto& m = acc[sample.subset];
    m.subset = sample.subset;
    ++m.n;
    auto it = by_id.find(sample.note_id);
    if (it == by_id.end()) continue;
    const EvalOutcome& o = *it->second;
    bool r = o.relevance == Verdict::kPass;
    bool c = r && o.correctness == Verdict::kPass;
    bool h = c && o.helpfulness == Verdict::kPass;
    m.relevance_pass += r;
    m.correctness_pass += c;
    m.helpfulness_pass += h;
  }

  StageMetrics metrics;
  std::vector<Percent> hs;
  for (NoteStatus subset : {NoteStatus::kHelpful, NoteStatus::kNotHelpful}) {
    auto it = acc.find(subset);
    if (it == acc.end()) continue;
    auto m = it->second;
    m.r = Percent::from_ratio(m.relevance_pass, m.n);
    m.c = Percent::from_ratio(m.correctness_pass, m.n);
    m.h = Percent::from_ratio(m.helpfulness_pass, m.n);
    hs.push_back(m.h);
    metrics.subsets.push_back(m);
  }
  metrics.overall_h = Percent::mean(hs);
  return metrics;
}

std::uint64_t derive_seed(std::uint64_t run_seed, std::string_view key) {
  std::string hex = sha256_hex(std::to_string(run_seed) + ":" + std::string(key));
  return std::stoull(hex.substr(0, 16), nullptr, 16);
}

ComparisonRun run_comparison(std::span<const BenchSample> samples, const RunConfig& config,
                             Pipeline& pipeline, std::uint64_t seed) {
  config.validate();
  if (!is_automated(config.mode)) {
    fail(ErrorCode::kConfigError, "comparison needs an automated evidence mode");
  }
  struct Slot {
    std::optional<PairwiseOutcome> outcome;
    std::optional<LedgerEntry> error;
  };
  std::vector<Slot> slots(samples.size());
  parallel_for(samples.size(), pipeline.parallelism, [&](std::size_t i) {
    const auto& sample = samples[i];
    try {
      int tau = config.quota.resolve(sample.human_note.urls.size());
      auto acquired = acquire_evidence(sample.post, tau, config, cutoff_for(sample, config),
                                       pipeline.gateway, pipeline.models.evidence);
      slots[i].outcome = pipeline.judge.compare_evidence(
          sample.post, sample.human_note.urls, acquired.selection.selected,
          derive_seed(seed, sample.post.post_id));
    } catch (const std::exception& e) {
      spdlog::warn("sample {}: comparison failed: {}", sample.note_id, e.what());
      slots[i].error = LedgerEntry{sample.note_id, "comparison", describe(e)};
    }
  });

  std::vector<std::size_t> order(samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::tie(samples[a].post.post_id, samples[a].note_id) <
           std::tie(samples[b].post.post_id, samples[b].note_id);
  });
  ComparisonRun run;
  for (std::size_t i : order) {
    if (slots[i].outcome) run.outcomes.push_back(std::move(*slots[i].outcome));
    if (slots[i].error) run.ledger.push_back(std::move(*slots[i].error));
  }
  return run;
}

PairwiseSummary summarize_pairwise(std::span<const PairwiseOutcome> outcomes) {
  PairwiseSummary s;
  s.n = outcomes.size();
  std::size_t win = 0;
  std::size_t lose = 0;
  std::size_t tie = 0;
  for (const auto& o : outcomes) {
    switch (o.result) {
      case PairwiseResult::kWin: ++win; break;
      case PairwiseResult::kLose: ++lose; break;
      case PairwiseResult::kTie: ++tie; break;
    }
  }
  s.win = Percent::from_ratio(win, s.n);
  s.lose = Percent::from_ratio(lose, s.n);
  s.tie = Percent::from_ratio(tie, s.n);
  return s;
}

}  // namespace crowdnotes
