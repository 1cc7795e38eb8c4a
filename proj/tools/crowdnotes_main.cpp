// crowdnotes: run the note pipeline, benchmarks and analytics from the shell.
//
// Exit status: 0 on success, 1 on a fatal configuration or I/O error, 2 when
// the run finished but some samples failed (the error ledger is non-empty).

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "crowdnotes/analytics.hpp"
#include "crowdnotes/bench.hpp"
#include "crowdnotes/cassette.hpp"
#include "crowdnotes/digest.hpp"
#include "crowdnotes/errors.hpp"
#include "crowdnotes/gateway.hpp"
#include "crowdnotes/http_transport.hpp"
#include "crowdnotes/judge.hpp"
#include "crowdnotes/report.hpp"
#include "crowdnotes/similarity.hpp"

namespace fs = std::filesystem;
using namespace crowdnotes;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFatal = 1;
constexpr int kExitPartial = 2;

struct RunOptions {
  std::string dataset;
  std::vector<std::string> modes;
  std::string replay;
  std::string record;
  bool live = false;
  std::string tau = "auto";
  int queries = 3;
  int top_k = 10;
  int char_limit = 280;
  int chunk_size = 512;
  int chunk_overlap = 128;
  bool no_cutoff = false;
  std::uint64_t seed = 0;
  int parallelism = 1;
  std::string out = "crowdnotes-out";
  std::string scorer = "lexical";
  std::string embed_model = "all-mpnet-base-v2";
  PipelineModels models;
};

struct AnalyzeOptions {
  std::string posts;
  std::string notes;
  std::string status;
  std::string out = "crowdnotes-analysis";
  int window = 28;
  double z = 2.5;
  int min_history = 14;
  std::size_t terms = 10;
};

void add_run_options(CLI::App* cmd, RunOptions& o, bool with_mode, bool multi_mode) {
  cmd->add_option("--dataset", o.dataset, "Benchmark dataset (JSON lines)")
      ->required()
      ->check(CLI::ExistingFile);
  if (with_mode) {
    auto* opt = cmd->add_option("--mode", o.modes,
                                multi_mode ? "Run modes (baseline, augment, automate, "
                                             "no_diversity, no_utility)"
                                           : "Evidence mode");
    if (!multi_mode) opt->expected(1);
  }
  auto* replay = cmd->add_option("--replay", o.replay, "Answer provider calls from this cassette");
  auto* record = cmd->add_option("--record", o.record, "Record live provider calls into this cassette");
  auto* live = cmd->add_flag("--live", o.live, "Call live providers without a cassette");
  replay->excludes(record)->excludes(live);
  record->excludes(live);
  cmd->add_option("--tau", o.tau, "Evidence quota: integer or 'auto' (= human URL count)")
      ->envname("CROWDNOTES_TAU")
      ->capture_default_str();
  cmd->add_option("--queries", o.queries, "Search queries per post")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--top-k", o.top_k, "Results per search query")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--char-limit", o.char_limit, "Note character limit")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--chunk-size", o.chunk_size, "Passage size in tokens")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--chunk-overlap", o.chunk_overlap, "Passage overlap in tokens")->check(CLI::NonNegativeNumber)->capture_default_str();
  cmd->add_flag("--no-cutoff", o.no_cutoff, "Do not restrict searches to the human note date");
  cmd->add_option("--seed", o.seed, "Seed for every random choice in the run")->capture_default_str();
  cmd->add_option("--parallelism", o.parallelism, "Samples processed concurrently")
      ->check(CLI::PositiveNumber)
      ->envname("CROWDNOTES_PARALLELISM")
      ->capture_default_str();
  cmd->add_option("--out", o.out, "Output directory")->capture_default_str();
  cmd->add_option("--scorer", o.scorer, "Passage scorer")
      ->check(CLI::IsMember({"lexical", "embedding"}))
      ->capture_default_str();
  cmd->add_option("--embed-model", o.embed_model, "Embedding model for --scorer embedding")
      ->envname("CROWDNOTES_EMBED_MODEL")
      ->capture_default_str();
  cmd->add_option("--generator-model", o.models.generator)->envname("CROWDNOTES_GENERATOR_MODEL")->capture_default_str();
  cmd->add_option("--query-model", o.models.evidence.query_generator)->envname("CROWDNOTES_QUERY_MODEL")->capture_default_str();
  cmd->add_option("--selector-model", o.models.evidence.selector)->envname("CROWDNOTES_SELECTOR_MODEL")->capture_default_str();
  cmd->add_option("--relevance-model", o.models.judges.relevance)->envname("CROWDNOTES_RELEVANCE_MODEL")->capture_default_str();
  cmd->add_option("--correctness-model", o.models.judges.correctness)->envname("CROWDNOTES_CORRECTNESS_MODEL")->capture_default_str();
  cmd->add_option("--helpfulness-model", o.models.judges.helpfulness)->envname("CROWDNOTES_HELPFULNESS_MODEL")->capture_default_str();
  cmd->add_option("--pairwise-model", o.models.judges.pairwise)->envname("CROWDNOTES_PAIRWISE_MODEL")->capture_default_str();
}

RunConfig base_config(const RunOptions& o) {
  RunConfig c;
  if (o.tau == "auto" || o.tau == "AUTO") {
    c.quota = Quota::automatic();
  } else {
    try {
      std::size_t used = 0;
      int n = std::stoi(o.tau, &used);
      if (used != o.tau.size()) throw std::invalid_argument(o.tau);
      c.quota = Quota::fixed(n);
    } catch (const std::logic_error&) {
      fail(ErrorCode::kConfigError, "--tau must be a positive integer or 'auto', got '" + o.tau + "'");
    }
  }
  c.num_queries = o.queries;
  c.top_k = o.top_k;
  c.char_limit = o.char_limit;
  c.chunk_size = static_cast<std::size_t>(o.chunk_size);
  c.chunk_overlap = static_cast<std::size_t>(o.chunk_overlap);
  c.time_cutoff = o.no_cutoff ? TimeCutoff::kNone : TimeCutoff::kNoteCreation;
  try {
    c.validate();
  } catch (const Error& e) {
    fail(ErrorCode::kConfigError, e.what());
  }
  return c;
}

std::vector<RunMode> parse_modes(const std::vector<std::string>& names) {
  std::vector<RunMode> modes;
  for (const auto& n : names) {
    try {
      modes.push_back(parse_run_mode(n));
    } catch (const Error& e) {
      fail(ErrorCode::kConfigError, e.what());
    }
  }
  return modes;
}

/// Gateway plus the bookkeeping needed to persist a recorded cassette.
struct Providers {
  std::shared_ptr<Cassette> cassette;
  std::unique_ptr<Gateway> gateway;
  std::optional<fs::path> cassette_path;
  GatewayMode mode = GatewayMode::kLive;

  void persist() const {
    if (mode == GatewayMode::kRecord && cassette_path) {
      cassette->save(*cassette_path);
      spdlog::info("cassette {} holds {} entries", cassette_path->string(), cassette->size());
    }
  }

  std::optional<std::string> cassette_digest() const {
    if (!cassette_path) return std::nullopt;
    return sha256_hex(cassette->serialize());
  }
};

Providers open_providers(const RunOptions& o, bool record_required) {
  Providers p;
  if (!o.replay.empty()) {
    p.mode = GatewayMode::kReplay;
    p.cassette_path = o.replay;
    if (!fs::exists(*p.cassette_path)) {
      fail(ErrorCode::kConfigError, "replay cassette '" + o.replay +
                                        "' does not exist; record one with `crowdnotes record "
                                        "--record " + o.replay + " ...` first");
    }
    p.cassette = std::make_shared<Cassette>(Cassette::load(*p.cassette_path));
    p.gateway = std::make_unique<Gateway>(p.mode, p.cassette, nullptr);
    return p;
  }
  if (record_required && o.record.empty()) {
    fail(ErrorCode::kConfigError, "the record command needs --record <cassette.jsonl>");
  }
  if (o.record.empty() && !o.live) {
    fail(ErrorCode::kConfigError,
         "choose a provider mode: --replay <cassette>, --record <cassette> or --live");
  }
  auto endpoints = HttpEndpoints::from_env();
  if (auto missing = endpoints.missing(); !missing.empty()) {
    std::string names;
    for (const auto& m : missing) names += (names.empty() ? "" : ", ") + m;
    fail(ErrorCode::kConfigError, "live providers need these environment variables: " + names);
  }
  auto transport = std::make_shared<HttpTransport>(std::move(endpoints));
  if (!o.record.empty()) {
    p.mode = GatewayMode::kRecord;
    p.cassette_path = o.record;
    p.cassette = std::make_shared<Cassette>(fs::exists(*p.cassette_path)
                                                ? Cassette::load(*p.cassette_path)
                                                : Cassette());
  } else {
    p.mode = GatewayMode::kLive;
    p.cassette = std::make_shared<Cassette>();
  }
  p.gateway = std::make_unique<Gateway>(p.mode, p.cassette, transport);
  return p;
}

std::unique_ptr<SimilarityScorer> make_scorer(const RunOptions& o, Gateway& gateway) {
  if (o.scorer == "embedding") return std::make_unique<EmbeddingScorer>(gateway, o.embed_model);
  return std::make_unique<LexicalScorer>();
}

LoadedDataset load(const RunOptions& o, std::vector<LedgerEntry>& load_ledger) {
  auto data = load_dataset(o.dataset);
  for (const auto& issue : data.errors) {
    std::cerr << o.dataset << ":" << issue.line << ": " << issue.message << "\n";
    load_ledger.push_back({"line:" + std::to_string(issue.line), "load", issue.message});
  }
  return data;
}

ReportContext context_for(const RunOptions& o, const Providers& p, const SimilarityScorer& scorer) {
  ReportContext ctx;
  ctx.gateway_mode = std::string(to_string(p.mode));
  ctx.cassette_path = p.cassette_path;
  ctx.cassette_digest = p.cassette_digest();
  ctx.seed = o.seed;
  ctx.scorer = scorer.name();
  return ctx;
}

int run_modes(const RunOptions& o, std::vector<RunMode> modes, bool record_required) {
  RunConfig base = base_config(o);
  std::vector<LedgerEntry> load_ledger;
  auto data = load(o, load_ledger);
  auto providers = open_providers(o, record_required);
  auto scorer = make_scorer(o, *providers.gateway);
  Judge judge(*providers.gateway, o.models.judges);
  Pipeline pipeline{*providers.gateway, *scorer, judge, o.models, &default_tokenizer(),
                    o.parallelism};

  std::vector<ModeReport> reports;
  bool partial = !load_ledger.empty();
  for (RunMode mode : modes) {
    RunConfig config = base;
    config.mode = mode;
    spdlog::info("running {} over {} samples", to_string(mode), data.samples.size());
    auto run = run_mode(data.samples, config, pipeline);
    auto metrics = aggregate(run.outcomes, data.samples);
    partial = partial || !run.ledger.empty();
    reports.push_back({std::move(run), metrics});
  }
  providers.persist();

  auto ctx = context_for(o, providers, *scorer);
  emit_report(reports, ctx, o.out);
  if (!load_ledger.empty()) {
    auto manifest = manifest_json(reports, ctx, &load_ledger);
    write_text_file(fs::path(o.out) / "manifest.json", manifest.dump(2) + "\n");
  }
  std::cout << results_csv(reports);
  if (partial) {
    std::cerr << "some samples failed; see the ledger in " << (fs::path(o.out) / "manifest.json").string()
              << "\n";
    return kExitPartial;
  }
  return kExitOk;
}

int run_compare(const RunOptions& o) {
  RunConfig config = base_config(o);
  config.mode = o.modes.empty() ? RunMode::kAutomate : parse_modes(o.modes).front();
  std::vector<LedgerEntry> load_ledger;
  auto data = load(o, load_ledger);
  auto providers = open_providers(o, false);
  auto scorer = make_scorer(o, *providers.gateway);
  Judge judge(*providers.gateway, o.models.judges);
  Pipeline pipeline{*providers.gateway, *scorer, judge, o.models, &default_tokenizer(),
                    o.parallelism};

  auto run = run_comparison(data.samples, config, pipeline, o.seed);
  providers.persist();
  run.ledger.insert(run.ledger.end(), load_ledger.begin(), load_ledger.end());
  std::string setting(to_string(config.mode));
  emit_pairwise_report(setting, run, context_for(o, providers, *scorer), o.out);
  std::cout << pairwise_csv(setting, summarize_pairwise(run.outcomes));
  return run.ledger.empty() ? kExitOk : kExitPartial;
}

int run_analyze(const AnalyzeOptions& o) {
  auto open = [](const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::kIoError, "cannot open " + path);
    return in;
  };
  auto posts_in = open(o.posts);
  auto posts = analytics::read_posts_tsv(posts_in);
  std::vector<analytics::DumpNote> notes;
  std::vector<analytics::DumpStatus> statuses;
  if (!o.notes.empty()) {
    auto in = open(o.notes);
    notes = analytics::read_notes_tsv(in);
  }
  if (!o.status.empty()) {
    auto in = open(o.status);
    statuses = analytics::read_status_tsv(in);
  }
  analytics::SpikeParams params{o.window, o.z, o.min_history};
  auto report = analytics::analyze(posts, notes, statuses, params, o.terms);

  fs::path out(o.out);
  write_text_file(out / "daily_series.csv", analytics::daily_series_csv(report.series));
  write_text_file(out / "spikes.json", analytics::spike_report_json(report));
  if (report.delays) {
    auto csv = analytics::delay_table_csv(*report.delays);
    write_text_file(out / "delays.csv", csv);
    std::cout << csv;
  }
  std::cout << report.spikes.spikes.size() << " spike day(s) over " << report.series.size()
            << " days\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  auto logger = spdlog::stderr_color_mt("crowdnotes");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);

  CLI::App app{"Evidence-grounded community note generation and evaluation"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  bool verbose = false;
  bool quiet = false;
  app.add_flag("-v,--verbose", verbose, "Log progress");
  app.add_flag("-q,--quiet", quiet, "Log errors only");

  RunOptions run_opts;
  AnalyzeOptions analyze_opts;

  auto* augment = app.add_subcommand("augment", "Generate notes from human evidence and evaluate them");
  add_run_options(augment, run_opts, false, false);
  auto* automate = app.add_subcommand("automate", "Acquire evidence automatically, generate and evaluate");
  add_run_options(automate, run_opts, true, false);
  auto* baseline = app.add_subcommand("baseline", "Evaluate the human-written notes");
  add_run_options(baseline, run_opts, false, false);
  auto* bench = app.add_subcommand("bench", "Run several modes and tabulate them");
  add_run_options(bench, run_opts, true, true);
  auto* compare = app.add_subcommand("compare", "Pairwise comparison of human and machine evidence");
  add_run_options(compare, run_opts, true, false);
  auto* record = app.add_subcommand("record", "Build a cassette by running modes against live providers");
  add_run_options(record, run_opts, true, true);

  auto* analyze = app.add_subcommand("analyze", "Daily series, spikes and note delays from a notes dump");
  analyze->add_option("--posts", analyze_opts.posts, "Post metadata TSV (tweetId, createdAtMillis, text)")
      ->required()
      ->check(CLI::ExistingFile);
  analyze->add_option("--notes", analyze_opts.notes, "Notes TSV from the public dump")->check(CLI::ExistingFile);
  analyze->add_option("--status", analyze_opts.status, "Note status history TSV")->check(CLI::ExistingFile);
  analyze->add_option("--out", analyze_opts.out, "Output directory")->capture_default_str();
  analyze->add_option("--window", analyze_opts.window, "Rolling window in days")->capture_default_str();
  analyze->add_option("--z", analyze_opts.z, "Spike z threshold")->capture_default_str();
  analyze->add_option("--min-history", analyze_opts.min_history, "Days required before flagging")->capture_default_str();
  analyze->add_option("--terms", analyze_opts.terms, "Trending terms kept per spike")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitFatal;
  }
  if (verbose) spdlog::set_level(spdlog::level::info);
  if (quiet) spdlog::set_level(spdlog::level::err);

  try {
    if (*augment) return run_modes(run_opts, {RunMode::kAugment}, false);
    if (*baseline) return run_modes(run_opts, {RunMode::kHumanBaseline}, false);
    if (*automate) {
      auto modes = run_opts.modes.empty() ? std::vector<RunMode>{RunMode::kAutomate}
                                          : parse_modes(run_opts.modes);
      for (RunMode m : modes) {
        if (m == RunMode::kAugment || m == RunMode::kHumanBaseline) {
          fail(ErrorCode::kConfigError, "automate accepts automate, no_diversity or no_utility");
        }
      }
      return run_modes(run_opts, modes, false);
    }
    if (*bench || *record) {
      auto modes = run_opts.modes.empty()
                       ? std::vector<RunMode>{RunMode::kHumanBaseline, RunMode::kAugment,
                                              RunMode::kAutomate, RunMode::kAutomateNoDiversity,
                                              RunMode::kAutomateNoUtility}
                       : parse_modes(run_opts.modes);
      return run_modes(run_opts, modes, record->parsed());
    }
    if (*compare) return run_compare(run_opts);
    if (*analyze) return run_analyze(analyze_opts);
  } catch (const std::exception& e) {
    std::cerr << "crowdnotes: " << e.what() << "\n";
    return kExitFatal;
  }
  return kExitFatal;
}
