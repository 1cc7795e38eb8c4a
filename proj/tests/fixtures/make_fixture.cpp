// Writes the CLI test fixture: datasets, cassettes recorded against the fake
// providers, and a small notes dump for `crowdnotes analyze`.
//
//   crowdnotes_make_fixture <out-dir>

#include <filesystem>
#include <iostream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "crowdnotes/bench.hpp"
#include "crowdnotes/gateway.hpp"
#include "crowdnotes/judge.hpp"
#include "crowdnotes/report.hpp"
#include "crowdnotes/similarity.hpp"
#include "support/fake_world.hpp"

namespace fs = std::filesystem;
using namespace crowdnotes;
using namespace crowdnotes::testing;

namespace {

void record(const std::vector<nlohmann::json>& records, std::initializer_list<RunMode> modes,
            bool with_comparison, const fs::path& dataset, const fs::path& cassette_path) {
  FakeWorld world;
  write_text_file(dataset, to_jsonl(records));
  auto loaded = load_dataset(dataset);

  auto transport = std::make_shared<LambdaTransport>();
  world.install(*transport);
  auto cassette = std::make_shared<Cassette>();
  Gateway gateway(GatewayMode::kRecord, cassette, transport);
  LexicalScorer scorer;
  Judge judge(gateway);
  Pipeline pipeline{gateway, scorer, judge};
  for (RunMode mode : modes) {
    RunConfig config;
    config.mode = mode;
    run_mode(loaded.samples, config, pipeline);
  }
  if (with_comparison) {
    RunConfig config;
    config.mode = RunMode::kAutomate;
    run_comparison(loaded.samples, config, pipeline, 11);
  }
  cassette->save(cassette_path);
}

// A quiet month of flagged posts with one burst, and notes on some of them.
void write_dump(const fs::path& dir) {
  std::ostringstream posts, notes, status;
  posts << "tweetId\tcreatedAtMillis\ttext\n";
  notes << "noteId\ttweetId\tcreatedAtMillis\tclassification\n";
  status << "noteId\ttimestampMillisOfFirstNonNMRStatus\tcurrentStatus\n";
  const std::int64_t day0 = 1704067200000;  // 2024-01-01
  int post_id = 0;
  for (int day = 0; day < 45; ++day) {
    int count = 3 + day % 3 + (day == 35 ? 40 : 0);
    for (int k = 0; k < count; ++k, ++post_id) {
      std::int64_t at = day0 + day * 86400000LL + k * 600000LL;
      const char* text = day == 35 ? "Measles outbreak spreading, vaccines are dangerous"
                                   : "Miracle supplement cures everything";
      posts << "t" << post_id << '\t' << at << '\t' << text << " #" << k << '\n';
      if (post_id % 3 == 0) {
        std::int64_t note_at = at + (1 + post_id % 30) * 3600000LL;
        notes << "n" << post_id << "\tt" << post_id << '\t' << note_at << "\tMISINFORMED\n";
        std::string first = post_id % 2 == 0 ? std::to_string(note_at + (2 + post_id % 50) * 3600000LL) : "-1";
        status << "n" << post_id << '\t' << first << "\tCURRENTLY_RATED_HELPFUL\n";
      }
    }
  }
  write_text_file(dir / "posts.tsv", posts.str());
  write_text_file(dir / "notes.tsv", notes.str());
  write_text_file(dir / "status.tsv", status.str());
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: " << argv[0] << " <out-dir>\n";
    return 1;
  }
  spdlog::set_level(spdlog::level::err);
  fs::path dir = argv[1];
  fs::create_directories(dir);
  try {
    FakeWorld world;
    record(make_dataset(world, 12), {RunMode::kHumanBaseline, RunMode::kAugment, RunMode::kAutomate,
                                     RunMode::kAutomateNoDiversity, RunMode::kAutomateNoUtility},
           true, dir / "dataset.jsonl", dir / "cassette.jsonl");
    record(make_dataset(world, 6, 2), {RunMode::kAugment}, false, dir / "dataset_dead.jsonl",
           dir / "cassette_dead.jsonl");
    write_dump(dir);
  } catch (const std::exception& e) {
    std::cerr << "fixture: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
