#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "crowdnotes/errors.hpp"
#include "crowdnotes/report.hpp"

using namespace crowdnotes;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

ModeReport report(RunMode mode) {
  ModeReport r;
  r.run.mode = mode;
  r.run.config.mode = mode;
  r.run.outcomes = {{"a", Verdict::kPass, Verdict::kPass, Verdict::kFail, {}},
                    {"b", Verdict::kFail, Verdict::kNotEvaluated, Verdict::kNotEvaluated, {}}};
  SampleArtifacts art;
  art.note_id = "a";
  art.tau = 2;
  art.skips = {{"https://dead.example/x", "UNREACHABLE"}};
  SampleArtifacts art_b;
  art_b.note_id = "b";
  r.run.artifacts = {art, art_b};
  r.run.ledger = {{"b", "evidence", "AllSourcesFailed: nothing fetched"}};
  std::vector<BenchSample> samples(2);
  samples[0].note_id = "a";
  samples[1].note_id = "b";
  samples[1].subset = NoteStatus::kNotHelpful;
  r.metrics = aggregate(r.run.outcomes, samples);
  return r;
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(ResultsCsv, HeaderAndRows) {
  std::vector<ModeReport> reports{report(RunMode::kHumanBaseline), report(RunMode::kAugment)};
  auto rows = lines(results_csv(reports));
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0],
            "setting,helpful_n,helpful_R,helpful_C,helpful_H,not_helpful_n,not_helpful_R,"
            "not_helpful_C,not_helpful_H,overall_H");
  EXPECT_EQ(rows[1], "HUMAN_BASELINE,1,100.00,100.00,0.00,1,0.00,0.00,0.00,0.00");
  EXPECT_TRUE(rows[2].starts_with("AUGMENT,"));
}

TEST(ResultsCsv, MissingSubsetLeavesBlankCells) {
  ModeReport r = report(RunMode::kAutomate);
  r.metrics.subsets.pop_back();
  std::vector<ModeReport> reports{r};
  EXPECT_EQ(lines(results_csv(reports))[1], "AUTOMATE,1,100.00,100.00,0.00,,,,,0.00");
}

TEST(PairwiseCsv, Format) {
  PairwiseSummary s;
  s.n = 3;
  s.win = Percent::from_ratio(2, 3);
  s.lose = Percent::from_ratio(1, 3);
  EXPECT_EQ(pairwise_csv("AUTOMATE", s), "setting,n,win,lose,tie\nAUTOMATE,3,66.67,33.33,0.00\n");
}

TEST(Manifest, RecordsConfigAssetsAndLedger) {
  std::vector<ModeReport> reports{report(RunMode::kAugment)};
  ReportContext ctx{"REPLAY", fs::path("c.jsonl"), std::string("abc"), 9, "lexical"};
  auto m = manifest_json(reports, ctx);
  EXPECT_EQ(m["gateway_mode"], "REPLAY");
  EXPECT_EQ(m["cassette"]["path"], "c.jsonl");
  EXPECT_EQ(m["cassette"]["sha256"], "abc");
  EXPECT_EQ(m["seed"], 9);
  EXPECT_EQ(m["scorer"], "lexical");
  EXPECT_EQ(m["prompt_assets"].size(), 7u);
  for (const auto& a : m["prompt_assets"]) EXPECT_EQ(a["sha256"].get<std::string>().size(), 64u);
  ASSERT_EQ(m["runs"].size(), 1u);
  EXPECT_EQ(m["runs"][0]["mode"], "AUGMENT");
  EXPECT_EQ(m["runs"][0]["config"]["tau"], "auto");
  EXPECT_EQ(m["runs"][0]["metrics"]["subsets"]["HELPFUL"]["R"], "100.00");
  ASSERT_EQ(m["ledger"].size(), 1u);
  EXPECT_EQ(m["ledger"][0]["stage"], "evidence");
  EXPECT_EQ(m.dump().find("time\""), std::string::npos);
}

TEST(Jsonl, OneObjectPerLine) {
  auto r = report(RunMode::kAugment);
  auto outcomes = lines(outcomes_jsonl(r.run));
  ASSERT_EQ(outcomes.size(), 2u);
  auto first = json::parse(outcomes[0]);
  EXPECT_EQ(first["sample_id"], "a");
  EXPECT_EQ(first["H"], "FAIL");
  EXPECT_EQ(json::parse(outcomes[1])["C"], "NOT_EVALUATED");

  auto skips = lines(skip_log_jsonl(r.run));
  ASSERT_EQ(skips.size(), 1u);
  EXPECT_EQ(json::parse(skips[0])["reason"], "UNREACHABLE");

  EXPECT_EQ(lines(ledger_jsonl(r.run.ledger)).size(), 1u);
  auto notes = lines(notes_jsonl(r.run));
  ASSERT_EQ(notes.size(), 2u);
  EXPECT_EQ(json::parse(notes[0])["tau"], 2);
  EXPECT_FALSE(json::parse(notes[1]).contains("note"));
  EXPECT_EQ(selection_audit_jsonl(r.run), "");
}

TEST(EmitReport, WritesFileSetDeterministically) {
  auto dir = fs::temp_directory_path() / "crowdnotes-report-test";
  fs::remove_all(dir);
  std::vector<ModeReport> reports{report(RunMode::kHumanBaseline), report(RunMode::kAutomateNoUtility)};
  ReportContext ctx{"REPLAY", std::nullopt, std::nullopt, 0, "lexical"};
  emit_report(reports, ctx, dir / "one");
  emit_report(reports, ctx, dir / "two");
  for (const char* f : {"results.csv", "manifest.json", "human_baseline/outcomes.jsonl",
                        "human_baseline/ledger.jsonl", "human_baseline/skips.jsonl",
                        "human_baseline/selection_audit.jsonl", "automate_no_utility/notes.jsonl"}) {
    ASSERT_TRUE(fs::exists(dir / "one" / f)) << f;
    EXPECT_EQ(slurp(dir / "one" / f), slurp(dir / "two" / f)) << f;
  }
  fs::remove_all(dir);
}

TEST(WriteTextFile, FailsOnUnwritablePath) {
  try {
    write_text_file("/proc/crowdnotes/x.txt", "x");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIoError);
  }
}
