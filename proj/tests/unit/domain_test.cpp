#include <gtest/gtest.h>

#include "crowdnotes/domain.hpp"
#include "crowdnotes/errors.hpp"
#include "crowdnotes/time.hpp"

using namespace crowdnotes;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kInvalidArgument;
}

}  // namespace

TEST(NormalizeUrl, LowercasesSchemeAndHostAndDropsFragment) {
  EXPECT_EQ(normalize_url("HTTPS://CDC.gov/flu#sec2"), "https://cdc.gov/flu");
}

TEST(NormalizeUrl, StripsTrackingAndSortsQuery) {
  EXPECT_EQ(normalize_url("https://a.org/p?utm_source=x&b=2&a=1"), "https://a.org/p?a=1&b=2");
  EXPECT_EQ(normalize_url("https://a.org/p?fbclid=1&gclid=2"), "https://a.org/p");
}

TEST(NormalizeUrl, EmptyPathBecomesSlash) {
  EXPECT_EQ(normalize_url("http://Example.COM"), "http://example.com/");
}

TEST(NormalizeUrl, KeepsPathCase) {
  EXPECT_EQ(normalize_url("https://a.org/Path/To"), "https://a.org/Path/To");
}

TEST(NormalizeUrl, RejectsMalformed) {
  EXPECT_EQ(code_of([] { normalize_url("notaurl"); }), ErrorCode::kMalformedUrl);
  EXPECT_EQ(code_of([] { normalize_url("ftp://a.org/x"); }), ErrorCode::kMalformedUrl);
  EXPECT_EQ(code_of([] { normalize_url("https:///nohost"); }), ErrorCode::kMalformedUrl);
}

TEST(NormalizeUrl, Idempotent) {
  for (const char* raw : {"HTTPS://CDC.gov/flu#sec2", "https://a.org/p?utm_source=x&b=2&a=1",
                          "http://x.y", "https://a.org/p?z=1&a=2#f"}) {
    std::string once = normalize_url(raw);
    EXPECT_EQ(normalize_url(once), once) << raw;
  }
}

TEST(ParseStatus, AcceptsAliasesCaseInsensitively) {
  EXPECT_EQ(parse_status("HELPFUL"), NoteStatus::kHelpful);
  EXPECT_EQ(parse_status("currently_rated_helpful"), NoteStatus::kHelpful);
  EXPECT_EQ(parse_status("currently_rated_not_helpful"), NoteStatus::kNotHelpful);
  EXPECT_EQ(parse_status("Not_Helpful"), NoteStatus::kNotHelpful);
}

TEST(ParseStatus, RejectsUnrated) {
  EXPECT_EQ(code_of([] { parse_status("needs_more_ratings"); }), ErrorCode::kUnknownStatus);
  EXPECT_EQ(code_of([] { parse_status(""); }), ErrorCode::kUnknownStatus);
}

TEST(RunModeNames, RoundTripAndAliases) {
  for (RunMode m : {RunMode::kHumanBaseline, RunMode::kAugment, RunMode::kAutomate,
                    RunMode::kAutomateNoDiversity, RunMode::kAutomateNoUtility}) {
    EXPECT_EQ(parse_run_mode(to_string(m)), m);
  }
  EXPECT_EQ(parse_run_mode("baseline"), RunMode::kHumanBaseline);
  EXPECT_EQ(parse_run_mode("no_diversity"), RunMode::kAutomateNoDiversity);
  EXPECT_EQ(parse_run_mode("no_utility"), RunMode::kAutomateNoUtility);
  EXPECT_THROW(parse_run_mode("sideways"), Error);
}

TEST(Quota, AutoResolvesToHumanUrlCount) {
  EXPECT_TRUE(Quota::automatic().is_auto());
  EXPECT_EQ(Quota::automatic().resolve(3), 3);
  EXPECT_EQ(Quota::fixed(2).resolve(5), 2);
  EXPECT_THROW(Quota::fixed(0), Error);
}

TEST(RunConfig, ValidateRejectsBadGeometry) {
  RunConfig ok;
  EXPECT_NO_THROW(ok.validate());
  RunConfig c = ok;
  c.chunk_overlap = c.chunk_size;
  EXPECT_THROW(c.validate(), Error);
  c = ok;
  c.char_limit = 0;
  EXPECT_THROW(c.validate(), Error);
  c = ok;
  c.num_queries = 0;
  EXPECT_THROW(c.validate(), Error);
}

TEST(MakePost, RejectsBlankText) {
  EXPECT_EQ(code_of([] { make_post("p", "  \n\t", from_epoch_seconds(0)); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(make_post("p", "text", from_epoch_seconds(5)).text, "text");
}

TEST(Time, ParsesIsoVariants) {
  auto t = from_epoch_seconds(1700000000);  // 2023-11-14T22:13:20Z
  EXPECT_EQ(format_iso8601(t), "2023-11-14T22:13:20Z");
  EXPECT_EQ(parse_iso8601("2023-11-14T22:13:20Z"), t);
  EXPECT_EQ(parse_iso8601("2023-11-14T22:13:20.750Z"), t);
  EXPECT_EQ(parse_iso8601("2023-11-14T22:13:20+00:00"), t);
  EXPECT_EQ(parse_iso8601("2023-11-15T00:13:20+02:00"), t);
  EXPECT_EQ(parse_iso8601("2023-11-14"), from_epoch_seconds(1699920000));
  EXPECT_FALSE(parse_iso8601("yesterday"));
  EXPECT_FALSE(parse_iso8601("2023-13-01"));
}

TEST(Time, MillisTruncate) {
  EXPECT_EQ(from_epoch_millis(1700000000999), from_epoch_seconds(1700000000));
  EXPECT_EQ(format_date(day_of(from_epoch_seconds(1700000000))), "2023-11-14");
}
