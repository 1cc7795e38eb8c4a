#include <gtest/gtest.h>

#include "crowdnotes/digest.hpp"
#include "crowdnotes/text.hpp"

using namespace crowdnotes;

TEST(Graphemes, CountsUserPerceivedCharacters) {
  EXPECT_EQ(text::grapheme_count(""), 0u);
  EXPECT_EQ(text::grapheme_count("abc"), 3u);
  EXPECT_EQ(text::grapheme_count("e\xCC\x81"), 1u);                              // e + combining acute
  EXPECT_EQ(text::grapheme_count("\xF0\x9F\x87\xBA\xF0\x9F\x87\xB8"), 1u);         // flag
  EXPECT_EQ(text::grapheme_count("\xF0\x9F\x91\x8D\xF0\x9F\x8F\xBD"), 1u);         // skin tone
  EXPECT_EQ(text::grapheme_count("\r\n"), 1u);
  EXPECT_EQ(text::grapheme_count("\xED\x95\x9C\xEA\xB5\xAD"), 2u);                 // two hangul syllables
}

TEST(Graphemes, PrefixNeverSplitsACluster) {
  std::string s = "ab\xF0\x9F\x91\xA8\xE2\x80\x8D\xF0\x9F\x91\xA9\xE2\x80\x8D\xF0\x9F\x91\xA7" "c";
  EXPECT_EQ(text::grapheme_prefix(s, 2), "ab");
  EXPECT_EQ(text::grapheme_prefix(s, 3), s.substr(0, s.size() - 1));
  EXPECT_EQ(text::grapheme_prefix(s, 100), s);
  auto b = text::grapheme_boundaries(s);
  EXPECT_EQ(b.front(), 0u);
  EXPECT_EQ(b.back(), s.size());
  EXPECT_EQ(b.size(), 5u);
}

TEST(Whitespace, CollapsesUnicodeSpaces) {
  EXPECT_EQ(text::collapse_whitespace("a  b\n\nc"), "a b c");
  EXPECT_EQ(text::collapse_whitespace("\xC2\xA0 x\t\xE2\x80\x83y  "), "x y");
  EXPECT_TRUE(text::is_blank(" \n\xC2\xA0"));
  EXPECT_FALSE(text::is_blank(" x "));
  auto parts = text::split_whitespace("  one two\nthree ");
  ASSERT_EQ(parts.size(), 3u);
  EXPECT_EQ(parts[2], "three");
}

TEST(CaseFold, HandlesNonAscii) {
  EXPECT_EQ(text::case_fold("FLU Shot"), "flu shot");
  EXPECT_EQ(text::case_fold("Stra\xC3\x9F" "e"), "strasse");
  EXPECT_EQ(text::ascii_lower("AbC\xC3\x89"), "abc\xC3\x89");
}

TEST(Tokens, WordTokensAndPunctuation) {
  std::vector<std::string> expected{"flu", "shot", "works"};
  EXPECT_EQ(text::word_tokens("Flu-shot works!"), expected);
  EXPECT_EQ(text::strip_punctuation("\xE2\x80\x9Chi!\xE2\x80\x9D, there."), "hi there");
}

TEST(Urls, StripsAndDetects) {
  EXPECT_TRUE(text::contains_url("see https://x.y/z now"));
  EXPECT_FALSE(text::contains_url("see x.y now"));
  EXPECT_EQ(text::strip_urls("see https://x.y/z now"), "see now");
  EXPECT_EQ(text::strip_urls("http://a.b"), "");
}

TEST(Utf8Clip, StaysOnSequenceBoundary) {
  std::string s = "a\xC3\xA9";  // a + é (2 bytes)
  EXPECT_EQ(text::utf8_clip(s, 2), "a");
  EXPECT_EQ(text::utf8_clip(s, 3), s);
  EXPECT_EQ(text::trim("  x y \n"), "x y");
}

TEST(Digest, Sha256KnownVectors) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
