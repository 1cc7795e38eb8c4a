#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

// UTF-8 text helpers backed by ICU.
namespace crowdnotes::text {

// Number of extended grapheme clusters (user-perceived characters).
std::size_t grapheme_count(std::string_view utf8);

// Byte offsets of every grapheme boundary, including 0 and size().
std::vector<std::size_t> grapheme_boundaries(std::string_view utf8);

// Longest prefix holding at most `max_graphemes` clusters.
std::string_view grapheme_prefix(std::string_view utf8, std::size_t max_graphemes);

// Unicode default case folding.
std::string case_fold(std::string_view utf8);

// Collapses every run of Unicode whitespace to one ASCII space and trims.
std::string collapse_whitespace(std::string_view utf8);

std::string_view trim(std::string_view s);

bool is_blank(std::string_view utf8);

// Splits on Unicode whitespace; views point into `utf8`.
std::vector<std::string_view> split_whitespace(std::string_view utf8);

// Lowercase alphanumeric runs after case folding ("Flu-shot!" -> flu, shot).
std::vector<std::string> word_tokens(std::string_view utf8);

// Removes Unicode punctuation (general category P*).
std::string strip_punctuation(std::string_view utf8);

// Removes absolute URLs (scheme://...) and collapses the surrounding
// whitespace.
std::string strip_urls(std::string_view utf8);

bool contains_url(std::string_view utf8);

std::string ascii_lower(std::string_view s);

// Clips to at most `max_bytes` without splitting a UTF-8 sequence.
std::string_view utf8_clip(std::string_view utf8, std::size_t max_bytes);

}  // namespace crowdnotes::text
