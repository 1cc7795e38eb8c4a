#include "crowdnotes/text.hpp"

#include <cctype>
#include <memory>
#include <optional>
#include <utility>

#include <unicode/brkiter.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utext.h>
#include <unicode/utf8.h>

#include "crowdnotes/errors.hpp"

namespace crowdnotes::text {

namespace {

// Decodes one code point at `pos`; malformed bytes come back as U+FFFD and
// advance by one.
UChar32 next_code_point(std::string_view s, std::size_t& pos) {
  int32_t i = static_cast<int32_t>(pos);
  UChar32 c = 0;
  U8_NEXT(reinterpret_cast<const uint8_t*>(s.data()), i, static_cast<int32_t>(s.size()), c);
  pos = static_cast<std::size_t>(i);
  return c < 0 ? 0xFFFD : c;
}

bool is_space(UChar32 c) { return u_isUWhiteSpace(c) != 0; }

bool is_word_char(UChar32 c) {
  return u_hasBinaryProperty(c, UCHAR_ALPHABETIC) || u_isdigit(c) ||
         (U_GET_GC_MASK(c) & U_GC_M_MASK) != 0;
}

struct BreakIteratorDeleter {
  void operator()(icu::BreakIterator* it) const { delete it; }
};

bool is_scheme_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.';
}

// Finds the next absolute URL at or after `from`; returns [begin, end).
std::optional<std::pair<std::size_t, std::size_t>> find_url(std::string_view s, std::size_t from) {
  std::size_t search = from;
  while (true) {
    std::size_t sep = s.find("://", search);
    if (sep == std::string_view::npos) return std::nullopt;
    std::size_t begin = sep;
    while (begin > from && is_scheme_char(s[begin - 1])) --begin;
    // scheme must start with a letter
    while (begin < sep && !std::isalpha(static_cast<unsigned char>(s[begin]))) ++begin;
    std::size_t end = sep + 3;
    while (end < s.size() && !std::isspace(static_cast<unsigned char>(s[end])) && s[end] != '<' &&
           s[end] != '>' && s[end] != '"') {
      ++end;
    }
    // sentence punctuation after a URL stays with the sentence
    while (end > sep + 3 && std::string_view(".,;:!?)]}'").find(s[end - 1]) != std::string_view::npos) {
      --end;
    }
    if (begin < sep && end > sep + 3) return std::make_pair(begin, end);
    search = sep + 3;
  }
}

}  // namespace

std::vector<std::size_t> grapheme_boundaries(std::string_view utf8) {
  std::vector<std::size_t> out{0};
  if (utf8.empty()) return out;
  UErrorCode status = U_ZERO_ERROR;
  std::unique_ptr<icu::BreakIterator, BreakIteratorDeleter> it(
      icu::BreakIterator::createCharacterInstance(icu::Locale::getRoot(), status));
  if (U_FAILURE(status)) fail(ErrorCode::kInvalidArgument, "ICU break iterator unavailable");
  UText* ut = utext_openUTF8(nullptr, utf8.data(), static_cast<int64_t>(utf8.size()), &status);
  if (U_FAILURE(status)) fail(ErrorCode::kInvalidArgument, "cannot open UTF-8 text");
  it->setText(ut, status);
  it->first();
  for (int32_t b = it->next(); b != icu::BreakIterator::DONE; b = it->next()) {
    out.push_back(static_cast<std::size_t>(b));
  }
  utext_close(ut);
  if (out.back() != utf8.size()) out.push_back(utf8.size());
  return out;
}

std::size_t grapheme_count(std::string_view utf8) { return grapheme_boundaries(utf8).size() - 1; }

std::string_view grapheme_prefix(std::string_view utf8, std::size_t max_graphemes) {
  auto bounds = grapheme_boundaries(utf8);
  if (max_graphemes + 1 >= bounds.size()) return utf8;
  return utf8.substr(0, bounds[max_graphemes]);
}

std::string case_fold(std::string_view utf8) {
  icu::UnicodeString us = icu::UnicodeString::fromUTF8(
      icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
  us.foldCase();
  std::string out;
  us.toUTF8String(out);
  return out;
}

std::string collapse_whitespace(std::string_view utf8) {
  std::string out;
  out.reserve(utf8.size());
  bool pending_space = false;
  std::size_t pos = 0;
  while (pos < utf8.size()) {
    std::size_t start = pos;
    UChar32 c = next_code_point(utf8, pos);
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.append(utf8.substr(start, pos - start));
  }
  return out;
}

std::string_view trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

bool is_blank(std::string_view utf8) {
  std::size_t pos = 0;
  while (pos < utf8.size()) {
    if (!is_space(next_code_point(utf8, pos))) return false;
  }
  return true;
}

std::vector<std::string_view> split_whitespace(std::string_view utf8) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  std::size_t token_start = std::string_view::npos;
  while (pos < utf8.size()) {
    std::size_t start = pos;
    UChar32 c = next_code_point(utf8, pos);
    if (is_space(c)) {
      if (token_start != std::string_view::npos) {
        out.push_back(utf8.substr(token_start, start - token_start));
        token_start = std::string_view::npos;
      }
    } else if (token_start == std::string_view::npos) {
      token_start = start;
    }
  }
  if (token_start != std::string_view::npos) out.push_back(utf8.substr(token_start));
  return out;
}

std::vector<std::string> word_tokens(std::string_view utf8) {
  std::string folded = case_fold(utf8);
  std::vector<std::string> out;
  std::string current;
  std::size_t pos = 0;
  while (pos < folded.size()) {
    std::size_t start = pos;
    UChar32 c = next_code_point(folded, pos);
    if (is_word_char(c)) {
      current.append(folded, start, pos - start);
    } else if (!current.empty()) {
      out.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

std::string strip_punctuation(std::string_view utf8) {
  std::string out;
  out.reserve(utf8.size());
  std::size_t pos = 0;
  while (pos < utf8.size()) {
    std::size_t start = pos;
    UChar32 c = next_code_point(utf8, pos);
    if (!u_ispunct(c)) out.append(utf8.substr(start, pos - start));
  }
  return out;
}

std::string strip_urls(std::string_view utf8) {
  std::string out;
  std::size_t pos = 0;
  while (auto url = find_url(utf8, pos)) {
    out.append(utf8.substr(pos, url->first - pos));
    out.push_back(' ');
    pos = url->second;
  }
  out.append(utf8.substr(pos));
  return collapse_whitespace(out);
}

bool contains_url(std::string_view utf8) { return find_url(utf8, 0).has_value(); }

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view utf8_clip(std::string_view utf8, std::size_t max_bytes) {
  if (utf8.size() <= max_bytes) return utf8;
  std::size_t end = max_bytes;
  // back up over continuation bytes
  while (end > 0 && (static_cast<unsigned char>(utf8[end]) & 0xC0) == 0x80) --end;
  return utf8.substr(0, end);
}

}  // namespace crowdnotes::text
