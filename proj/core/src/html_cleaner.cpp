#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "crowdnotes/errors.hpp"
#include "crowdnotes/retrieval.hpp"
#include "crowdnotes/text.hpp"

namespace crowdnotes {

namespace {

enum class Region { kNone, kHeader, kFooter, kSidebar, kReferences, kScript, kUncounted };

constexpr std::array<std::string_view, 14> kVoidTags{"area", "base", "br",    "col",  "embed",
                                                     "hr",   "img",  "input", "link", "meta",
                                                     "param", "source", "track", "wbr"};

constexpr std::array<std::string_view, 24> kBlockTags{
    "p",     "div",   "section", "article", "main",  "br",     "li",      "ul",
    "ol",    "tr",    "td",      "th",      "table", "blockquote", "pre", "dd",
    "dt",    "dl",    "figure",  "figcaption", "hr", "h1",     "h2",      "h3"};

constexpr std::array<std::string_view, 5> kReferenceHeadings{"references", "bibliography",
                                                             "citations", "footnotes",
                                                             "reference"};

template <std::size_t N>
bool contains(const std::array<std::string_view, N>& set, std::string_view v) {
  return std::find(set.begin(), set.end(), v) != set.end();
}

int heading_level(std::string_view tag) {
  if (tag.size() == 2 && tag[0] == 'h' && tag[1] >= '1' && tag[1] <= '6') return tag[1] - '0';
  return 0;
}

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = 0xFFFD;
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::optional<std::uint32_t> named_entity(std::string_view name) {
  static constexpr std::pair<std::string_view, std::uint32_t> kEntities[] = {
      {"amp", '&'},      {"lt", '<'},       {"gt", '>'},       {"quot", '"'},
      {"apos", '\''},    {"nbsp", 0xA0},    {"mdash", 0x2014}, {"ndash", 0x2013},
      {"hellip", 0x2026}, {"rsquo", 0x2019}, {"lsquo", 0x2018}, {"rdquo", 0x201D},
      {"ldquo", 0x201C}, {"copy", 0xA9},    {"reg", 0xAE},     {"deg", 0xB0},
      {"middot", 0xB7},  {"bull", 0x2022},  {"times", 0xD7},   {"shy", 0xAD},
      {"plusmn", 0xB1},  {"micro", 0xB5},   {"le", 0x2264},    {"ge", 0x2265},
      {"euro", 0x20AC},  {"pound", 0xA3},   {"trade", 0x2122}, {"frac12", 0xBD},
      {"aacute", 0xE1},  {"agrave", 0xE0},  {"auml", 0xE4},    {"ccedil", 0xE7},
      {"eacute", 0xE9},  {"egrave", 0xE8},  {"iacute", 0xED},  {"ntilde", 0xF1},
      {"oacute", 0xF3},  {"ouml", 0xF6},    {"uacute", 0xFA},  {"uuml", 0xFC},
      {"szlig", 0xDF},
  };
  for (const auto& [n, cp] : kEntities) {
    if (n == name) return cp;
  }
  return std::nullopt;
}

std::string decode_entities(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] != '&') {
      out.push_back(s[i++]);
      continue;
    }
    std::size_t semi = s.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 10) {
      out.push_back(s[i++]);
      continue;
    }
    std::string_view name = s.substr(i + 1, semi - i - 1);
    std::optional<std::uint32_t> cp;
    if (name.size() > 1 && name[0] == '#') {
      bool hex = name[1] == 'x' || name[1] == 'X';
      std::string digits(name.substr(hex ? 2 : 1));
      if (!digits.empty() &&
          std::all_of(digits.begin(), digits.end(), [hex](char c) {
            return hex ? std::isxdigit(static_cast<unsigned char>(c)) != 0
                       : std::isdigit(static_cast<unsigned char>(c)) != 0;
          })) {
        cp = static_cast<std::uint32_t>(std::stoul(digits, nullptr, hex ? 16 : 10));
      }
    } else {
      cp = named_entity(name);
    }
    if (!cp) {
      out.push_back(s[i++]);
      continue;
    }
    append_utf8(out, *cp);
    i = semi + 1;
  }
  return out;
}

std::string normalized_heading(std::string_view heading) {
  std::string h = text::case_fold(text::collapse_whitespace(heading));
  // leading section numbers ("7. References")
  std::size_t b = 0;
  while (b < h.size() && (std::isdigit(static_cast<unsigned char>(h[b])) || h[b] == '.' ||
                          h[b] == ' ' || h[b] == '#')) {
    ++b;
  }
  std::string rest = text::strip_punctuation(h.substr(b));
  return std::string(text::trim(rest));
}

bool is_reference_heading(std::string_view heading) {
  return contains(kReferenceHeadings, normalized_heading(heading));
}

struct Tag {
  std::string name;
  std::string attrs;
  bool closing = false;
  bool self_closing = false;
};

// Attribute tokens from class, id and role, lowercased.
std::vector<std::string> attribute_tokens(std::string_view attrs, std::string_view attr_name) {
  std::vector<std::string> out;
  std::string lower = text::ascii_lower(attrs);
  std::size_t pos = 0;
  while ((pos = lower.find(attr_name, pos)) != std::string::npos) {
    bool word_start = pos == 0 || std::isspace(static_cast<unsigned char>(lower[pos - 1]));
    std::size_t p = pos + attr_name.size();
    pos = p;
    if (!word_start) continue;
    while (p < lower.size() && lower[p] == ' ') ++p;
    if (p >= lower.size() || lower[p] != '=') continue;
    ++p;
    while (p < lower.size() && lower[p] == ' ') ++p;
    std::string value;
    if (p < lower.size() && (lower[p] == '"' || lower[p] == '\'')) {
      char q = lower[p];
      std::size_t end = lower.find(q, p + 1);
      value = lower.substr(p + 1, end == std::string::npos ? std::string::npos : end - p - 1);
    } else {
      std::size_t end = p;
      while (end < lower.size() && !std::isspace(static_cast<unsigned char>(lower[end]))) ++end;
      value = lower.substr(p, end - p);
    }
    for (auto token : text::split_whitespace(value)) out.emplace_back(token);
  }
  return out;
}

Region region_for(const Tag& tag) {
  const std::string& n = tag.name;
  if (n == "nav" || n == "aside") return Region::kSidebar;
  if (n == "header") return Region::kHeader;
  if (n == "footer") return Region::kFooter;
  if (n == "noscript") return Region::kScript;
  if (n == "head" || n == "template" || n == "svg" || n == "iframe" || n == "button" ||
      n == "select" || n == "object") {
    return Region::kUncounted;
  }
  for (const auto& role : attribute_tokens(tag.attrs, "role")) {
    if (role == "navigation" || role == "complementary") return Region::kSidebar;
    if (role == "banner") return Region::kHeader;
    if (role == "contentinfo") return Region::kFooter;
  }
  for (const char* attr : {"class", "id"}) {
    for (const auto& token : attribute_tokens(tag.attrs, attr)) {
      if (token == "sidebar") return Region::kSidebar;
      if (token == "references" || token == "reflist" || token == "footnotes" ||
          token == "bibliography" || token == "citations") {
        return Region::kReferences;
      }
    }
  }
  return Region::kNone;
}

class HtmlCleaner {
 public:
  explicit HtmlCleaner(std::string_view src) : src_(src) {}

  void run() {
    while (pos_ < src_.size()) {
      if (src_[pos_] == '<') {
        handle_markup();
      } else {
        std::size_t next = src_.find('<', pos_);
        if (next == std::string_view::npos) next = src_.size();
        emit_text(src_.substr(pos_, next - pos_));
        pos_ = next;
      }
    }
  }

  std::string text() const { return text::collapse_whitespace(out_); }
  const RemovedRegions& removed() const { return removed_; }

 private:
  void count(Region region) {
    switch (region) {
      case Region::kHeader: ++removed_.header; break;
      case Region::kFooter: ++removed_.footer; break;
      case Region::kSidebar: ++removed_.sidebar; break;
      case Region::kReferences: ++removed_.references; break;
      case Region::kScript: ++removed_.script; break;
      default: break;
    }
  }

  void emit_text(std::string_view raw) {
    if (skip_depth_ > 0 || in_references()) return;
    out_ += decode_entities(raw);
  }

  bool in_references() const { return reference_level_ > 0; }

  void skip_past(std::string_view terminator) {
    std::size_t end = src_.find(terminator, pos_);
    pos_ = end == std::string_view::npos ? src_.size() : end + terminator.size();
  }

  void skip_raw_text(std::string_view tag) {
    std::string closing = "</" + std::string(tag);
    std::string lower_rest = text::ascii_lower(src_.substr(pos_));
    std::size_t end = lower_rest.find(closing);
    if (end == std::string::npos) {
      pos_ = src_.size();
      return;
    }
    pos_ += end;
    skip_past(">");
  }

  std::optional<Tag> parse_tag() {
    std::size_t p = pos_ + 1;
    Tag tag;
    if (p < src_.size() && src_[p] == '/') {
      tag.closing = true;
      ++p;
    }
    std::size_t name_start = p;
    while (p < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[p])) || src_[p] == '-' ||
                               src_[p] == ':')) {
      ++p;
    }
    if (p == name_start || !std::isalpha(static_cast<unsigned char>(src_[name_start]))) {
      return std::nullopt;
    }
    tag.name = text::ascii_lower(src_.substr(name_start, p - name_start));
    std::size_t attrs_start = p;
    char quote = 0;
    while (p < src_.size()) {
      char c = src_[p];
      if (quote) {
        if (c == quote) quote = 0;
      } else if (c == '"' || c == '\'') {
        quote = c;
      } else if (c == '>') {
        break;
      }
      ++p;
    }
    tag.attrs = std::string(src_.substr(attrs_start, p - attrs_start));
    if (!tag.attrs.empty() && tag.attrs.back() == '/') tag.self_closing = true;
    pos_ = p < src_.size() ? p + 1 : src_.size();
    return tag;
  }

  void handle_markup() {
    if (src_.substr(pos_, 4) == "<!--") {
      skip_past("-->");
      return;
    }
    if (src_.substr(pos_, 2) == "<!" || src_.substr(pos_, 2) == "<?") {
      skip_past(">");
      return;
    }
    auto tag = parse_tag();
    if (!tag) {
      emit_text("<");
      ++pos_;
      return;
    }
    if (tag->closing) {
      end_tag(*tag);
    } else {
      start_tag(*tag);
    }
  }

  void start_tag(const Tag& tag) {
    bool is_void = contains(kVoidTags, tag.name) || tag.self_closing;
    if (skip_depth_ > 0) {
      if (tag.name == skip_tag_ && !is_void) ++skip_depth_;
      return;
    }
    if (tag.name == "script" || tag.name == "style") {
      ++removed_.script;
      skip_raw_text(tag.name);
      return;
    }
    if (!is_void) {
      Region region = region_for(tag);
      if (region != Region::kNone) {
        count(region);
        skip_tag_ = tag.name;
        skip_depth_ = 1;
        return;
      }
    }
    if (int level = heading_level(tag.name)) {
      if (in_references() && level <= reference_level_) reference_level_ = 0;
      out_.push_back('\n');
      heading_level_ = level;
      heading_start_ = out_.size();
      return;
    }
    if (contains(kBlockTags, tag.name)) out_.push_back('\n');
  }

  void end_tag(const Tag& tag) {
    if (skip_depth_ > 0) {
      if (tag.name == skip_tag_ && --skip_depth_ == 0) skip_tag_.clear();
      return;
    }
    if (int level = heading_level(tag.name); level && heading_level_ == level) {
      heading_level_ = 0;
      if (!in_references() && heading_start_ <= out_.size() &&
          is_reference_heading(std::string_view(out_).substr(heading_start_))) {
        out_.resize(heading_start_);
        reference_level_ = level;
        ++removed_.references;
      }
      out_.push_back('\n');
      return;
    }
    if (contains(kBlockTags, tag.name)) out_.push_back('\n');
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::string out_;
  RemovedRegions removed_;
  std::string skip_tag_;
  int skip_depth_ = 0;
  int heading_level_ = 0;
  std::size_t heading_start_ = 0;
  int reference_level_ = 0;
};

int markdown_heading_level(std::string_view line) {
  std::size_t n = 0;
  while (n < line.size() && line[n] == '#') ++n;
  if (n == 0 || n > 6 || (n < line.size() && line[n] != ' ')) return 0;
  return static_cast<int>(n);
}

// Plain or markdown text: drop reference sections, then collapse spaces.
std::string clean_plain_text(std::string_view raw, RemovedRegions& removed) {
  std::string kept;
  int reference_level = 0;  // 7 = until end of text
  std::size_t pos = 0;
  while (pos <= raw.size()) {
    std::size_t nl = raw.find('\n', pos);
    if (nl == std::string_view::npos) nl = raw.size();
    std::string_view line = raw.substr(pos, nl - pos);
    pos = nl + 1;
    std::string_view trimmed = text::trim(line);
    int level = markdown_heading_level(trimmed);
    if (reference_level && level && level <= reference_level) reference_level = 0;
    if (!reference_level && (level || trimmed.size() < 32) && !trimmed.empty() &&
        is_reference_heading(trimmed)) {
      reference_level = level ? level : 7;
      ++removed.references;
      continue;
    }
    if (reference_level) continue;
    kept.append(line);
    kept.push_back('\n');
    if (nl == raw.size()) break;
  }
  return text::collapse_whitespace(kept);
}

}  // namespace

bool looks_like_markup(std::string_view raw) {
  std::string_view t = text::trim(raw);
  if (t.empty()) return false;
  std::string head = text::ascii_lower(t.substr(0, std::min<std::size_t>(t.size(), 4096)));
  if (t.front() == '<' && (head.starts_with("<!doctype") || head.starts_with("<html") ||
                           head.find('>') != std::string::npos)) {
    return true;
  }
  for (std::string_view marker : {"<html", "<body", "<p>", "<p ", "<div", "</p>", "</div>"}) {
    if (head.find(marker) != std::string::npos) return true;
  }
  return false;
}

CleanedText clean_document(const FetchedDocument& doc) {
  if (doc.status != FetchStatus::kOk || !doc.raw) {
    fail(ErrorCode::kPreconditionViolation, "document " + doc.url + " was not fetched");
  }
  CleanedText cleaned;
  cleaned.url = doc.url;
  if (looks_like_markup(*doc.raw)) {
    HtmlCleaner cleaner(*doc.raw);
    cleaner.run();
    cleaned.text = cleaner.text();
    cleaned.removed = cleaner.removed();
  } else {
    cleaned.text = clean_plain_text(*doc.raw, cleaned.removed);
  }
  if (cleaned.text.empty()) fail(ErrorCode::kEmptyAfterClean, "no body text in " + doc.url);
  return cleaned;
}

}  // namespace crowdnotes
