#include "crowdnotes/domain.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <chrono>

#include "crowdnotes/errors.hpp"
#include "crowdnotes/text.hpp"

namespace crowdnotes {

namespace {

bool is_tracking_param(std::string_view key) {
  std::string k = text::ascii_lower(key);
  return k.starts_with("utm_") || k == "fbclid" || k == "gclid";
}

bool valid_host_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '_' ||
         c == '[' || c == ']' || c == ':' || c == '%' || static_cast<unsigned char>(c) >= 0x80;
}

}  // namespace

std::string normalize_url(std::string_view raw) {
  std::string_view s = text::trim(raw);
  auto malformed = [&] { fail(ErrorCode::kMalformedUrl, "cannot parse URL '" + std::string(raw) + "'"); };

  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c)) || std::iscntrl(static_cast<unsigned char>(c))) {
      malformed();
    }
  }
  std::size_t sep = s.find("://");
  if (sep == std::string_view::npos) malformed();
  std::string scheme = text::ascii_lower(s.substr(0, sep));
  if (scheme != "http" && scheme != "https") malformed();

  std::string_view rest = s.substr(sep + 3);
  std::size_t authority_end = rest.find_first_of("/?#");
  std::string_view authority = rest.substr(0, authority_end);
  rest = authority_end == std::string_view::npos ? std::string_view{} : rest.substr(authority_end);

  std::string userinfo;
  if (auto at = authority.rfind('@'); at != std::string_view::npos) {
    userinfo = std::string(authority.substr(0, at + 1));
    authority = authority.substr(at + 1);
  }
  if (authority.empty()) malformed();
  for (char c : authority) {
    if (!valid_host_char(c)) malformed();
  }
  std::string_view host = authority;
  std::string_view port;
  if (auto colon = authority.rfind(':');
      colon != std::string_view::npos && authority.find(']') == std::string_view::npos) {
    host = authority.substr(0, colon);
    port = authority.substr(colon + 1);
    if (port.empty() || !std::all_of(port.begin(), port.end(), [](char c) {
          return std::isdigit(static_cast<unsigned char>(c));
        })) {
      malformed();
    }
  }
  if (host.empty() || host.front() == '.' || host.find("..") != std::string_view::npos) malformed();

  std::string_view fragmentless = rest.substr(0, rest.find('#'));
  std::size_t q = fragmentless.find('?');
  std::string_view path = fragmentless.substr(0, q);
  std::string_view query = q == std::string_view::npos ? std::string_view{} : fragmentless.substr(q + 1);

  std::vector<std::string_view> params;
  while (!query.empty()) {
    std::size_t amp = query.find('&');
    std::string_view p = query.substr(0, amp);
    query = amp == std::string_view::npos ? std::string_view{} : query.substr(amp + 1);
    if (p.empty()) continue;
    if (is_tracking_param(p.substr(0, p.find('=')))) continue;
    params.push_back(p);
  }
  std::stable_sort(params.begin(), params.end(), [](std::string_view a, std::string_view b) {
    return a.substr(0, a.find('=')) < b.substr(0, b.find('='));
  });

  std::string out = scheme + "://" + userinfo + text::ascii_lower(host);
  if (!port.empty()) out += ":" + std::string(port);
  out += path.empty() ? std::string("/") : std::string(path);
  for (std::size_t i = 0; i < params.size(); ++i) {
    out += i == 0 ? '?' : '&';
    out += params[i];
  }
  return out;
}

NoteStatus parse_status(std::string_view label) {
  std::string l = text::ascii_lower(text::trim(label));
  if (l == "helpful" || l == "currently_rated_helpful") return NoteStatus::kHelpful;
  if (l == "not_helpful" || l == "currently_rated_not_helpful") return NoteStatus::kNotHelpful;
  fail(ErrorCode::kUnknownStatus, "unknown note status '" + std::string(label) + "'");
}

std::string_view render_status(NoteStatus status) {
  return status == NoteStatus::kHelpful ? "HELPFUL" : "NOT_HELPFUL";
}

std::string_view to_string(Provenance provenance) {
  switch (provenance) {
    case Provenance::kHuman: return "HUMAN";
    case Provenance::kAugmented: return "AUGMENTED";
    case Provenance::kAutomated: return "AUTOMATED";
  }
  return "HUMAN";
}

namespace {

constexpr std::array<std::pair<RunMode, std::string_view>, 5> kModeNames{{
    {RunMode::kHumanBaseline, "HUMAN_BASELINE"},
    {RunMode::kAugment, "AUGMENT"},
    {RunMode::kAutomate, "AUTOMATE"},
    {RunMode::kAutomateNoDiversity, "AUTOMATE_NO_DIVERSITY"},
    {RunMode::kAutomateNoUtility, "AUTOMATE_NO_UTILITY"},
}};

}  // namespace

std::string_view to_string(RunMode mode) {
  for (const auto& [m, name] : kModeNames) {
    if (m == mode) return name;
  }
  return "AUGMENT";
}

RunMode parse_run_mode(std::string_view name) {
  std::string n = text::ascii_lower(text::trim(name));
  std::replace(n.begin(), n.end(), '-', '_');
  if (n == "baseline" || n == "human") return RunMode::kHumanBaseline;
  if (n == "no_diversity") return RunMode::kAutomateNoDiversity;
  if (n == "no_utility") return RunMode::kAutomateNoUtility;
  for (const auto& [m, mode_name] : kModeNames) {
    if (text::ascii_lower(mode_name) == n) return m;
  }
  fail(ErrorCode::kInvalidArgument, "unknown run mode '" + std::string(name) + "'");
}

std::string_view to_string(TimeCutoff cutoff) {
  return cutoff == TimeCutoff::kNoteCreation ? "NOTE_CREATION" : "NONE";
}

Quota Quota::fixed(int n) {
  if (n < 1) fail(ErrorCode::kInvalidArgument, "quota must be positive");
  Quota q;
  q.value_ = n;
  return q;
}

int Quota::resolve(std::size_t human_url_count) const {
  if (value_) return *value_;
  if (human_url_count == 0) fail(ErrorCode::kInvalidArgument, "AUTO quota needs human URLs");
  return static_cast<int>(human_url_count);
}

std::string Quota::to_string() const { return value_ ? std::to_string(*value_) : "auto"; }

void RunConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) fail(ErrorCode::kInvalidArgument, what);
  };
  require(num_queries >= 1, "num_queries must be positive");
  require(top_k >= 1, "top_k must be positive");
  require(chunk_size >= 1, "chunk_size must be positive");
  require(chunk_overlap < chunk_size, "chunk_overlap must be smaller than chunk_size");
  require(char_limit > 0, "char_limit must be positive");
  require(url_char_cost >= 0, "url_char_cost must be non-negative");
}

FlaggedPost make_post(std::string post_id, std::string text, Timestamp created_at) {
  if (text::is_blank(text)) fail(ErrorCode::kInvalidArgument, "post " + post_id + " has no text");
  auto now = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
  if (created_at > now) {
    fail(ErrorCode::kInvalidArgument, "post " + post_id + " is dated in the future");
  }
  return FlaggedPost{std::move(post_id), std::move(text), created_at};
}

}  // namespace crowdnotes
