#include "crowdnotes/cassette.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "crowdnotes/digest.hpp"
#include "crowdnotes/errors.hpp"

namespace crowdnotes {

std::string_view to_string(ProviderKind kind) {
  switch (kind) {
    case ProviderKind::kChat: return "CHAT";
    case ProviderKind::kSearch: return "SEARCH";
    case ProviderKind::kFetch: return "FETCH";
    case ProviderKind::kScore: return "SCORE";
  }
  return "CHAT";
}

ProviderKind parse_provider_kind(std::string_view name) {
  for (auto kind : {ProviderKind::kChat, ProviderKind::kSearch, ProviderKind::kFetch,
                    ProviderKind::kScore}) {
    if (to_string(kind) == name) return kind;
  }
  fail(ErrorCode::kParseError, "unknown provider '" + std::string(name) + "'");
}

std::string cassette_key(ProviderKind provider, std::string_view request_digest) {
  std::string material(to_string(provider));
  material.push_back('\x1f');
  material.append(request_digest);
  return sha256_hex(material);
}

nlohmann::json to_json(const CassetteEntry& entry) {
  return nlohmann::json{
      {"key", entry.key},
      {"provider", std::string(to_string(entry.provider))},
      {"recorded_at", format_iso8601(entry.recorded_at)},
      {"request_digest", entry.request_digest},
      {"response", entry.response},
  };
}

CassetteEntry cassette_entry_from_json(const nlohmann::json& j) {
  try {
    CassetteEntry e;
    e.key = j.at("key").get<std::string>();
    e.provider = parse_provider_kind(j.at("provider").get<std::string>());
    e.request_digest = j.at("request_digest").get<std::string>();
    e.response = j.at("response");
    auto recorded = parse_iso8601(j.at("recorded_at").get<std::string>());
    if (!recorded) fail(ErrorCode::kParseError, "bad recorded_at");
    e.recorded_at = *recorded;
    if (e.key != cassette_key(e.provider, e.request_digest)) {
      fail(ErrorCode::kParseError, "cassette key does not match provider and request digest");
    }
    return e;
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorCode::kParseError, std::string("malformed cassette entry: ") + ex.what());
  }
}

Cassette::Cassette(Cassette&& other) noexcept {
  std::unique_lock lock(other.mutex_);
  entries_ = std::move(other.entries_);
  index_ = std::move(other.index_);
  frozen_ = other.frozen_;
}

Cassette& Cassette::operator=(Cassette&& other) noexcept {
  if (this != &other) {
    std::scoped_lock lock(mutex_, other.mutex_);
    entries_ = std::move(other.entries_);
    index_ = std::move(other.index_);
    frozen_ = other.frozen_;
  }
  return *this;
}

Cassette Cassette::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoError, "cannot open cassette " + path.string());
  Cassette cassette;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& ex) {
      fail(ErrorCode::kParseError,
           path.string() + ":" + std::to_string(line_no) + ": " + ex.what());
    }
    if (!cassette.insert(cassette_entry_from_json(j))) {
      fail(ErrorCode::kParseError,
           path.string() + ":" + std::to_string(line_no) + ": duplicate cassette key");
    }
  }
  return cassette;
}

Cassette Cassette::from_entries(std::vector<CassetteEntry> entries) {
  Cassette cassette;
  for (auto& e : entries) {
    if (!cassette.insert(std::move(e))) fail(ErrorCode::kParseError, "duplicate cassette key");
  }
  return cassette;
}

std::optional<nlohmann::json> Cassette::find(std::string_view key) const {
  auto lookup = [&]() -> std::optional<nlohmann::json> {
    auto it = index_.find(std::string(key));
    if (it == index_.end()) return std::nullopt;
    return std::optional<nlohmann::json>(std::in_place, entries_[it->second].response);
  };
  if (frozen_) return lookup();
  std::shared_lock lock(mutex_);
  return lookup();
}

bool Cassette::insert(CassetteEntry entry) {
  if (frozen_) fail(ErrorCode::kPreconditionViolation, "cassette is frozen");
  std::unique_lock lock(mutex_);
  if (index_.count(entry.key)) return false;
  index_.emplace(entry.key, entries_.size());
  entries_.push_back(std::move(entry));
  return true;
}

std::size_t Cassette::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

std::vector<CassetteEntry> Cassette::entries() const {
  std::shared_lock lock(mutex_);
  return entries_;
}

std::string Cassette::serialize() const {
  auto sorted = entries();
  std::sort(sorted.begin(), sorted.end(),
            [](const CassetteEntry& a, const CassetteEntry& b) { return a.key < b.key; });
  std::string out;
  for (const auto& e : sorted) {
    out += to_json(e).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
    out.push_back('\n');
  }
  return out;
}

void Cassette::save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIoError, "cannot write cassette " + path.string());
  out << serialize();
  if (!out) fail(ErrorCode::kIoError, "cannot write cassette " + path.string());
}

}  // namespace crowdnotes
