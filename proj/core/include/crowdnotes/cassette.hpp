#pragma once

#include <cstddef>
#include <filesystem>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "crowdnotes/time.hpp"

namespace crowdnotes {

enum class ProviderKind { kChat, kSearch, kFetch, kScore };

std::string_view to_string(ProviderKind kind);
ProviderKind parse_provider_kind(std::string_view name);

struct CassetteEntry {
  std::string key;
  ProviderKind provider = ProviderKind::kChat;
  std::string request_digest;
  nlohmann::json response;
  Timestamp recorded_at;

  friend bool operator==(const CassetteEntry&, const CassetteEntry&) = default;
};

nlohmann::json to_json(const CassetteEntry& entry);
CassetteEntry cassette_entry_from_json(const nlohmann::json& j);

// key = sha256(provider || request_digest)
std::string cassette_key(ProviderKind provider, std::string_view request_digest);

/// In-memory index over a line-delimited cassette file.
///
/// Lookups in replay mode read an index that is never mutated after load.
/// Recording appends under a writer lock; the first writer of a key wins.
class Cassette {
 public:
  Cassette() = default;
  Cassette(Cassette&& other) noexcept;
  Cassette& operator=(Cassette&& other) noexcept;

  static Cassette load(const std::filesystem::path& path);
  static Cassette from_entries(std::vector<CassetteEntry> entries);

  std::optional<nlohmann::json> find(std::string_view key) const;

  // Returns false if the key was already present. Throws once frozen.
  bool insert(CassetteEntry entry);

  // Makes the index immutable; later finds skip the lock.
  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }

  std::size_t size() const;
  std::vector<CassetteEntry> entries() const;

  // One entry per line, sorted by key, keys sorted within each record.
  void save(const std::filesystem::path& path) const;
  std::string serialize() const;

 private:
  mutable std::shared_mutex mutex_;
  std::vector<CassetteEntry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
  bool frozen_ = false;
};

}  // namespace crowdnotes
