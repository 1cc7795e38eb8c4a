#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "crowdnotes/cassette.hpp"
#include "crowdnotes/time.hpp"

namespace crowdnotes {

struct ChatRequest {
  std::string system_prompt;
  std::string user_prompt;
  double temperature = 0.0;
  std::optional<int> max_output_chars;
  std::string model_tag;
  // Part of the cache key; set when the prompt depends on a random draw.
  std::optional<std::uint64_t> seed;
};

struct SearchRequest {
  std::string query;
  int top_k = 10;
  std::optional<Timestamp> before;
};

struct SearchItem {
  std::string title;
  std::string snippet;
  std::string url;
  std::optional<Timestamp> published_at;
};

enum class FetchStatus { kOk, kUnreachable, kNonText };

std::string_view to_string(FetchStatus status);

struct FetchedDocument {
  std::string url;
  std::optional<std::string> raw;  // present iff status == kOk
  Timestamp fetched_at;
  FetchStatus status = FetchStatus::kUnreachable;
};

struct EmbedRequest {
  std::string model_tag;
  std::vector<std::string> inputs;
};

nlohmann::json to_json(const ChatRequest& request);
nlohmann::json to_json(const SearchRequest& request);
nlohmann::json fetch_request_json(std::string_view url);
nlohmann::json to_json(const EmbedRequest& request);

// Canonical form used for keys: object keys sorted, prompt whitespace runs
// collapsed. Two requests that differ only in prompt spacing share a key.
nlohmann::json canonicalize_request(ProviderKind kind, const nlohmann::json& request);
std::string request_digest(ProviderKind kind, const nlohmann::json& request);
std::string canonical_request_key(ProviderKind kind, const nlohmann::json& request);
std::string canonical_request_key(const ChatRequest& request);
std::string canonical_request_key(const SearchRequest& request);

/// Wire-level access to the live providers. Implementations throw
/// Error(kProviderError) on transient failures and Error(kParseError) when a
/// reply cannot be decoded.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual nlohmann::json send(ProviderKind kind, const nlohmann::json& request) = 0;
};

enum class GatewayMode { kReplay, kRecord, kLive };

std::string_view to_string(GatewayMode mode);

struct RetryPolicy {
  int attempts = 3;
  std::chrono::milliseconds initial_backoff{500};
  double multiplier = 2.0;
};

// Chat replies above this size are clipped before they are written to a
// cassette.
inline constexpr std::size_t kMaxRecordedChatBytes = 64 * 1024;

/// Uniform access to chat, search, fetch and embedding providers with a
/// record/replay cassette in front of them.
///
/// REPLAY answers purely from the cassette and fails with kCassetteMiss on
/// an unknown key. RECORD serves known keys from the cassette and records
/// the rest. LIVE never touches the cassette. Safe for concurrent callers.
class Gateway {
 public:
  using Clock = std::function<Timestamp()>;
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  Gateway(GatewayMode mode, std::shared_ptr<Cassette> cassette,
          std::shared_ptr<Transport> transport, RetryPolicy retry = {});

  nlohmann::json resolve(ProviderKind kind, const nlohmann::json& request);

  std::string chat(const ChatRequest& request);
  std::vector<SearchItem> search(const SearchRequest& request);
  FetchedDocument fetch(std::string_view url);
  std::vector<std::vector<double>> embed(const EmbedRequest& request);

  GatewayMode mode() const { return mode_; }
  const Cassette& cassette() const { return *cassette_; }
  std::shared_ptr<Cassette> shared_cassette() const { return cassette_; }

  // Calls that reached the transport, including retries.
  std::size_t transport_calls() const { return transport_calls_.load(); }

  void set_clock(Clock clock) { clock_ = std::move(clock); }
  void set_sleeper(Sleeper sleeper) { sleeper_ = std::move(sleeper); }

 private:
  nlohmann::json call_with_retry(ProviderKind kind, const nlohmann::json& request);

  GatewayMode mode_;
  std::shared_ptr<Cassette> cassette_;
  std::shared_ptr<Transport> transport_;
  RetryPolicy retry_;
  Clock clock_;
  Sleeper sleeper_;
  std::atomic<std::size_t> transport_calls_{0};
};

}  // namespace crowdnotes
