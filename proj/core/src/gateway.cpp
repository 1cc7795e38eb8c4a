#include "crowdnotes/gateway.hpp"

#include <chrono>
#include <cmath>
#include <thread>

#include <spdlog/spdlog.h>

#include "crowdnotes/digest.hpp"
#include "crowdnotes/errors.hpp"
#include "crowdnotes/text.hpp"

namespace crowdnotes {

namespace {

std::string dump_canonical(const nlohmann::json& j) {
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

template <typename T>
T field(const nlohmann::json& j, const char* name, ProviderKind kind) {
  try {
    return j.at(name).get<T>();
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorCode::kParseError, std::string(to_string(kind)) + " response: " + ex.what());
  }
}

std::optional<Timestamp> optional_time(const nlohmann::json& j, const char* name) {
  if (!j.contains(name) || j.at(name).is_null()) return std::nullopt;
  auto t = parse_iso8601(j.at(name).get<std::string>());
  if (!t) fail(ErrorCode::kParseError, std::string("bad timestamp in field ") + name);
  return t;
}

}  // namespace

std::string_view to_string(FetchStatus status) {
  switch (status) {
    case FetchStatus::kOk: return "OK";
    case FetchStatus::kUnreachable: return "UNREACHABLE";
    case FetchStatus::kNonText: return "NON_TEXT";
  }
  return "UNREACHABLE";
}

std::string_view to_string(GatewayMode mode) {
  switch (mode) {
    case GatewayMode::kReplay: return "REPLAY";
    case GatewayMode::kRecord: return "RECORD";
    case GatewayMode::kLive: return "LIVE";
  }
  return "LIVE";
}

nlohmann::json to_json(const ChatRequest& request) {
  nlohmann::json j{
      {"system_prompt", request.system_prompt},
      {"user_prompt", request.user_prompt},
      {"temperature", request.temperature},
      {"model_tag", request.model_tag},
  };
  if (request.max_output_chars) j["max_output_chars"] = *request.max_output_chars;
  if (request.seed) j["seed"] = *request.seed;
  return j;
}

nlohmann::json to_json(const SearchRequest& request) {
  nlohmann::json j{{"query", request.query}, {"top_k", request.top_k}};
  if (request.before) j["before"] = format_iso8601(*request.before);
  return j;
}

nlohmann::json fetch_request_json(std::string_view url) {
  return nlohmann::json{{"url", std::string(url)}};
}

nlohmann::json to_json(const EmbedRequest& request) {
  return nlohmann::json{{"model_tag", request.model_tag}, {"inputs", request.inputs}};
}

nlohmann::json canonicalize_request(ProviderKind kind, const nlohmann::json& request) {
  nlohmann::json canonical = request;
  if (kind == ProviderKind::kChat) {
    for (const char* name : {"system_prompt", "user_prompt"}) {
      if (canonical.contains(name) && canonical[name].is_string()) {
        canonical[name] = text::collapse_whitespace(canonical[name].get<std::string>());
      }
    }
  }
  return canonical;
}

std::string request_digest(ProviderKind kind, const nlohmann::json& request) {
  return sha256_hex(dump_canonical(canonicalize_request(kind, request)));
}

std::string canonical_request_key(ProviderKind kind, const nlohmann::json& request) {
  return cassette_key(kind, request_digest(kind, request));
}

std::string canonical_request_key(const ChatRequest& request) {
  return canonical_request_key(ProviderKind::kChat, to_json(request));
}

std::string canonical_request_key(const SearchRequest& request) {
  return canonical_request_key(ProviderKind::kSearch, to_json(request));
}

Gateway::Gateway(GatewayMode mode, std::shared_ptr<Cassette> cassette,
                 std::shared_ptr<Transport> transport, RetryPolicy retry)
    : mode_(mode),
      cassette_(cassette ? std::move(cassette) : std::make_shared<Cassette>()),
      transport_(std::move(transport)),
      retry_(retry),
      clock_([] { return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()); }),
      sleeper_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }) {
  if (mode_ == GatewayMode::kReplay) {
    cassette_->freeze();
  } else if (!transport_) {
    fail(ErrorCode::kConfigError,
         std::string(to_string(mode_)) + " mode needs a transport for live provider calls");
  }
  if (retry_.attempts < 1) fail(ErrorCode::kInvalidArgument, "retry attempts must be positive");
}

nlohmann::json Gateway::call_with_retry(ProviderKind kind, const nlohmann::json& request) {
  auto delay = retry_.initial_backoff;
  for (int attempt = 1;; ++attempt) {
    ++transport_calls_;
    try {
      return transport_->send(kind, request);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kProviderError) throw;
      if (attempt >= retry_.attempts) {
        fail(ErrorCode::kProviderError, std::string(to_string(kind)) + " call failed after " +
                                            std::to_string(attempt) + " attempts: " + e.what());
      }
      spdlog::warn("{} call failed (attempt {}/{}): {}", to_string(kind), attempt,
                   retry_.attempts, e.what());
      sleeper_(delay);
      delay = std::chrono::milliseconds(
          static_cast<std::int64_t>(std::llround(static_cast<double>(delay.count()) * retry_.multiplier)));
    }
  }
}

nlohmann::json Gateway::resolve(ProviderKind kind, const nlohmann::json& request) {
  if (mode_ == GatewayMode::kLive) return call_with_retry(kind, request);

  std::string digest = request_digest(kind, request);
  std::string key = cassette_key(kind, digest);
  if (auto hit = cassette_->find(key)) return *hit;
  if (mode_ == GatewayMode::kReplay) {
    fail(ErrorCode::kCassetteMiss,
         "no recorded " + std::string(to_string(kind)) + " response for key " + key);
  }

  nlohmann::json response = call_with_retry(kind, request);
  if (kind == ProviderKind::kChat && response.contains("text") && response["text"].is_string()) {
    const auto& full = response["text"].get_ref<const std::string&>();
    if (full.size() > kMaxRecordedChatBytes) {
      response["text"] = std::string(text::utf8_clip(full, kMaxRecordedChatBytes));
      response["clipped"] = true;
    }
  }
  CassetteEntry entry{key, kind, digest, response, clock_()};
  if (!cassette_->insert(std::move(entry))) {
    // another thread recorded the same request first
    if (auto hit = cassette_->find(key)) return *hit;
  }
  return response;
}

std::string Gateway::chat(const ChatRequest& request) {
  auto response = resolve(ProviderKind::kChat, to_json(request));
  return field<std::string>(response, "text", ProviderKind::kChat);
}

std::vector<SearchItem> Gateway::search(const SearchRequest& request) {
  if (request.top_k < 1) fail(ErrorCode::kInvalidArgument, "search top_k must be positive");
  auto response = resolve(ProviderKind::kSearch, to_json(request));
  auto items = field<nlohmann::json>(response, "items", ProviderKind::kSearch);
  if (!items.is_array()) fail(ErrorCode::kParseError, "SEARCH response: items is not an array");
  std::vector<SearchItem> out;
  for (const auto& item : items) {
    SearchItem s;
    s.url = field<std::string>(item, "url", ProviderKind::kSearch);
    s.title = item.value("title", std::string{});
    s.snippet = item.value("snippet", std::string{});
    s.published_at = optional_time(item, "published_at");
    out.push_back(std::move(s));
  }
  return out;
}

FetchedDocument Gateway::fetch(std::string_view url) {
  auto response = resolve(ProviderKind::kFetch, fetch_request_json(url));
  FetchedDocument doc;
  doc.url = std::string(url);
  std::string status = field<std::string>(response, "status", ProviderKind::kFetch);
  if (status == "OK") {
    doc.status = FetchStatus::kOk;
  } else if (status == "UNREACHABLE") {
    doc.status = FetchStatus::kUnreachable;
  } else if (status == "NON_TEXT") {
    doc.status = FetchStatus::kNonText;
  } else {
    fail(ErrorCode::kParseError, "FETCH response: unknown status " + status);
  }
  bool has_raw = response.contains("raw") && response["raw"].is_string();
  if (has_raw != (doc.status == FetchStatus::kOk)) {
    fail(ErrorCode::kParseError, "FETCH response: raw must be present iff status is OK");
  }
  if (has_raw) doc.raw = response["raw"].get<std::string>();
  doc.fetched_at = optional_time(response, "fetched_at").value_or(Timestamp{});
  return doc;
}

std::vector<std::vector<double>> Gateway::embed(const EmbedRequest& request) {
  auto response = resolve(ProviderKind::kScore, to_json(request));
  return field<std::vector<std::vector<double>>>(response, "embeddings", ProviderKind::kScore);
}

}  // namespace crowdnotes
