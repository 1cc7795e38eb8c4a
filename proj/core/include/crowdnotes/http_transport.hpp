#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "crowdnotes/gateway.hpp"

namespace crowdnotes {

/// Live provider endpoints, normally read from the environment:
///
///   CROWDNOTES_CHAT_URL       OpenAI-compatible chat completions URL
///   CROWDNOTES_CHAT_KEY       bearer token
///   CROWDNOTES_CHAT_ROUTES    optional "model=url;model=url" overrides
///   CROWDNOTES_SEARCH_URL     Google Custom Search JSON API URL
///   CROWDNOTES_SEARCH_KEY     API key
///   CROWDNOTES_SEARCH_CX      search engine id
///   CROWDNOTES_SEARCH_PARAMS  optional extra query string, e.g. "gl=us"
///   CROWDNOTES_FETCH_URL      reader prefix; the page URL is appended
///   CROWDNOTES_FETCH_KEY      optional bearer token
///   CROWDNOTES_EMBED_URL      OpenAI-compatible embeddings URL
///   CROWDNOTES_EMBED_KEY      bearer token
struct HttpEndpoints {
  std::string chat_url;
  std::string chat_key;
  std::map<std::string, std::string> chat_routes;
  std::string search_url;
  std::string search_key;
  std::string search_cx;
  std::string search_params;
  std::string fetch_url;
  std::string fetch_key;
  std::string embed_url;
  std::string embed_key;
  std::chrono::seconds timeout{60};

  static HttpEndpoints from_env();

  // Names of variables required for chat/search/fetch that are unset.
  std::vector<std::string> missing() const;
};

class HttpTransport final : public Transport {
 public:
  explicit HttpTransport(HttpEndpoints endpoints);

  nlohmann::json send(ProviderKind kind, const nlohmann::json& request) override;

 private:
  nlohmann::json send_chat(const nlohmann::json& request);
  nlohmann::json send_search(const nlohmann::json& request);
  nlohmann::json send_fetch(const nlohmann::json& request);
  nlohmann::json send_embed(const nlohmann::json& request);

  HttpEndpoints endpoints_;
};

}  // namespace crowdnotes
