#include "crowdnotes/http_transport.hpp"

#include <cstdlib>
#include <sstream>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "crowdnotes/errors.hpp"
#include "crowdnotes/text.hpp"

namespace crowdnotes {

namespace {

using nlohmann::json;

std::string env(const char* name) {
  const char* v = std::getenv(name);
  return v ? std::string(v) : std::string();
}

struct SplitUrl {
  std::string base;  // scheme://host[:port]
  std::string path;  // path and query, at least "/"
};

SplitUrl split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) fail(ErrorCode::kConfigError, "endpoint is not absolute: " + url);
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

httplib::Client make_client(const std::string& base, std::chrono::seconds timeout) {
  httplib::Client client(base);
  client.set_connection_timeout(std::chrono::seconds(10));
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  client.set_follow_location(true);
  return client;
}

httplib::Headers auth_headers(const std::string& key) {
  httplib::Headers h;
  if (!key.empty()) h.emplace("Authorization", "Bearer " + key);
  return h;
}

[[noreturn]] void transport_failure(const std::string& what, const httplib::Result& res) {
  if (!res) {
    fail(ErrorCode::kProviderError, what + ": " + httplib::to_string(res.error()));
  }
  fail(ErrorCode::kProviderError,
       what + ": HTTP " + std::to_string(res->status) + " " + text::utf8_clip(res->body, 300).data());
}

json parse_body(const std::string& what, const std::string& body) {
  try {
    return json::parse(body);
  } catch (const json::exception& e) {
    fail(ErrorCode::kParseError, what + ": response is not JSON: " + e.what());
  }
}

std::string now_iso() {
  return format_iso8601(std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()));
}

bool is_text_type(const std::string& content_type) {
  std::string ct = text::ascii_lower(content_type);
  if (ct.empty()) return true;
  return ct.starts_with("text/") || ct.find("json") != std::string::npos ||
         ct.find("xml") != std::string::npos || ct.find("markdown") != std::string::npos;
}

}  // namespace

HttpEndpoints HttpEndpoints::from_env() {
  HttpEndpoints e;
  e.chat_url = env("CROWDNOTES_CHAT_URL");
  e.chat_key = env("CROWDNOTES_CHAT_KEY");
  std::string routes = env("CROWDNOTES_CHAT_ROUTES");
  std::stringstream ss(routes);
  std::string item;
  while (std::getline(ss, item, ';')) {
    auto eq = item.find('=');
    if (eq == std::string::npos) continue;
    e.chat_routes[std::string(text::trim(item.substr(0, eq)))] =
        std::string(text::trim(item.substr(eq + 1)));
  }
  e.search_url = env("CROWDNOTES_SEARCH_URL");
  if (e.search_url.empty()) e.search_url = "https://www.googleapis.com/customsearch/v1";
  e.search_key = env("CROWDNOTES_SEARCH_KEY");
  e.search_cx = env("CROWDNOTES_SEARCH_CX");
  e.search_params = env("CROWDNOTES_SEARCH_PARAMS");
  e.fetch_url = env("CROWDNOTES_FETCH_URL");
  if (e.fetch_url.empty()) e.fetch_url = "https://r.jina.ai/";
  e.fetch_key = env("CROWDNOTES_FETCH_KEY");
  e.embed_url = env("CROWDNOTES_EMBED_URL");
  e.embed_key = env("CROWDNOTES_EMBED_KEY");
  return e;
}

std::vector<std::string> HttpEndpoints::missing() const {
  std::vector<std::string> out;
  if (chat_url.empty() && chat_routes.empty()) out.push_back("CROWDNOTES_CHAT_URL");
  if (search_key.empty()) out.push_back("CROWDNOTES_SEARCH_KEY");
  if (search_cx.empty()) out.push_back("CROWDNOTES_SEARCH_CX");
  return out;
}

HttpTransport::HttpTransport(HttpEndpoints endpoints) : endpoints_(std::move(endpoints)) {}

json HttpTransport::send(ProviderKind kind, const json& request) {
  switch (kind) {
    case ProviderKind::kChat: return send_chat(request);
    case ProviderKind::kSearch: return send_search(request);
    case ProviderKind::kFetch: return send_fetch(request);
    case ProviderKind::kScore: return send_embed(request);
  }
  fail(ErrorCode::kInvalidArgument, "unknown provider");
}

json HttpTransport::send_chat(const json& request) {
  std::string model = request.value("model_tag", "");
  auto route = endpoints_.chat_routes.find(model);
  const std::string& url = route != endpoints_.chat_routes.end() ? route->second : endpoints_.chat_url;
  if (url.empty()) fail(ErrorCode::kConfigError, "no chat endpoint configured for model " + model);

  json body = {{"model", model},
               {"temperature", request.value("temperature", 0.0)},
               {"messages",
                {{{"role", "system"}, {"content", request.value("system_prompt", "")}},
                 {{"role", "user"}, {"content", request.value("user_prompt", "")}}}}};
  if (request.contains("seed")) body["seed"] = request["seed"];

  auto [base, path] = split_url(url);
  auto client = make_client(base, endpoints_.timeout);
  auto res = client.Post(path, auth_headers(endpoints_.chat_key), body.dump(), "application/json");
  if (!res || res->status != 200) transport_failure("chat", res);
  json reply = parse_body("chat", res->body);
  try {
    const json& content = reply.at("choices").at(0).at("message").at("content");
    return {{"text", content.is_null() ? std::string() : content.get<std::string>()}};
  } catch (const json::exception& e) {
    fail(ErrorCode::kParseError, std::string("chat: unexpected response shape: ") + e.what());
  }
}

json HttpTransport::send_search(const json& request) {
  const int top_k = request.value("top_k", 10);
  auto [base, path] = split_url(endpoints_.search_url);
  auto client = make_client(base, endpoints_.timeout);

  json items = json::array();
  // The JSON API returns at most 10 results per page.
  for (int start = 1; start <= top_k; start += 10) {
    httplib::Params params{{"key", endpoints_.search_key},
                           {"cx", endpoints_.search_cx},
                           {"q", request.value("query", "")},
                           {"num", std::to_string(std::min(10, top_k - start + 1))},
                           {"start", std::to_string(start)}};
    if (request.contains("before")) {
      // date restriction: everything up to and including the cutoff day
      std::string day = request["before"].get<std::string>().substr(0, 10);
      day.erase(std::remove(day.begin(), day.end(), '-'), day.end());
      params.emplace("sort", "date:r:19700101:" + day);
    }
    std::stringstream extra(endpoints_.search_params);
    std::string kv;
    while (std::getline(extra, kv, '&')) {
      auto eq = kv.find('=');
      if (eq != std::string::npos) params.emplace(kv.substr(0, eq), kv.substr(eq + 1));
    }
    auto res = client.Get(path, params, httplib::Headers{});
    if (!res || res->status != 200) transport_failure("search", res);
    json reply = parse_body("search", res->body);
    if (!reply.contains("items")) break;
    for (const auto& item : reply["items"]) {
      items.push_back({{"title", item.value("title", "")},
                       {"snippet", item.value("snippet", "")},
                       {"url", item.value("link", "")}});
    }
    if (reply["items"].size() < 10) break;
  }
  return {{"items", items}};
}

json HttpTransport::send_fetch(const json& request) {
  std::string target = request.value("url", "");
  auto [base, path] = split_url(endpoints_.fetch_url);
  auto client = make_client(base, endpoints_.timeout);
  auto res = client.Get(path + target, auth_headers(endpoints_.fetch_key));
  if (!res) transport_failure("fetch", res);
  if (res->status == 429 || res->status >= 500) transport_failure("fetch", res);
  json out = {{"fetched_at", now_iso()}};
  if (res->status != 200) {
    out["status"] = "UNREACHABLE";
  } else if (!is_text_type(res->get_header_value("Content-Type"))) {
    out["status"] = "NON_TEXT";
  } else {
    out["status"] = "OK";
    out["raw"] = res->body;
  }
  return out;
}

json HttpTransport::send_embed(const json& request) {
  if (endpoints_.embed_url.empty()) fail(ErrorCode::kConfigError, "CROWDNOTES_EMBED_URL is not set");
  json body = {{"model", request.value("model_tag", "")}, {"input", request.value("inputs", json::array())}};
  auto [base, path] = split_url(endpoints_.embed_url);
  auto client = make_client(base, endpoints_.timeout);
  auto res = client.Post(path, auth_headers(endpoints_.embed_key), body.dump(), "application/json");
  if (!res || res->status != 200) transport_failure("embed", res);
  json reply = parse_body("embed", res->body);
  try {
    json vectors = json::array();
    for (const auto& d : reply.at("data")) vectors.push_back(d.at("embedding"));
    return {{"embeddings", vectors}};
  } catch (const json::exception& e) {
    fail(ErrorCode::kParseError, std::string("embed: unexpected response shape: ") + e.what());
  }
}

}  // namespace crowdnotes
