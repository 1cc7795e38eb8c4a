#include "fake_world.hpp"

#include <algorithm>
#include <random>
#include <sstream>

#include "crowdnotes/digest.hpp"
#include "crowdnotes/text.hpp"
#include "crowdnotes/time.hpp"

namespace crowdnotes::testing {

namespace {

using nlohmann::json;

struct Topic {
  const char* name;
  const char* title;
  std::vector<const char*> words;
};

const std::vector<Topic>& topics() {
  static const std::vector<Topic> kTopics = {
      {"measles", "Measles", {"measles", "outbreak", "vaccination", "mmr", "rash", "immunity"}},
      {"influenza", "Influenza", {"influenza", "flu", "vaccine", "season", "hospital", "shot"}},
      {"covid", "COVID-19", {"covid", "coronavirus", "mask", "booster", "pandemic", "variant"}},
      {"fluoride", "Fluoride", {"fluoride", "water", "dental", "teeth", "cavities", "enamel"}},
      {"ivermectin", "Ivermectin", {"ivermectin", "parasite", "treatment", "trial", "dose", "horses"}},
      {"diabetes", "Diabetes", {"sugar", "diabetes", "insulin", "glucose", "blood", "diet"}},
      {"sunscreen", "Sunscreen", {"sunscreen", "skin", "cancer", "melanoma", "ultraviolet", "spf"}},
      {"autism", "Autism", {"autism", "vaccines", "study", "children", "diagnosis", "link"}},
  };
  return kTopics;
}

const std::vector<const char*>& filler() {
  static const std::vector<const char*> kFiller = {
      "researchers", "reported", "that",   "the",     "data",    "show",     "patients",
      "experts",     "said",     "across", "several", "studies", "found",    "no",
      "evidence",    "public",   "health", "officials", "recommend", "people", "should",
      "consult",     "doctors",  "risk",   "increase", "decrease", "among",   "adults",
      "according",   "to",       "recent", "review",  "clinical", "guidance", "remains"};
  return kFiller;
}

const char* kHosts[] = {"health.example.org", "cdc.example.gov",     "news.example.com",
                        "who.example.int",    "journal.example.net", "blog.example.io"};

std::string sentence(std::mt19937_64& rng, const Topic& topic, int words) {
  std::string out;
  for (int i = 0; i < words; ++i) {
    const char* w = (rng() % 3 == 0) ? topic.words[rng() % topic.words.size()]
                                     : filler()[rng() % filler().size()];
    if (!out.empty()) out += ' ';
    out += w;
  }
  out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  return out + ".";
}

std::size_t topic_index_of_url(std::string_view url) {
  for (std::size_t t = 0; t < topics().size(); ++t) {
    if (url.find(std::string("/") + topics()[t].name + "-") != std::string_view::npos) return t;
  }
  return stable_hash(url) % topics().size();
}

std::size_t topic_for_text(std::string_view text) {
  auto tokens = text::word_tokens(text);
  std::size_t best = stable_hash(text) % topics().size();
  int best_hits = 0;
  for (std::size_t t = 0; t < topics().size(); ++t) {
    int hits = 0;
    for (const auto& tok : tokens) {
      for (const char* w : topics()[t].words) hits += tok == w;
    }
    if (hits > best_hits) {
      best_hits = hits;
      best = t;
    }
  }
  return best;
}

Timestamp published_at(int page) {
  // Every fifth page appears only after the benchmark period.
  if (page % 5 == 4) return from_epoch_seconds(1798761600 + page * 86400);  // 2027
  return from_epoch_seconds(1546300800 + static_cast<std::int64_t>((stable_hash("pub" + std::to_string(page)) % 1200)) * 86400);
}

std::string between(std::string_view s, std::string_view open, std::string_view close) {
  auto a = s.find(open);
  if (a == std::string_view::npos) return {};
  a += open.size();
  auto b = s.find(close, a);
  return std::string(s.substr(a, b == std::string_view::npos ? std::string_view::npos : b - a));
}

std::string decision(bool yes, std::uint64_t h) {
  static const char* kLead[] = {"Checked each snippet. ", "Analysis: the snippets were reviewed.\n",
                                "", "**Reasoning** omitted.\n"};
  return std::string(kLead[h % 4]) + "Final decision: " + (yes ? "yes" : "no");
}

}  // namespace

std::uint64_t stable_hash(std::string_view s) {
  return std::stoull(sha256_hex(s).substr(0, 16), nullptr, 16);
}

json LambdaTransport::send(ProviderKind kind, const json& request) {
  ++calls_;
  ++per_kind_[static_cast<int>(kind)];
  const Handler* h = nullptr;
  switch (kind) {
    case ProviderKind::kChat: h = &chat; break;
    case ProviderKind::kSearch: h = &search; break;
    case ProviderKind::kFetch: h = &fetch; break;
    case ProviderKind::kScore: h = &score; break;
  }
  if (!h || !*h) throw std::logic_error("no handler for provider " + std::string(to_string(kind)));
  return (*h)(request);
}

LambdaTransport::Handler constant_chat(std::string reply) {
  return [reply = std::move(reply)](const json&) { return json{{"text", reply}}; };
}

FakeWorld::FakeWorld(std::uint64_t seed) : seed_(seed) {}

std::string FakeWorld::dead_url(int i) {
  return "https://gone.example.net/missing-" + std::to_string(i);
}

std::string FakeWorld::page_url(int i) const {
  const auto& topic = topics()[static_cast<std::size_t>(i) % topics().size()];
  return std::string("https://") + kHosts[static_cast<std::size_t>(i) % 6] + "/articles/" +
         topic.name + "-" + std::to_string(i);
}

std::vector<std::string> FakeWorld::topic_of(std::string_view url) const {
  std::vector<std::string> out;
  for (const char* w : topics()[topic_index_of_url(url)].words) out.emplace_back(w);
  return out;
}

json FakeWorld::search(const json& request) const {
  std::string query = request.at("query").get<std::string>();
  int top_k = request.at("top_k").get<int>();
  std::optional<Timestamp> before;
  if (request.contains("before")) before = parse_iso8601(request["before"].get<std::string>());

  std::size_t t = topic_for_text(query);
  std::vector<int> on_topic;
  for (int i = 0; i < static_cast<int>(universe_size()); ++i) {
    if (static_cast<std::size_t>(i) % topics().size() == t) on_topic.push_back(i);
  }
  std::uint64_t h = stable_hash(query) ^ seed_;
  std::rotate(on_topic.begin(), on_topic.begin() + static_cast<long>(h % on_topic.size()), on_topic.end());
  std::vector<int> ranked = on_topic;
  for (int k = 0; k < 3; ++k) ranked.push_back(static_cast<int>((h / 7 + static_cast<std::uint64_t>(k) * 13) % universe_size()));

  json items = json::array();
  std::vector<int> seen;
  for (int page : ranked) {
    if (static_cast<int>(items.size()) >= top_k) break;
    if (std::find(seen.begin(), seen.end(), page) != seen.end()) continue;
    seen.push_back(page);
    Timestamp published = published_at(page);
    if (before && published > *before) continue;
    std::string url = page_url(page);
    const auto& topic = topics()[static_cast<std::size_t>(page) % topics().size()];
    std::mt19937_64 rng(stable_hash(url) ^ seed_);
    // a few results come back with tracking parameters, as real ones do
    if (page % 3 == 0) url += "?utm_source=search&ref=" + std::to_string(page % 4);
    items.push_back({{"title", std::string(topic.title) + " facts, part " + std::to_string(page)},
                     {"snippet", sentence(rng, topic, 14)},
                     {"url", url},
                     {"published_at", format_iso8601(published)}});
  }
  return {{"items", items}};
}

json FakeWorld::fetch(const json& request) const {
  std::string url = request.at("url").get<std::string>();
  json out = {{"fetched_at", "2025-01-01T00:00:00Z"}};
  if (url.find("gone.example.net") != std::string::npos) {
    out["status"] = "UNREACHABLE";
    return out;
  }
  if (url.ends_with(".pdf")) {
    out["status"] = "NON_TEXT";
    return out;
  }
  const auto& topic = topics()[topic_index_of_url(url)];
  std::mt19937_64 rng(stable_hash(url) ^ seed_);
  std::ostringstream html;
  html << "<!DOCTYPE html><html><head><title>" << topic.title
       << "</title><style>body{font:12px}</style><script>var a = 1;</script></head><body>"
       << "<nav><a href=\"/\">Home</a> <a href=\"/about\">About us</a></nav>"
       << "<header class=\"site\">Example Health Network</header><main><article><h1>" << topic.title
       << " explained</h1>";
  int paragraphs = 3 + static_cast<int>(rng() % 12);
  for (int p = 0; p < paragraphs; ++p) {
    html << "<p>";
    int sentences = 4 + static_cast<int>(rng() % 6);
    for (int s = 0; s < sentences; ++s) html << sentence(rng, topic, 8 + static_cast<int>(rng() % 10)) << ' ';
    html << "&amp; more.</p>\n";
  }
  html << "<h2>References</h2><ol><li>Smith J. A study of things. 2019.</li></ol>"
       << "</article><aside>Related: other stories</aside></main>"
       << "<footer>&copy; 2024 Example Health Network</footer></body></html>";
  out["status"] = "OK";
  out["raw"] = html.str();
  return out;
}

json FakeWorld::chat(const json& request) const {
  const std::string system = request.value("system_prompt", "");
  const std::string user = request.value("user_prompt", "");
  const std::uint64_t h = stable_hash(request.value("model_tag", "") + '\x1f' + user) ^ seed_;

  if (system.find("search queries") != std::string::npos) {
    int n = std::max(1, std::atoi(between(user, "Write ", " ").c_str()));
    std::string tweet = between(user, "Tweet:\n", "\x01");
    const auto& topic = topics()[topic_for_text(tweet)];
    std::ostringstream out;
    for (int i = 0; i < n; ++i) {
      if (i == n - 1 && h % 5 == 0 && n > 1) {
        out << "1. " << topic.words[0] << " " << topic.words[1] << " facts\n";  // duplicate
      } else {
        out << (i + 1) << ". " << topic.words[static_cast<std::size_t>(i) % topic.words.size()] << " "
            << topic.words[(static_cast<std::size_t>(i) + 1) % topic.words.size()] << " facts\n";
      }
    }
    return {{"text", out.str()}};
  }
  if (system.find("careful selector") != std::string::npos) {
    int n = std::max(1, std::atoi(between(user, "(1..", ")").c_str()));
    bool reprompt = user.find("could not be parsed") != std::string::npos;
    if (!reprompt && h % 11 == 0) return {{"text", "The second result looks most useful."}};
    return {{"text", std::to_string(static_cast<int>(h % static_cast<std::uint64_t>(n)) + 1)}};
  }
  if (system.find("community note writer") != std::string::npos) {
    std::string tweet = between(user, "Tweet:\n", "\n\nSource snippets:");
    const auto& topic = topics()[topic_for_text(tweet)];
    std::mt19937_64 rng(h);
    std::string note = "Context: " + sentence(rng, topic, 12);
    int extra = static_cast<int>(h % 4);
    for (int i = 0; i < extra * 3; ++i) note += " " + sentence(rng, topic, 10);
    if (h % 3 == 0) note += "\nSee https://cdc.example.gov/" + std::string(topic.name) + " for details.";
    return {{"text", note}};
  }
  if (system.find("meticulous inspector") != std::string::npos) {
    bool reprompt = user.find("did not end with a decision") != std::string::npos;
    if (!reprompt && h % 17 == 0) return {{"text", "The snippets look reasonable overall."}};
    bool relevance = user.starts_with("You are given a Tweet");
    bool yes = relevance ? (h % 100) < 85 : (h % 100) < 20;
    return {{"text", decision(yes, h)}};
  }
  if (system.find("precise text classifier") != std::string::npos) {
    return {{"text", decision((h % 100) < 55, h)}};
  }
  if (system.find("impartial evaluator") != std::string::npos) {
    static const char* kLabels[] = {"A", "B", "TIE", "A", "B"};
    return {{"text", "Set A cites agencies; set B cites blogs.\n" + std::string(kLabels[h % 5])}};
  }
  return {{"text", "Final decision: no"}};
}

json FakeWorld::score(const json& request) const {
  json vectors = json::array();
  for (const auto& input : request.at("inputs")) {
    std::vector<double> v(16, 0.0);
    for (const auto& tok : text::word_tokens(input.get<std::string>())) v[stable_hash(tok) % 16] += 1.0;
    vectors.push_back(v);
  }
  return {{"embeddings", vectors}};
}

void FakeWorld::install(LambdaTransport& transport) const {
  transport.chat = [this](const json& r) { return chat(r); };
  transport.search = [this](const json& r) { return search(r); };
  transport.fetch = [this](const json& r) { return fetch(r); };
  transport.score = [this](const json& r) { return score(r); };
}

std::vector<json> make_dataset(const FakeWorld& world, int n, int dead_samples) {
  static const char* kClaims[] = {
      "BREAKING: {t} is a hoax invented by pharma!! Share before they delete this",
      "My cousin says {t} causes more harm than good. Doctors are hiding it.",
      "New study proves {t} was never real. Wake up people",
      "They don't want you to know the truth about {t}. Do your research.",
  };
  std::vector<json> out;
  for (int i = 0; i < n; ++i) {
    const auto& topic = topics()[static_cast<std::size_t>(i) % topics().size()];
    std::string claim = kClaims[i % 4];
    claim.replace(claim.find("{t}"), 3, std::string(topic.words[0]) + " " + topic.words[1]);
    std::int64_t post_time = 1672531200 + static_cast<std::int64_t>(i) * 86400 + 3600 * (i % 7);
    std::int64_t note_time = post_time + 3600 * (1 + i % 48);

    json urls = json::array();
    bool dead = i >= n - dead_samples;
    int k = 1 + i % 3;
    for (int j = 0; j < k; ++j) {
      if (dead) {
        urls.push_back(FakeWorld::dead_url(i * 10 + j));
      } else {
        int page = static_cast<int>(static_cast<std::size_t>(i) % topics().size()) + 8 * ((i + j) % 7);
        urls.push_back(world.page_url(page));
      }
    }
    std::string note = std::string(topic.title) + " is well documented; health agencies describe " +
                       topic.words[2] + " and " + topic.words[3] + " in detail. " +
                       urls[0].get<std::string>();
    out.push_back({{"note_id", "n" + std::string(i < 10 ? "00" : i < 100 ? "0" : "") + std::to_string(i)},
                   {"post_id", "p" + std::to_string(1000 + i)},
                   {"post_text", claim},
                   {"post_created_at", format_iso8601(from_epoch_seconds(post_time))},
                   {"note_text", note},
                   {"note_created_at", note_time * 1000},
                   {"urls", urls},
                   {"status", i % 2 == 0 ? "CURRENTLY_RATED_HELPFUL" : "CURRENTLY_RATED_NOT_HELPFUL"},
                   {"topic", topic.name}});
  }
  return out;
}

std::string to_jsonl(const std::vector<json>& records) {
  std::string out;
  for (const auto& r : records) out += r.dump() + "\n";
  return out;
}

}  // namespace crowdnotes::testing
