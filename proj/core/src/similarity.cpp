#include "crowdnotes/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "crowdnotes/errors.hpp"
#include "crowdnotes/gateway.hpp"
#include "crowdnotes/text.hpp"

namespace crowdnotes {

namespace {

using TermVector = std::map<std::string, double>;

TermVector term_frequencies(std::string_view s, const std::unordered_set<std::string>& stopwords) {
  TermVector tf;
  for (auto& token : text::word_tokens(s)) {
    if (stopwords.count(token)) continue;
    tf[std::move(token)] += 1.0;
  }
  return tf;
}

double squared_norm(const TermVector& v) {
  double sum = 0.0;
  for (const auto& [term, w] : v) sum += w * w;
  return sum;
}

// sqrt(a2 * b2) rather than sqrt(a2) * sqrt(b2): identical vectors score
// exactly 1.
double tf_cosine(const TermVector& a, double a_norm2, const TermVector& b) {
  double b_norm2 = squared_norm(b);
  if (a_norm2 == 0.0 || b_norm2 == 0.0) return 0.0;
  double dot = 0.0;
  const TermVector& small = a.size() <= b.size() ? a : b;
  const TermVector& large = a.size() <= b.size() ? b : a;
  for (const auto& [term, w] : small) {
    if (auto it = large.find(term); it != large.end()) dot += w * it->second;
  }
  return std::clamp(dot / std::sqrt(a_norm2 * b_norm2), -1.0, 1.0);
}

}  // namespace

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) fail(ErrorCode::kParseError, "embedding dimensions differ");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

LexicalScorer::LexicalScorer() : stopwords_(&english_stopwords()) {}

LexicalScorer::LexicalScorer(const std::unordered_set<std::string>& stopwords)
    : stopwords_(&stopwords) {}

std::vector<double> LexicalScorer::score(std::string_view query,
                                         std::span<const std::string> passages) {
  TermVector q = term_frequencies(query, *stopwords_);
  double q_norm2 = squared_norm(q);
  std::vector<double> out;
  out.reserve(passages.size());
  for (const auto& p : passages) out.push_back(tf_cosine(q, q_norm2, term_frequencies(p, *stopwords_)));
  return out;
}

EmbeddingScorer::EmbeddingScorer(Gateway& gateway, std::string model_tag)
    : gateway_(&gateway), model_tag_(std::move(model_tag)) {}

std::vector<double> EmbeddingScorer::score(std::string_view query,
                                           std::span<const std::string> passages) {
  EmbedRequest request{model_tag_, {std::string(query)}};
  request.inputs.insert(request.inputs.end(), passages.begin(), passages.end());
  auto vectors = gateway_->embed(request);
  if (vectors.size() != request.inputs.size()) {
    fail(ErrorCode::kParseError, "embedding provider returned " + std::to_string(vectors.size()) +
                                     " vectors for " + std::to_string(request.inputs.size()) +
                                     " inputs");
  }
  std::vector<double> out;
  out.reserve(passages.size());
  for (std::size_t i = 1; i < vectors.size(); ++i) out.push_back(cosine(vectors[0], vectors[i]));
  return out;
}

std::vector<double> score_similarity(SimilarityScorer& scorer, std::string_view query,
                                     std::span<const std::string> passages) {
  if (passages.empty()) fail(ErrorCode::kInvalidArgument, "no passages to score");
  auto scores = scorer.score(query, passages);
  if (scores.size() != passages.size()) {
    fail(ErrorCode::kParseError, "scorer returned a misaligned score list");
  }
  return scores;
}

}  // namespace crowdnotes
