#pragma once

#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace crowdnotes {

class Gateway;

/// Scores passages against a query; one score in [-1, 1] per passage.
class SimilarityScorer {
 public:
  virtual ~SimilarityScorer() = default;
  virtual std::vector<double> score(std::string_view query,
                                    std::span<const std::string> passages) = 0;
  virtual std::string name() const = 0;
};

/// Cosine over case-folded term-frequency vectors with stopwords removed.
/// Pure and deterministic; the default backend.
class LexicalScorer final : public SimilarityScorer {
 public:
  LexicalScorer();
  explicit LexicalScorer(const std::unordered_set<std::string>& stopwords);

  std::vector<double> score(std::string_view query,
                            std::span<const std::string> passages) override;
  std::string name() const override { return "lexical-tf-cosine"; }

 private:
  const std::unordered_set<std::string>* stopwords_;
};

/// Cosine between dense vectors from the embedding provider.
class EmbeddingScorer final : public SimilarityScorer {
 public:
  EmbeddingScorer(Gateway& gateway, std::string model_tag);

  std::vector<double> score(std::string_view query,
                            std::span<const std::string> passages) override;
  std::string name() const override { return "embedding:" + model_tag_; }

 private:
  Gateway* gateway_;
  std::string model_tag_;
};

// Throws kInvalidArgument when passages is empty.
std::vector<double> score_similarity(SimilarityScorer& scorer, std::string_view query,
                                     std::span<const std::string> passages);

double cosine(std::span<const double> a, std::span<const double> b);

// Bundled English stopword list (NLTK's 179 words).
const std::unordered_set<std::string>& english_stopwords();
inline constexpr std::string_view kStopwordListVersion = "stopwords-en/v1";

}  // namespace crowdnotes
