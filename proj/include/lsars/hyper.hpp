#pragma once

#include <cstdint>

namespace lsars {

// Sentiment label convention: index 0 is anchored to "negative", index 1 to
// "positive" by lexicon-seeded initialization.
inline constexpr int kNegativeSentiment = 0;
inline constexpr int kPositiveSentiment = 1;

inline int positive_sentiment_index(int sentiments) {
  return sentiments >= 2 ? kPositiveSentiment : 0;
}

struct HyperParams {
  int topics = 40;      // K
  int regions = 20;     // R
  int sentiments = 2;   // S

  double topic_prior = 50.0 / 40.0;   // symmetric Dirichlet over topics per user
  double region_prior = 50.0 / 20.0;  // over regions per user
  double content_word_prior = 0.01;   // over content words per topic
  double sentiment_prior = 0.01;      // over sentiments per topic
  double review_word_prior = 0.01;    // over review words per (topic, sentiment)
  double item_prior = 0.01;           // over items per region

  int iterations = 1600;
  std::uint64_t seed = 1;

  // Standard setting: topic_prior = 50/K, region_prior = 50/R, all word/item
  // priors 0.01.
  static HyperParams with_dimensions(int topics, int regions, int sentiments = 2) {
    HyperParams h;
    h.topics = topics;
    h.regions = regions;
    h.sentiments = sentiments;
    h.topic_prior = 50.0 / topics;
    h.region_prior = 50.0 / regions;
    return h;
  }

  // Throws ConfigError on nonpositive priors, dimensions < 1 or negative
  // iteration count.
  void validate() const;

  bool operator==(const HyperParams&) const = default;
};

}  // namespace lsars
