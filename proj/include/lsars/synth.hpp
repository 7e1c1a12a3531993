#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lsars/corpus.hpp"
#include "lsars/matrix.hpp"
#include "lsars/model.hpp"
#include "lsars/sampler.hpp"

namespace lsars {

// Ground-truth parameters for the forward simulator: the same table shapes
// as a trained model plus generation settings. Users and items are named
// canonically ("u<i>", "v<j>") so recovered models can be compared back in
// truth coordinates regardless of interning order.
struct TrueParams {
  int users = 0;
  int items = 0;
  int topics = 0;
  int region_count = 0;
  int sentiments = 2;

  Matrix user_topic;       // N x K
  Matrix user_region;      // N x R
  Matrix topic_sentiment;  // K x S
  Matrix topic_word;       // K x W
  Matrix region_item;      // R x V
  Matrix sentiment_word;   // (K*S) x C
  std::vector<RegionGaussian> regions;

  std::vector<std::string> content_tokens;
  std::vector<std::string> review_tokens;

  int records_per_user = 20;
  int content_words_min = 1, content_words_max = 4;
  int review_words_min = 1, review_words_max = 6;

  std::string user_token(int u) const { return "u" + std::to_string(u); }
  std::string item_token(int v) const { return "v" + std::to_string(v); }

  void validate() const;  // throws ConfigError
};

struct RandomTruthConfig {
  int users = 200;
  int items = 200;
  int topics = 3;
  int regions = 2;
  int sentiments = 2;
  int content_vocab = 30;
  int neutral_review_words = 20;  // review vocab also carries the seed lexicon
  int records_per_user = 50;
  int content_words_min = 1, content_words_max = 4;
  int review_words_min = 1, review_words_max = 6;
  double region_spread_deg = 2.0;  // per-region standard deviation
};

// Well-separated synthetic truth: region means on a wide ring, topics with
// disjoint dominant content-word blocks, review-word rows anchored on the
// built-in sentiment lexicon so the positive label is identifiable.
TrueParams random_true_params(const RandomTruthConfig& config, std::uint64_t seed);

struct GeneratedCorpus {
  CheckinCorpus corpus;
  AssignmentState hidden;  // true latent triple per record
};

// Forward simulation of the generative process. An item's location is drawn
// from its first generating region and frozen afterwards, so the corpus
// satisfies the one-location-per-item invariant.
GeneratedCorpus generate_corpus(const TrueParams& truth, std::uint64_t seed);

void write_hidden_assignments(const AssignmentState& hidden, const std::string& path);

// Truth files reuse the model container with kind "synthetic-truth"; the
// corpus supplies the bookkeeping sections (homes, visited sets, counts).
TrainedModel truth_to_model(const TrueParams& truth, const CheckinCorpus& corpus);
TrueParams truth_from_model(const TrainedModel& model);

// Minimum-total-cost row matching (optimal assignment, O(n^3)).
// Returns perm with perm[i] = column matched to row i.
std::vector<int> solve_assignment(const Matrix& cost);

// Permutation matching estimated topic rows to truth rows by minimal total
// L1 distance; perm[truth_topic] = estimate_topic.
std::vector<int> align_topics(const Matrix& truth_topic_word,
                              const Matrix& estimated_topic_word);

struct RecoveryReport {
  std::vector<int> topic_perm;      // estimate topic per truth topic
  std::vector<int> region_perm;     // estimate region per truth region
  std::vector<int> sentiment_perm;  // estimate sentiment per truth sentiment
  bool sentiment_identity = false;

  // mean L1 distance between matched rows, in truth coordinates
  double user_topic_l1 = 0.0;
  double user_region_l1 = 0.0;
  double topic_sentiment_l1 = 0.0;
  double topic_word_l1 = 0.0;
  double region_item_l1 = 0.0;
  double sentiment_word_l1 = 0.0;

  double region_mean_dist_mean = 0.0;  // degrees, Euclidean
  double region_mean_dist_max = 0.0;
};

// Aligns topics by content-word rows, regions by Gaussian means, sentiments
// by the topic-sentiment table, then reports per-table errors. The model's
// users/items/words are remapped into truth coordinates via their tokens.
RecoveryReport recovery_report(const TrueParams& truth, const TrainedModel& model);

}  // namespace lsars
