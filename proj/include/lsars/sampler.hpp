#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "lsars/corpus.hpp"
#include "lsars/geo.hpp"
#include "lsars/hyper.hpp"
#include "lsars/lexicon.hpp"
#include "lsars/rng.hpp"

namespace lsars {

struct TrainedModel;

// One latent (topic, sentiment, region) triple per check-in record; a single
// topic covers all content and review words of the record.
struct AssignmentState {
  std::vector<int> topic;
  std::vector<int> sentiment;
  std::vector<int> region;
};

// Sufficient statistics of the collapsed sampler. Every entry is the exact
// tally of AssignmentState over the corpus; recount() rebuilds them from
// scratch for consistency checks.
struct CountTables {
  int topics = 0, regions = 0, sentiments = 0;
  int users = 0, items = 0, content_words = 0, review_words = 0;

  std::vector<std::int32_t> user_topic;      // N x K
  std::vector<std::int32_t> user_region;     // N x R
  std::vector<std::int32_t> topic_word;      // K x W
  std::vector<std::int32_t> topic_sentiment; // K x S
  std::vector<std::int32_t> sentiment_word;  // (K*S) x C
  std::vector<std::int32_t> region_item;     // R x V

  std::vector<std::int64_t> topic_words_total;     // K: sum_w topic_word
  std::vector<std::int64_t> topic_records;         // K: sum_s topic_sentiment
  std::vector<std::int64_t> sentiment_words_total; // K*S: sum_c sentiment_word
  std::vector<std::int64_t> region_records;        // R: sum_v region_item

  static CountTables recount(const CheckinCorpus& corpus, const AssignmentState& state,
                             const HyperParams& hyper);

  bool operator==(const CountTables&) const = default;
};

// Owns one Markov chain: corpus reference, latent assignments, count tables
// and the per-region Gaussians. Sweeps mutate it single-threadedly.
//
// Rng streams under HyperParams::seed: 1 k-means init, 2 topic init,
// 3 sentiment init, 4 sweeps.
class SamplerState {
 public:
  static constexpr std::uint64_t kStreamKmeans = 1;
  static constexpr std::uint64_t kStreamTopicInit = 2;
  static constexpr std::uint64_t kStreamSentimentInit = 3;
  static constexpr std::uint64_t kStreamSweep = 4;

  // Regions start from k-means clusters of the referenced item locations,
  // topics uniform at random, sentiments lexicon-seeded with a uniform
  // fallback.
  SamplerState(const CheckinCorpus& corpus, const HyperParams& hyper,
               const SentimentLexicon& lexicon = SentimentLexicon::builtin());

  // One full pass: per record, jointly resample (topic, sentiment), then the
  // region, in flat corpus order; afterwards refit all region Gaussians.
  void sweep();

  // Unnormalized conditional over the K*S joint (topic, sentiment) choices
  // for a record, flattened as topic * S + sentiment. Requires the record's
  // topic/sentiment contribution to be removed first. Entries are positive
  // and rescaled so the largest is 1 (computed in log space).
  std::vector<double> topic_sentiment_conditional(int record) const;

  // Unnormalized conditional over regions for a record; same conventions.
  // Requires the record's region contribution to be removed first.
  std::vector<double> region_conditional(int record) const;

  void remove_topic_sentiment(int record);
  void add_topic_sentiment(int record, int topic, int sentiment);
  void remove_region(int record);
  void add_region(int record, int region);

  void refit_region_gaussians();

  // Log of the collapsed joint of all observations and current assignments:
  // one Dirichlet-multinomial term per count-table row plus the Gaussian
  // log-density of every record's location under its assigned region.
  double complete_data_log_posterior() const;

  const CheckinCorpus& corpus() const { return *corpus_; }
  const HyperParams& hyper() const { return hyper_; }
  const AssignmentState& assignments() const { return assignments_; }
  const CountTables& counts() const { return counts_; }
  const std::vector<RegionGaussian>& region_gaussians() const { return regions_; }
  int iteration() const { return iteration_; }

 private:
  void topic_sentiment_conditional_into(int record, std::vector<double>& out) const;
  void region_conditional_into(int record, std::vector<double>& out) const;

  const CheckinCorpus* corpus_;
  HyperParams hyper_;
  AssignmentState assignments_;
  CountTables counts_;
  std::vector<RegionGaussian> regions_;
  int iteration_ = 0;
  Rng sweep_rng_;
  mutable std::vector<double> scratch_zs_;
  mutable std::vector<double> scratch_r_;
};

using ProgressFn = std::function<void(int iteration, double log_posterior)>;

// Full training loop: init, `hyper.iterations` sweeps (monitoring statistic
// reported per sweep), then parameter estimation from the final counts.
TrainedModel train(const CheckinCorpus& corpus, const HyperParams& hyper,
                   const SentimentLexicon& lexicon = SentimentLexicon::builtin(),
                   const ProgressFn& progress = nullptr);

}  // namespace lsars
