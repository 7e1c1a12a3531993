#include "lsars/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "lsars/errors.hpp"
#include "lsars/model.hpp"

namespace lsars {

void HyperParams::validate() const {
  if (topics < 1 || regions < 1 || sentiments < 1) {
    throw ConfigError("topic, region and sentiment counts must be >= 1");
  }
  if (iterations < 0) throw ConfigError("iteration count must be >= 0");
  for (const double prior : {topic_prior, region_prior, content_word_prior,
                             sentiment_prior, review_word_prior, item_prior}) {
    if (!(prior > 0.0)) throw ConfigError("all Dirichlet priors must be > 0");
  }
}

CountTables CountTables::recount(const CheckinCorpus& corpus,
                                 const AssignmentState& state,
                                 const HyperParams& hyper) {
  CountTables t;
  t.topics = hyper.topics;
  t.regions = hyper.regions;
  t.sentiments = hyper.sentiments;
  t.users = corpus.num_users();
  t.items = corpus.num_items();
  t.content_words = corpus.num_content_words();
  t.review_words = corpus.num_review_words();

  const int K = t.topics, R = t.regions, S = t.sentiments;
  const int W = t.content_words, C = t.review_words, V = t.items;
  t.user_topic.assign(static_cast<std::size_t>(t.users) * K, 0);
  t.user_region.assign(static_cast<std::size_t>(t.users) * R, 0);
  t.topic_word.assign(static_cast<std::size_t>(K) * W, 0);
  t.topic_sentiment.assign(static_cast<std::size_t>(K) * S, 0);
  t.sentiment_word.assign(static_cast<std::size_t>(K) * S * C, 0);
  t.region_item.assign(static_cast<std::size_t>(R) * V, 0);
  t.topic_words_total.assign(K, 0);
  t.topic_records.assign(K, 0);
  t.sentiment_words_total.assign(static_cast<std::size_t>(K) * S, 0);
  t.region_records.assign(R, 0);

  for (std::size_t i = 0; i < corpus.records.size(); ++i) {
    const auto& rec = corpus.records[i];
    const int z = state.topic[i], s = state.sentiment[i], r = state.region[i];
    ++t.user_topic[static_cast<std::size_t>(rec.user) * K + z];
    ++t.user_region[static_cast<std::size_t>(rec.user) * R + r];
    for (const int w : rec.content_words) {
      ++t.topic_word[static_cast<std::size_t>(z) * W + w];
    }
    t.topic_words_total[z] += static_cast<std::int64_t>(rec.content_words.size());
    ++t.topic_sentiment[static_cast<std::size_t>(z) * S + s];
    ++t.topic_records[z];
    for (const int c : rec.review_words) {
      ++t.sentiment_word[(static_cast<std::size_t>(z) * S + s) * C + c];
    }
    t.sentiment_words_total[static_cast<std::size_t>(z) * S + s] +=
        static_cast<std::int64_t>(rec.review_words.size());
    ++t.region_item[static_cast<std::size_t>(r) * V + rec.item];
    ++t.region_records[r];
  }
  return t;
}

SamplerState::SamplerState(const CheckinCorpus& corpus, const HyperParams& hyper,
                           const SentimentLexicon& lexicon)
    : corpus_(&corpus),
      hyper_(hyper),
      sweep_rng_(hyper.seed, kStreamSweep) {
  hyper_.validate();
  if (corpus.records.empty()) throw ConfigError("cannot initialize sampler on an empty corpus");

  const std::size_t n = corpus.records.size();
  const int K = hyper_.topics, R = hyper_.regions, S = hyper_.sentiments;

  // Regions: k-means over the locations of the items that actually occur in
  // the records, one point per distinct item.
  std::vector<char> referenced(corpus.num_items(), 0);
  for (const auto& rec : corpus.records) referenced[rec.item] = 1;
  std::vector<int> item_ids;
  std::vector<GeoPoint> item_points;
  for (int v = 0; v < corpus.num_items(); ++v) {
    if (referenced[v]) {
      item_ids.push_back(v);
      item_points.push_back(corpus.item_location[v]);
    }
  }
  const std::vector<int> clusters = kmeans_regions(
      item_points, R, Rng::derive_seed(hyper_.seed, kStreamKmeans));
  std::vector<int> item_region(corpus.num_items(), 0);
  for (std::size_t j = 0; j < item_ids.size(); ++j) item_region[item_ids[j]] = clusters[j];

  // Topics uniform at random; sentiments seeded from the lexicon where the
  // review words lean one way, uniform otherwise.
  std::unordered_set<int> positive_ids, negative_ids;
  for (const auto& token : lexicon.positive) {
    if (const auto id = corpus.review_vocab.find(token)) positive_ids.insert(*id);
  }
  for (const auto& token : lexicon.negative) {
    if (const auto id = corpus.review_vocab.find(token)) negative_ids.insert(*id);
  }

  Rng topic_rng(hyper_.seed, kStreamTopicInit);
  Rng sentiment_rng(hyper_.seed, kStreamSentimentInit);
  assignments_.topic.resize(n);
  assignments_.sentiment.resize(n);
  assignments_.region.resize(n);
  const int positive = positive_sentiment_index(S);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& rec = corpus.records[i];
    assignments_.topic[i] = static_cast<int>(topic_rng.below(K));
    int pos_hits = 0, neg_hits = 0;
    for (const int c : rec.review_words) {
      if (positive_ids.contains(c)) ++pos_hits;
      if (negative_ids.contains(c)) ++neg_hits;
    }
    if (S >= 2 && pos_hits > neg_hits) {
      assignments_.sentiment[i] = positive;
    } else if (S >= 2 && neg_hits > pos_hits) {
      assignments_.sentiment[i] = kNegativeSentiment;
    } else {
      assignments_.sentiment[i] = static_cast<int>(sentiment_rng.below(S));
    }
    assignments_.region[i] = item_region[rec.item];
  }

  counts_ = CountTables::recount(corpus, assignments_, hyper_);
  regions_.assign(R, RegionGaussian());
  refit_region_gaussians();
}

void SamplerState::remove_topic_sentiment(int record) {
  const auto& rec = corpus_->records[record];
  const int S = hyper_.sentiments;
  const int W = counts_.content_words, C = counts_.review_words;
  const int z = assignments_.topic[record];
  const int s = assignments_.sentiment[record];
  --counts_.user_topic[static_cast<std::size_t>(rec.user) * hyper_.topics + z];
  for (const int w : rec.content_words) {
    --counts_.topic_word[static_cast<std::size_t>(z) * W + w];
  }
  counts_.topic_words_total[z] -= static_cast<std::int64_t>(rec.content_words.size());
  --counts_.topic_sentiment[static_cast<std::size_t>(z) * S + s];
  --counts_.topic_records[z];
  for (const int c : rec.review_words) {
    --counts_.sentiment_word[(static_cast<std::size_t>(z) * S + s) * C + c];
  }
  counts_.sentiment_words_total[static_cast<std::size_t>(z) * S + s] -=
      static_cast<std::int64_t>(rec.review_words.size());
}

void SamplerState::add_topic_sentiment(int record, int topic, int sentiment) {
  const auto& rec = corpus_->records[record];
  const int S = hyper_.sentiments;
  const int W = counts_.content_words, C = counts_.review_words;
  assignments_.topic[record] = topic;
  assignments_.sentiment[record] = sentiment;
  ++counts_.user_topic[static_cast<std::size_t>(rec.user) * hyper_.topics + topic];
  for (const int w : rec.content_words) {
    ++counts_.topic_word[static_cast<std::size_t>(topic) * W + w];
  }
  counts_.topic_words_total[topic] += static_cast<std::int64_t>(rec.content_words.size());
  ++counts_.topic_sentiment[static_cast<std::size_t>(topic) * S + sentiment];
  ++counts_.topic_records[topic];
  for (const int c : rec.review_words) {
    ++counts_.sentiment_word[(static_cast<std::size_t>(topic) * S + sentiment) * C + c];
  }
  counts_.sentiment_words_total[static_cast<std::size_t>(topic) * S + sentiment] +=
      static_cast<std::int64_t>(rec.review_words.size());
}

void SamplerState::remove_region(int record) {
  const auto& rec = corpus_->records[record];
  const int r = assignments_.region[record];
  --counts_.user_region[static_cast<std::size_t>(rec.user) * hyper_.regions + r];
  --counts_.region_item[static_cast<std::size_t>(r) * counts_.items + rec.item];
  --counts_.region_records[r];
}

void SamplerState::add_region(int record, int region) {
  const auto& rec = corpus_->records[record];
  assignments_.region[record] = region;
  ++counts_.user_region[static_cast<std::size_t>(rec.user) * hyper_.regions + region];
  ++counts_.region_item[static_cast<std::size_t>(region) * counts_.items + rec.item];
  ++counts_.region_records[region];
}

void SamplerState::topic_sentiment_conditional_into(int record,
                                                    std::vector<double>& out) const {
  const auto& rec = corpus_->records[record];
  const int K = hyper_.topics, S = hyper_.sentiments;
  const int W = counts_.content_words, C = counts_.review_words;
  const double alpha = hyper_.topic_prior;
  const double eta = hyper_.content_word_prior;
  const double delta = hyper_.sentiment_prior;
  const double beta = hyper_.review_word_prior;

  out.resize(static_cast<std::size_t>(K) * S);
  const std::int32_t* user_row =
      counts_.user_topic.data() + static_cast<std::size_t>(rec.user) * K;

  // Log-space evaluation: one factor per word occurrence, counts held fixed;
  // factors constant across the whole table are dropped.
  for (int z = 0; z < K; ++z) {
    double base = std::log(user_row[z] + alpha);
    if (!rec.content_words.empty()) {
      const std::int32_t* word_row =
          counts_.topic_word.data() + static_cast<std::size_t>(z) * W;
      for (const int w : rec.content_words) base += std::log(word_row[w] + eta);
      base -= static_cast<double>(rec.content_words.size()) *
              std::log(static_cast<double>(counts_.topic_words_total[z]) + W * eta);
    }
    const double sentiment_denominator =
        std::log(static_cast<double>(counts_.topic_records[z]) + S * delta);
    for (int s = 0; s < S; ++s) {
      const std::size_t zs = static_cast<std::size_t>(z) * S + s;
      double value = base + std::log(counts_.topic_sentiment[zs] + delta) -
                     sentiment_denominator;
      if (!rec.review_words.empty()) {
        const std::int32_t* review_row = counts_.sentiment_word.data() + zs * C;
        for (const int c : rec.review_words) value += std::log(review_row[c] + beta);
        value -= static_cast<double>(rec.review_words.size()) *
                 std::log(static_cast<double>(counts_.sentiment_words_total[zs]) +
                          C * beta);
      }
      out[zs] = value;
    }
  }
  const double max_log = *std::max_element(out.begin(), out.end());
  for (auto& value : out) value = std::exp(value - max_log);
}

void SamplerState::region_conditional_into(int record, std::vector<double>& out) const {
  const auto& rec = corpus_->records[record];
  const int R = hyper_.regions, V = counts_.items;
  const double gamma = hyper_.region_prior;
  const double tau = hyper_.item_prior;

  out.resize(R);
  const std::int32_t* user_row =
      counts_.user_region.data() + static_cast<std::size_t>(rec.user) * R;
  for (int r = 0; r < R; ++r) {
    out[r] = std::log(user_row[r] + gamma) +
             std::log(counts_.region_item[static_cast<std::size_t>(r) * V + rec.item] + tau) -
             std::log(static_cast<double>(counts_.region_records[r]) + V * tau) +
             regions_[r].log_pdf(rec.location);
  }
  const double max_log = *std::max_element(out.begin(), out.end());
  for (auto& value : out) value = std::exp(value - max_log);
}

std::vector<double> SamplerState::topic_sentiment_conditional(int record) const {
  std::vector<double> out;
  topic_sentiment_conditional_into(record, out);
  return out;
}

std::vector<double> SamplerState::region_conditional(int record) const {
  std::vector<double> out;
  region_conditional_into(record, out);
  return out;
}

void SamplerState::refit_region_gaussians() {
  const int R = hyper_.regions;
  std::vector<std::vector<GeoPoint>> assigned(R);
  for (std::size_t i = 0; i < corpus_->records.size(); ++i) {
    assigned[assignments_.region[i]].push_back(corpus_->records[i].location);
  }
  for (int r = 0; r < R; ++r) {
    regions_[r] = fit_region_gaussian(assigned[r], regions_[r].mean());
  }
}

void SamplerState::sweep() {
  const int S = hyper_.sentiments;
  const std::size_t n = corpus_->records.size();
  for (std::size_t i = 0; i < n; ++i) {
    const int record = static_cast<int>(i);
    remove_topic_sentiment(record);
    topic_sentiment_conditional_into(record, scratch_zs_);
    const double zs_total = std::accumulate(scratch_zs_.begin(), scratch_zs_.end(), 0.0);
    const std::size_t zs = sweep_rng_.pick_weighted(scratch_zs_, zs_total);
    add_topic_sentiment(record, static_cast<int>(zs) / S, static_cast<int>(zs) % S);

    remove_region(record);
    region_conditional_into(record, scratch_r_);
    const double r_total = std::accumulate(scratch_r_.begin(), scratch_r_.end(), 0.0);
    add_region(record, static_cast<int>(sweep_rng_.pick_weighted(scratch_r_, r_total)));
  }
  refit_region_gaussians();
  ++iteration_;
}

namespace {

// log of the Dirichlet-multinomial compound for one count row with a
// symmetric prior; zero-count cells contribute nothing. Zero-width rows
// (an empty vocabulary) contribute no term at all.
double log_dirichlet_multinomial(std::span<const std::int32_t> row, double prior,
                                 std::int64_t total) {
  if (row.empty()) return 0.0;
  double value = std::lgamma(prior * static_cast<double>(row.size())) -
                 std::lgamma(prior * static_cast<double>(row.size()) +
                             static_cast<double>(total));
  for (const std::int32_t n : row) {
    if (n > 0) value += std::lgamma(prior + n) - std::lgamma(prior);
  }
  return value;
}

}  // namespace

double SamplerState::complete_data_log_posterior() const {
  const int K = hyper_.topics, R = hyper_.regions, S = hyper_.sentiments;
  const int W = counts_.content_words, C = counts_.review_words, V = counts_.items;
  const int N = counts_.users;
  double value = 0.0;

  for (int u = 0; u < N; ++u) {
    const auto records = static_cast<std::int64_t>(corpus_->profiles[u].size());
    value += log_dirichlet_multinomial(
        {counts_.user_topic.data() + static_cast<std::size_t>(u) * K,
         static_cast<std::size_t>(K)},
        hyper_.topic_prior, records);
    value += log_dirichlet_multinomial(
        {counts_.user_region.data() + static_cast<std::size_t>(u) * R,
         static_cast<std::size_t>(R)},
        hyper_.region_prior, records);
  }
  for (int z = 0; z < K; ++z) {
    value += log_dirichlet_multinomial(
        {counts_.topic_word.data() + static_cast<std::size_t>(z) * W,
         static_cast<std::size_t>(W)},
        hyper_.content_word_prior, counts_.topic_words_total[z]);
    value += log_dirichlet_multinomial(
        {counts_.topic_sentiment.data() + static_cast<std::size_t>(z) * S,
         static_cast<std::size_t>(S)},
        hyper_.sentiment_prior, counts_.topic_records[z]);
    for (int s = 0; s < S; ++s) {
      const std::size_t zs = static_cast<std::size_t>(z) * S + s;
      value += log_dirichlet_multinomial(
          {counts_.sentiment_word.data() + zs * C, static_cast<std::size_t>(C)},
          hyper_.review_word_prior, counts_.sentiment_words_total[zs]);
    }
  }
  for (int r = 0; r < R; ++r) {
    value += log_dirichlet_multinomial(
        {counts_.region_item.data() + static_cast<std::size_t>(r) * V,
         static_cast<std::size_t>(V)},
        hyper_.item_prior, counts_.region_records[r]);
  }
  for (std::size_t i = 0; i < corpus_->records.size(); ++i) {
    value += regions_[assignments_.region[i]].log_pdf(corpus_->records[i].location);
  }
  return value;
}

TrainedModel train(const CheckinCorpus& corpus, const HyperParams& hyper,
                   const SentimentLexicon& lexicon, const ProgressFn& progress) {
  SamplerState state(corpus, hyper, lexicon);
  for (int iteration = 0; iteration < hyper.iterations; ++iteration) {
    state.sweep();
    if (progress) progress(state.iteration(), state.complete_data_log_posterior());
  }
  return assemble_model(state);
}

}  // namespace lsars
