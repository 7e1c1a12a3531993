#include "lsars/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lsars/errors.hpp"

namespace lsars {

namespace {

double logsumexp(std::span<const double> values) {
  const double max_value = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(max_value)) return max_value;
  double sum = 0.0;
  for (const double value : values) sum += std::exp(value - max_value);
  return max_value + std::log(sum);
}

void check_user(const TrainedModel& model, int user) {
  if (user < 0 || user >= model.num_users()) {
    throw QueryError("unknown user index " + std::to_string(user));
  }
}

void check_item(const TrainedModel& model, int item) {
  if (item < 0 || item >= model.num_items()) {
    throw QueryError("unknown item index " + std::to_string(item));
  }
}

// Geometric-mean log word factor: (1/|W|) * sum_w log psi_z,w; 0 when the
// word list is empty.
double log_word_factor(const TrainedModel& model, int topic,
                       std::span<const int> words) {
  if (words.empty()) return 0.0;
  double sum = 0.0;
  for (const int w : words) sum += std::log(model.params.topic_word.at(topic, w));
  return sum / static_cast<double>(words.size());
}

// Log numerators of the discovery posterior for every (user, sentiment).
Matrix discovery_log_numerators(const TrainedModel& model, const UserQuery& query,
                                double kappa) {
  const int N = model.num_users();
  const int K = model.topics();
  const int S = model.sentiments();

  // The region sum depends only on the item, hence cancels for ad-hoc
  // queries; keep it for known items so reported scores follow the formula.
  double log_item_term = 0.0;
  if (query.item.has_value()) {
    check_item(model, *query.item);
    double sum = 0.0;
    for (int r = 0; r < model.regions_count(); ++r) {
      sum += model.params.region_item.at(r, *query.item);
    }
    log_item_term = std::log(sum);
  }

  std::vector<double> log_word(K);
  for (int z = 0; z < K; ++z) log_word[z] = log_word_factor(model, z, query.content_words);

  double prior_total = 0.0;
  for (const auto n : model.user_checkins) prior_total += static_cast<double>(n) + kappa;

  Matrix out(N, S);
  std::vector<double> terms(K);
  for (int u = 0; u < N; ++u) {
    const double log_user =
        std::log(static_cast<double>(model.user_checkins[u]) + kappa) -
        std::log(prior_total);
    for (int s = 0; s < S; ++s) {
      for (int z = 0; z < K; ++z) {
        terms[z] = std::log(model.params.user_topic.at(u, z)) +
                   std::log(model.params.topic_sentiment.at(z, s)) + log_word[z];
      }
      out.at(u, s) = log_user + logsumexp(terms) + log_item_term;
    }
  }
  return out;
}

}  // namespace

UserQuery user_query_for_item(const TrainedModel& model, int item, int k) {
  check_item(model, item);
  UserQuery query;
  query.item = item;
  query.content_words = model.item_words[item];
  query.k = k;
  return query;
}

UserQuery user_query_ad_hoc(const TrainedModel& model,
                            std::span<const std::string> words, int k) {
  UserQuery query;
  query.k = k;
  for (const auto& token : words) {
    const auto it =
        std::find(model.content_tokens.begin(), model.content_tokens.end(), token);
    if (it != model.content_tokens.end()) {
      query.content_words.push_back(
          static_cast<int>(it - model.content_tokens.begin()));
    }
  }
  return query;
}

std::vector<double> region_prior(const TrainedModel& model, double kappa) {
  const int R = model.regions_count();
  double total = 0.0;
  for (const auto n : model.user_checkins) total += static_cast<double>(n) + kappa;
  std::vector<double> prior(R, 0.0);
  for (int u = 0; u < model.num_users(); ++u) {
    const double weight = (static_cast<double>(model.user_checkins[u]) + kappa) / total;
    for (int r = 0; r < R; ++r) prior[r] += weight * model.params.user_region.at(u, r);
  }
  return prior;
}

double user_prior(const TrainedModel& model, int user, double kappa) {
  check_user(model, user);
  double total = 0.0;
  for (const auto n : model.user_checkins) total += static_cast<double>(n) + kappa;
  return (static_cast<double>(model.user_checkins[user]) + kappa) / total;
}

ItemScorer::ItemScorer(const TrainedModel& model, int user, GeoPoint query_location,
                       double kappa)
    : model_(&model) {
  check_user(model, user);
  const std::vector<double> prior = region_prior(model, kappa);
  log_region_weight_.resize(prior.size());
  for (std::size_t r = 0; r < prior.size(); ++r) {
    log_region_weight_[r] =
        std::log(prior[r]) + model.regions[r].log_pdf(query_location);
  }
  const int positive = positive_sentiment_index(model.sentiments());
  log_topic_base_.resize(model.topics());
  for (int z = 0; z < model.topics(); ++z) {
    log_topic_base_[z] = std::log(model.params.user_topic.at(user, z)) +
                         std::log(model.params.topic_sentiment.at(z, positive));
  }
}

double ItemScorer::log_score(int item) const {
  const TrainedModel& model = *model_;
  check_item(model, item);
  const GeoPoint& location = model.item_location[item];

  std::vector<double> spatial(log_region_weight_.size());
  for (std::size_t r = 0; r < spatial.size(); ++r) {
    spatial[r] = log_region_weight_[r] + model.regions[r].log_pdf(location) +
                 std::log(model.params.region_item.at(static_cast<int>(r), item));
  }
  std::vector<double> topical(log_topic_base_.size());
  const auto& words = model.item_words[item];
  for (int z = 0; z < model.topics(); ++z) {
    topical[z] = log_topic_base_[z] + log_word_factor(model, z, words);
  }
  return logsumexp(spatial) + logsumexp(topical);
}

double score_item(const TrainedModel& model, const ItemQuery& query, int item,
                  const ScoringOptions& options) {
  const ItemScorer scorer(model, query.user, query.location, options.kappa);
  return std::exp(scorer.log_score(item));
}

namespace {

RankedList take_top_k(std::vector<std::pair<double, int>>& scored, int k) {
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  if (k >= 0 && scored.size() > static_cast<std::size_t>(k)) scored.resize(k);
  RankedList list;
  list.reserve(scored.size());
  for (const auto& [log_score, index] : scored) {
    list.push_back({index, std::exp(log_score)});
  }
  return list;
}

}  // namespace

RankedList recommend_items(const TrainedModel& model, const ItemQuery& query,
                           const ScoringOptions& options) {
  if (query.k < 1) throw ConfigError("result count k must be >= 1");
  const ItemScorer scorer(model, query.user, query.location, options.kappa);

  std::vector<char> excluded(model.num_items(), 0);
  if (!options.include_visited) {
    for (const int v : model.user_visited[query.user]) excluded[v] = 1;
  }
  std::vector<std::pair<double, int>> scored;
  scored.reserve(model.num_items());
  for (int v = 0; v < model.num_items(); ++v) {
    if (!excluded[v]) scored.emplace_back(scorer.log_score(v), v);
  }
  return take_top_k(scored, query.k);
}

Matrix discovery_posterior(const TrainedModel& model, const UserQuery& query,
                           double kappa) {
  Matrix posterior = discovery_log_numerators(model, query, kappa);
  const double total = logsumexp(posterior.data);
  for (auto& value : posterior.data) value = std::exp(value - total);
  return posterior;
}

double score_user(const TrainedModel& model, const UserQuery& query, int user,
                  const ScoringOptions& options) {
  check_user(model, user);
  const Matrix numerators = discovery_log_numerators(model, query, options.kappa);
  const double total = logsumexp(numerators.data);
  const int positive = positive_sentiment_index(model.sentiments());
  return std::exp(numerators.at(user, positive) - total);
}

RankedList discover_users(const TrainedModel& model, const UserQuery& query,
                          const ScoringOptions& options) {
  if (query.k < 1) throw ConfigError("result count k must be >= 1");
  const Matrix numerators = discovery_log_numerators(model, query, options.kappa);
  const double total = logsumexp(numerators.data);
  const int positive = positive_sentiment_index(model.sentiments());

  std::vector<std::pair<double, int>> scored;
  scored.reserve(model.num_users());
  for (int u = 0; u < model.num_users(); ++u) {
    scored.emplace_back(numerators.at(u, positive) - total, u);
  }
  return take_top_k(scored, query.k);
}

}  // namespace lsars
