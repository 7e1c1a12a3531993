#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lsars/model.hpp"

namespace lsars {

struct ItemQuery {
  int user = 0;        // must be known to the model
  GeoPoint location;   // the user's current position
  int k = 20;
};

// A known item (index set) or an ad-hoc one described only by content words.
// Unknown tokens are dropped when mapping ad-hoc words; an empty word list
// makes the word factor 1.
struct UserQuery {
  std::optional<int> item;
  std::vector<int> content_words;
  int k = 10;
};

UserQuery user_query_for_item(const TrainedModel& model, int item, int k = 10);
UserQuery user_query_ad_hoc(const TrainedModel& model,
                            std::span<const std::string> words, int k = 10);

struct ScoredEntity {
  int index = 0;
  double score = 0.0;
};

// Scores non-increasing, ties broken by ascending entity index.
using RankedList = std::vector<ScoredEntity>;

struct ScoringOptions {
  double kappa = 1.0;            // pseudo-count of the user/region priors
  bool include_visited = false;  // keep training-visited items as candidates
};

// Mixture weight of each region across the user base, each user weighted by
// smoothed check-in mass; sums to 1.
std::vector<double> region_prior(const TrainedModel& model, double kappa = 1.0);

// Smoothed share of user u in all check-ins.
double user_prior(const TrainedModel& model, int user, double kappa = 1.0);

// Ranking score of one candidate item for a (user, location) query:
// sum over regions of prior x density at the item x density at the query x
// region-item weight, times the sentiment-gated topic affinity with the
// geometric mean over the item's content words. Computed in log space.
double score_item(const TrainedModel& model, const ItemQuery& query, int item,
                  const ScoringOptions& options = {});

// Top-k candidates (by default every item the user has not visited in
// training) ordered by score.
RankedList recommend_items(const TrainedModel& model, const ItemQuery& query,
                           const ScoringOptions& options = {});

// Joint posterior over (user, sentiment) for the queried item: N x S matrix
// of probabilities summing to 1 overall.
Matrix discovery_posterior(const TrainedModel& model, const UserQuery& query,
                           double kappa = 1.0);

// Probability that user u checks in with positive sentiment, normalized over
// all users and sentiments. O(N*K) per call; discover_users shares the work
// across users.
double score_user(const TrainedModel& model, const UserQuery& query, int user,
                  const ScoringOptions& options = {});

// All users ranked by positive-sentiment probability; top k.
RankedList discover_users(const TrainedModel& model, const UserQuery& query,
                          const ScoringOptions& options = {});

// Shared per-query state for scoring many candidate items; evaluation uses
// it to rank the ground truth against every unvisited item.
class ItemScorer {
 public:
  ItemScorer(const TrainedModel& model, int user, GeoPoint query_location,
             double kappa = 1.0);

  double log_score(int item) const;

 private:
  const TrainedModel* model_;
  std::vector<double> log_region_weight_;  // log P(r) + log pdf(query | r)
  std::vector<double> log_topic_base_;     // log theta_u,z + log omega_z,s+
};

}  // namespace lsars
