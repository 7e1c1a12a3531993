#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lsars/corpus.hpp"
#include "lsars/geo.hpp"
#include "lsars/hyper.hpp"
#include "lsars/matrix.hpp"
#include "lsars/sampler.hpp"

namespace lsars {

inline constexpr const char* kModelFormatVersion = "lsars-model/1";

// The estimated multinomials. Every row is a probability distribution
// (sums to 1, entries strictly positive thanks to the priors).
struct ModelParams {
  Matrix user_topic;           // N x K
  Matrix user_region;          // N x R
  Matrix topic_sentiment;      // K x S
  Matrix topic_word;           // K x W, content words
  Matrix region_item;          // R x V
  Matrix sentiment_word;       // (K*S) x C, review words, rows z*S+s

  bool operator==(const ModelParams&) const = default;
};

// Smoothed row-normalization of the final count tables.
ModelParams estimate_parameters(const CountTables& counts, const HyperParams& hyper);

// The persisted, queryable model: parameters plus everything scoring needs
// so that queries never touch the training corpus again.
struct TrainedModel {
  std::string kind = "trained";  // "trained" or "synthetic-truth"
  HyperParams hyper;
  ModelParams params;
  std::vector<RegionGaussian> regions;

  std::vector<std::string> user_tokens;
  std::vector<std::string> item_tokens;
  std::vector<std::string> content_tokens;
  std::vector<std::string> review_tokens;

  std::vector<GeoPoint> item_location;          // per item
  std::vector<std::vector<int>> item_words;     // per item
  std::vector<GeoPoint> user_home;              // per user
  std::vector<std::int64_t> user_checkins;      // per user, training profile size
  std::vector<std::vector<int>> user_visited;   // per user, sorted distinct items

  std::int64_t record_count = 0;
  int distinct_locations = 0;

  int num_users() const { return static_cast<int>(user_tokens.size()); }
  int num_items() const { return static_cast<int>(item_tokens.size()); }
  int topics() const { return hyper.topics; }
  int regions_count() const { return hyper.regions; }
  int sentiments() const { return hyper.sentiments; }

  std::optional<int> find_user(std::string_view token) const;
  std::optional<int> find_item(std::string_view token) const;

  bool operator==(const TrainedModel&) const = default;
};

// Builds the queryable model from a finished chain.
TrainedModel assemble_model(const SamplerState& state);

// Single JSON container with base64-encoded little-endian doubles for the
// numeric tables, so save/load round trips are bit exact. Writes to a
// temporary file and renames on success. Load validates the format tag,
// dimension consistency, row normalization and entry positivity.
void save_model(const TrainedModel& model, const std::string& path);
TrainedModel load_model(const std::string& path);

}  // namespace lsars
