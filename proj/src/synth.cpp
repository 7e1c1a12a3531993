#include "lsars/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "lsars/errors.hpp"
#include "lsars/lexicon.hpp"
#include "lsars/rng.hpp"

namespace lsars {

namespace {

constexpr std::uint64_t kStreamTruth = 11;

int draw_categorical(Rng& rng, std::span<const double> probabilities) {
  const double u = rng.uniform01();
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < probabilities.size(); ++i) {
    acc += probabilities[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(probabilities.size()) - 1;
}

GeoPoint draw_location(Rng& rng, const RegionGaussian& region) {
  // Cholesky factor of the 2x2 covariance; redraw the rare tail samples that
  // would leave the valid coordinate ranges.
  const CovMatrix2& cov = region.covariance();
  const double l11 = std::sqrt(cov.lat_lat);
  const double l21 = cov.lat_lon / l11;
  const double l22 = std::sqrt(cov.lon_lon - l21 * l21);
  for (int attempt = 0; attempt < 100; ++attempt) {
    const double n1 = rng.normal();
    const double n2 = rng.normal();
    const GeoPoint p{region.mean().lat + l11 * n1,
                     region.mean().lon + l21 * n1 + l22 * n2};
    if (valid_coordinates(p)) return p;
  }
  throw ConfigError("synthetic region repeatedly sampled out-of-range coordinates");
}

// Row with `share` of the mass spread uniformly over [begin, end) and the
// rest uniformly over the remaining columns.
void fill_block_row(std::span<double> row, int begin, int end, double share) {
  const int inside = end - begin;
  const int outside = static_cast<int>(row.size()) - inside;
  for (int j = 0; j < static_cast<int>(row.size()); ++j) {
    row[j] = (j >= begin && j < end) ? share / inside : (1.0 - share) / outside;
  }
}

double row_l1(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
  return sum;
}

std::unordered_map<std::string, int> token_index(const std::vector<std::string>& tokens) {
  std::unordered_map<std::string, int> map;
  for (std::size_t i = 0; i < tokens.size(); ++i) map.emplace(tokens[i], static_cast<int>(i));
  return map;
}

}  // namespace

void TrueParams::validate() const {
  if (users < 1 || items < 1 || topics < 1 || region_count < 1 || sentiments < 1) {
    throw ConfigError("synthetic truth dimensions must all be >= 1");
  }
  if (records_per_user < 1) throw ConfigError("records per user must be >= 1");
  if (content_words_min < 0 || content_words_max < content_words_min ||
      review_words_min < 0 || review_words_max < review_words_min) {
    throw ConfigError("word count ranges are inconsistent");
  }
  if (static_cast<int>(regions.size()) != region_count) {
    throw ConfigError("region gaussian count disagrees with the region dimension");
  }
  auto check = [](const Matrix& m, int rows, int cols, const char* name) {
    if (m.rows != rows || m.cols != cols) {
      throw ConfigError(std::string("synthetic truth table ") + name +
                        " has inconsistent dimensions");
    }
  };
  check(user_topic, users, topics, "user_topic");
  check(user_region, users, region_count, "user_region");
  check(topic_sentiment, topics, sentiments, "topic_sentiment");
  check(topic_word, topics, static_cast<int>(content_tokens.size()), "topic_word");
  check(region_item, region_count, items, "region_item");
  check(sentiment_word, topics * sentiments, static_cast<int>(review_tokens.size()),
        "sentiment_word");
}

TrueParams random_true_params(const RandomTruthConfig& config, std::uint64_t seed) {
  Rng rng(seed, kStreamTruth);
  TrueParams truth;
  truth.users = config.users;
  truth.items = config.items;
  truth.topics = config.topics;
  truth.region_count = config.regions;
  truth.sentiments = config.sentiments;
  truth.records_per_user = config.records_per_user;
  truth.content_words_min = config.content_words_min;
  truth.content_words_max = config.content_words_max;
  truth.review_words_min = config.review_words_min;
  truth.review_words_max = config.review_words_max;

  const int K = config.topics, R = config.regions, S = config.sentiments;
  const int W = std::max(config.content_vocab, K);

  for (int w = 0; w < W; ++w) truth.content_tokens.push_back("w" + std::to_string(w));
  const SentimentLexicon lexicon = SentimentLexicon::builtin();
  truth.review_tokens = lexicon.positive;
  truth.review_tokens.insert(truth.review_tokens.end(), lexicon.negative.begin(),
                             lexicon.negative.end());
  for (int c = 0; c < config.neutral_review_words; ++c) {
    truth.review_tokens.push_back("r" + std::to_string(c));
  }
  const int C = static_cast<int>(truth.review_tokens.size());
  const int positive_end = static_cast<int>(lexicon.positive.size());
  const int negative_end = positive_end + static_cast<int>(lexicon.negative.size());

  // Topics get disjoint dominant content-word blocks.
  truth.topic_word = Matrix(K, W);
  for (int z = 0; z < K; ++z) {
    const int begin = z * W / K;
    const int end = (z + 1) * W / K;
    fill_block_row(truth.topic_word.row(z), begin, end, 0.9);
  }

  // Review rows lean on the lexicon block of their own polarity; the
  // remainder is spread over the other block and the neutral words.
  truth.sentiment_word = Matrix(K * S, C);
  for (int z = 0; z < K; ++z) {
    for (int s = 0; s < S; ++s) {
      auto row = truth.sentiment_word.row(z * S + s);
      const bool positive = s == positive_sentiment_index(S);
      const int begin = positive ? 0 : positive_end;
      const int end = positive ? positive_end : negative_end;
      fill_block_row(row, begin, end, 0.7);
    }
  }

  // Region-level item popularity: near-disjoint item blocks per region.
  truth.region_item = Matrix(R, config.items);
  for (int r = 0; r < R; ++r) {
    const int begin = r * config.items / R;
    const int end = (r + 1) * config.items / R;
    fill_block_row(truth.region_item.row(r), begin, end, 0.9);
  }

  truth.topic_sentiment = Matrix(K, S);
  for (int z = 0; z < K; ++z) {
    const auto row = rng.dirichlet(3.0, S);
    std::copy(row.begin(), row.end(), truth.topic_sentiment.row(z).begin());
  }
  truth.user_topic = Matrix(config.users, K);
  truth.user_region = Matrix(config.users, R);
  for (int u = 0; u < config.users; ++u) {
    const auto topics_row = rng.dirichlet(0.5, K);
    std::copy(topics_row.begin(), topics_row.end(), truth.user_topic.row(u).begin());
    const auto regions_row = rng.dirichlet(0.5, R);
    std::copy(regions_row.begin(), regions_row.end(), truth.user_region.row(u).begin());
  }

  // Region means on a wide ring so regions stay well separated.
  const double pi = 3.14159265358979323846;
  const double spread = config.region_spread_deg * config.region_spread_deg;
  for (int r = 0; r < R; ++r) {
    const double angle = 2.0 * pi * r / R;
    truth.regions.emplace_back(
        GeoPoint{40.0 * std::sin(angle), 100.0 * std::cos(angle)},
        CovMatrix2{spread, 0.0, spread});
  }

  truth.validate();
  return truth;
}

GeneratedCorpus generate_corpus(const TrueParams& truth, std::uint64_t seed) {
  truth.validate();
  Rng rng(seed);
  const int S = truth.sentiments;

  std::vector<GeoPoint> item_location(truth.items);
  std::vector<char> item_seen(truth.items, 0);

  CorpusBuilder builder;
  GeneratedCorpus out;
  std::int64_t index = 0;
  for (int u = 0; u < truth.users; ++u) {
    for (int j = 0; j < truth.records_per_user; ++j, ++index) {
      const int z = draw_categorical(rng, truth.user_topic.row(u));
      const int r = draw_categorical(rng, truth.user_region.row(u));
      const int v = draw_categorical(rng, truth.region_item.row(r));
      if (!item_seen[v]) {
        item_location[v] = draw_location(rng, truth.regions[r]);
        item_seen[v] = 1;
      }
      const int s = draw_categorical(rng, truth.topic_sentiment.row(z));

      RawCheckin raw;
      raw.user = truth.user_token(u);
      raw.item = truth.item_token(v);
      raw.location = item_location[v];
      const int content_count =
          truth.content_words_min +
          static_cast<int>(rng.below(truth.content_words_max - truth.content_words_min + 1));
      for (int w = 0; w < content_count; ++w) {
        raw.content_words.push_back(
            truth.content_tokens[draw_categorical(rng, truth.topic_word.row(z))]);
      }
      const int review_count =
          truth.review_words_min +
          static_cast<int>(rng.below(truth.review_words_max - truth.review_words_min + 1));
      for (int c = 0; c < review_count; ++c) {
        raw.review_words.push_back(truth.review_tokens[draw_categorical(
            rng, truth.sentiment_word.row(z * S + s))]);
      }
      builder.add(raw, "synthetic record " + std::to_string(index));
      out.hidden.topic.push_back(z);
      out.hidden.sentiment.push_back(s);
      out.hidden.region.push_back(r);
    }
  }
  out.corpus = builder.finish();
  return out;
}

void write_hidden_assignments(const AssignmentState& hidden, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ParseError("cannot open assignments file: " + path);
  for (std::size_t i = 0; i < hidden.topic.size(); ++i) {
    nlohmann::ordered_json j;
    j["record"] = i;
    j["topic"] = hidden.topic[i];
    j["sentiment"] = hidden.sentiment[i];
    j["region"] = hidden.region[i];
    out << j.dump() << '\n';
  }
}

TrainedModel truth_to_model(const TrueParams& truth, const CheckinCorpus& corpus) {
  TrainedModel model;
  model.kind = "synthetic-truth";
  model.hyper.topics = truth.topics;
  model.hyper.regions = truth.region_count;
  model.hyper.sentiments = truth.sentiments;
  model.hyper.iterations = 0;
  model.params.user_topic = truth.user_topic;
  model.params.user_region = truth.user_region;
  model.params.topic_sentiment = truth.topic_sentiment;
  model.params.topic_word = truth.topic_word;
  model.params.region_item = truth.region_item;
  model.params.sentiment_word = truth.sentiment_word;
  model.regions = truth.regions;

  for (int u = 0; u < truth.users; ++u) model.user_tokens.push_back(truth.user_token(u));
  for (int v = 0; v < truth.items; ++v) model.item_tokens.push_back(truth.item_token(v));
  model.content_tokens = truth.content_tokens;
  model.review_tokens = truth.review_tokens;

  // Bookkeeping sections come from the generated corpus, remapped into the
  // truth's canonical user/item order. Items never drawn keep placeholders.
  model.item_location.assign(truth.items, GeoPoint{0.0, 0.0});
  model.item_words.assign(truth.items, {});
  model.user_home.assign(truth.users, GeoPoint{0.0, 0.0});
  model.user_checkins.assign(truth.users, 0);
  model.user_visited.assign(truth.users, {});
  for (int v = 0; v < truth.items; ++v) {
    if (const auto id = corpus.items.find(truth.item_token(v))) {
      model.item_location[v] = corpus.item_location[*id];
      model.item_words[v] = corpus.item_words[*id];
    }
  }
  std::unordered_map<int, int> truth_item_of;
  for (int v = 0; v < truth.items; ++v) {
    if (const auto id = corpus.items.find(truth.item_token(v))) truth_item_of[*id] = v;
  }
  for (int u = 0; u < truth.users; ++u) {
    const auto id = corpus.users.find(truth.user_token(u));
    if (!id) continue;
    model.user_home[u] = corpus.user_home[*id];
    model.user_checkins[u] = static_cast<std::int64_t>(corpus.profiles[*id].size());
    std::vector<int> visited;
    for (const auto record : corpus.profiles[*id]) {
      visited.push_back(truth_item_of.at(corpus.records[record].item));
    }
    std::sort(visited.begin(), visited.end());
    visited.erase(std::unique(visited.begin(), visited.end()), visited.end());
    model.user_visited[u] = std::move(visited);
  }
  model.record_count = static_cast<std::int64_t>(corpus.records.size());
  model.distinct_locations = corpus.distinct_locations;
  return model;
}

TrueParams truth_from_model(const TrainedModel& model) {
  TrueParams truth;
  truth.users = model.num_users();
  truth.items = model.num_items();
  truth.topics = model.hyper.topics;
  truth.region_count = model.hyper.regions;
  truth.sentiments = model.hyper.sentiments;
  truth.user_topic = model.params.user_topic;
  truth.user_region = model.params.user_region;
  truth.topic_sentiment = model.params.topic_sentiment;
  truth.topic_word = model.params.topic_word;
  truth.region_item = model.params.region_item;
  truth.sentiment_word = model.params.sentiment_word;
  truth.regions = model.regions;
  truth.content_tokens = model.content_tokens;
  truth.review_tokens = model.review_tokens;
  truth.validate();
  return truth;
}

std::vector<int> solve_assignment(const Matrix& cost) {
  if (cost.rows != cost.cols || cost.rows == 0) {
    throw std::invalid_argument("solve_assignment: cost matrix must be square");
  }
  const int n = cost.rows;
  constexpr double kInf = std::numeric_limits<double>::infinity();

  // Jonker-Volgenant style shortest augmenting paths with potentials.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> min_value(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      int j1 = -1;
      double delta = kInf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double current = cost.at(i0 - 1, j - 1) - u[i0] - v[j];
        if (current < min_value[j]) {
          min_value[j] = current;
          way[j] = j0;
        }
        if (min_value[j] < delta) {
          delta = min_value[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          min_value[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> result(n, -1);
  for (int j = 1; j <= n; ++j) {
    if (match[j] != 0) result[match[j] - 1] = j - 1;
  }
  return result;
}

std::vector<int> align_topics(const Matrix& truth_topic_word,
                              const Matrix& estimated_topic_word) {
  if (truth_topic_word.rows != estimated_topic_word.rows ||
      truth_topic_word.cols != estimated_topic_word.cols) {
    throw std::invalid_argument("align_topics: table dimensions disagree");
  }
  const int K = truth_topic_word.rows;
  Matrix cost(K, K);
  for (int i = 0; i < K; ++i) {
    for (int j = 0; j < K; ++j) {
      cost.at(i, j) = row_l1(truth_topic_word.row(i), estimated_topic_word.row(j));
    }
  }
  return solve_assignment(cost);
}

RecoveryReport recovery_report(const TrueParams& truth, const TrainedModel& model) {
  truth.validate();
  const int K = truth.topics, R = truth.region_count, S = truth.sentiments;
  if (model.hyper.topics != K || model.hyper.regions != R ||
      model.hyper.sentiments != S) {
    throw std::invalid_argument("recovery_report: latent dimensions disagree");
  }

  // Remap the model's interned axes into truth coordinates through tokens.
  // Truth entities the model never saw keep zero probability columns.
  const auto model_users = token_index(model.user_tokens);
  const auto model_items = token_index(model.item_tokens);
  const auto model_content = token_index(model.content_tokens);
  const auto model_review = token_index(model.review_tokens);

  const int W = static_cast<int>(truth.content_tokens.size());
  const int C = static_cast<int>(truth.review_tokens.size());

  Matrix est_user_topic(truth.users, K);
  Matrix est_user_region(truth.users, R);
  for (int u = 0; u < truth.users; ++u) {
    const auto it = model_users.find(truth.user_token(u));
    if (it == model_users.end()) continue;
    for (int z = 0; z < K; ++z) est_user_topic.at(u, z) = model.params.user_topic.at(it->second, z);
    for (int r = 0; r < R; ++r) est_user_region.at(u, r) = model.params.user_region.at(it->second, r);
  }
  Matrix est_topic_word(K, W);
  for (int w = 0; w < W; ++w) {
    const auto it = model_content.find(truth.content_tokens[w]);
    if (it == model_content.end()) continue;
    for (int z = 0; z < K; ++z) est_topic_word.at(z, w) = model.params.topic_word.at(z, it->second);
  }
  Matrix est_sentiment_word(K * S, C);
  for (int c = 0; c < C; ++c) {
    const auto it = model_review.find(truth.review_tokens[c]);
    if (it == model_review.end()) continue;
    for (int zs = 0; zs < K * S; ++zs) {
      est_sentiment_word.at(zs, c) = model.params.sentiment_word.at(zs, it->second);
    }
  }
  Matrix est_region_item(R, truth.items);
  for (int v = 0; v < truth.items; ++v) {
    const auto it = model_items.find(truth.item_token(v));
    if (it == model_items.end()) continue;
    for (int r = 0; r < R; ++r) est_region_item.at(r, v) = model.params.region_item.at(r, it->second);
  }

  RecoveryReport report;
  report.topic_perm = align_topics(truth.topic_word, est_topic_word);

  Matrix region_cost(R, R);
  for (int i = 0; i < R; ++i) {
    for (int j = 0; j < R; ++j) {
      const double dlat = truth.regions[i].mean().lat - model.regions[j].mean().lat;
      const double dlon = truth.regions[i].mean().lon - model.regions[j].mean().lon;
      region_cost.at(i, j) = std::sqrt(dlat * dlat + dlon * dlon);
    }
  }
  report.region_perm = solve_assignment(region_cost);

  Matrix sentiment_cost(S, S);
  for (int s = 0; s < S; ++s) {
    for (int t = 0; t < S; ++t) {
      double total = 0.0;
      for (int z = 0; z < K; ++z) {
        total += std::abs(truth.topic_sentiment.at(z, s) -
                          model.params.topic_sentiment.at(report.topic_perm[z], t));
      }
      sentiment_cost.at(s, t) = total;
    }
  }
  report.sentiment_perm = solve_assignment(sentiment_cost);
  report.sentiment_identity = true;
  for (int s = 0; s < S; ++s) {
    if (report.sentiment_perm[s] != s) report.sentiment_identity = false;
  }

  // Mean L1 row errors in truth coordinates after the alignments.
  for (int u = 0; u < truth.users; ++u) {
    double theta = 0.0, vartheta = 0.0;
    for (int z = 0; z < K; ++z) {
      theta += std::abs(truth.user_topic.at(u, z) -
                        est_user_topic.at(u, report.topic_perm[z]));
    }
    for (int r = 0; r < R; ++r) {
      vartheta += std::abs(truth.user_region.at(u, r) -
                           est_user_region.at(u, report.region_perm[r]));
    }
    report.user_topic_l1 += theta;
    report.user_region_l1 += vartheta;
  }
  report.user_topic_l1 /= truth.users;
  report.user_region_l1 /= truth.users;

  for (int z = 0; z < K; ++z) {
    const int ez = report.topic_perm[z];
    report.topic_word_l1 += row_l1(truth.topic_word.row(z), est_topic_word.row(ez));
    double omega = 0.0;
    for (int s = 0; s < S; ++s) {
      omega += std::abs(truth.topic_sentiment.at(z, s) -
                        model.params.topic_sentiment.at(ez, report.sentiment_perm[s]));
    }
    report.topic_sentiment_l1 += omega;
    for (int s = 0; s < S; ++s) {
      report.sentiment_word_l1 +=
          row_l1(truth.sentiment_word.row(z * S + s),
                 est_sentiment_word.row(ez * S + report.sentiment_perm[s]));
    }
  }
  report.topic_word_l1 /= K;
  report.topic_sentiment_l1 /= K;
  report.sentiment_word_l1 /= K * S;

  for (int r = 0; r < R; ++r) {
    report.region_item_l1 +=
        row_l1(truth.region_item.row(r), est_region_item.row(report.region_perm[r]));
    const double distance = region_cost.at(r, report.region_perm[r]);
    report.region_mean_dist_mean += distance;
    report.region_mean_dist_max = std::max(report.region_mean_dist_max, distance);
  }
  report.region_item_l1 /= R;
  report.region_mean_dist_mean /= R;

  return report;
}

}  // namespace lsars
