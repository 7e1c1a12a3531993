#include <doctest.h>

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "lsars/errors.hpp"
#include "lsars/model.hpp"
#include "lsars/rng.hpp"
#include "lsars/sampler.hpp"

using namespace lsars;
using namespace lsars::testing;

namespace {

TrainedModel small_trained_model(std::uint64_t seed = 3) {
  const CheckinCorpus corpus = make_corpus({
      raw("u0", "a", 0, 0, {"coffee", "cake"}, {"good"}),
      raw("u1", "b", 30, 40, {"beer"}, {"bad", "stale"}),
      raw("u0", "b", 30, 40, {"cake"}, {}),
      raw("u1", "c", 31, 41, {"beer", "loud"}, {"good"}),
  });
  HyperParams hyper = HyperParams::with_dimensions(2, 2, 2);
  hyper.iterations = 4;
  hyper.seed = seed;
  return train(corpus, hyper);
}

CountTables counts_for(const CheckinCorpus& corpus, const HyperParams& hyper,
                       const AssignmentState& state) {
  return CountTables::recount(corpus, state, hyper);
}

}  // namespace

TEST_CASE("estimation matches hand-computed rows") {
  // single user, four records: topic counts (3, 1) with prior 0.5
  CheckinCorpus corpus = make_corpus({
      raw("u", "a", 0, 0), raw("u", "a", 0, 0), raw("u", "a", 0, 0),
      raw("u", "b", 1, 1),
  });
  HyperParams hyper = HyperParams::with_dimensions(2, 1, 2);
  hyper.topic_prior = 0.5;
  AssignmentState state;
  state.topic = {0, 0, 0, 1};
  state.sentiment = {0, 1, 0, 1};
  state.region = {0, 0, 0, 0};
  const ModelParams params = estimate_parameters(counts_for(corpus, hyper, state), hyper);
  CHECK(params.user_topic.at(0, 0) == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(params.user_topic.at(0, 1) == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("estimation of a sentiment row with counts 8 and 2") {
  std::vector<RawCheckin> lines;
  AssignmentState state;
  for (int i = 0; i < 10; ++i) {
    lines.push_back(raw("u", "a", 0, 0));
    state.topic.push_back(0);
    state.sentiment.push_back(i < 8 ? 0 : 1);
    state.region.push_back(0);
  }
  const CheckinCorpus corpus = make_corpus(lines);
  HyperParams hyper = HyperParams::with_dimensions(1, 1, 2);  // delta = 0.01
  const ModelParams params = estimate_parameters(counts_for(corpus, hyper, state), hyper);
  CHECK(params.topic_sentiment.at(0, 0) ==
        doctest::Approx(0.7994011976047904).epsilon(1e-12));
  CHECK(params.topic_sentiment.at(0, 1) ==
        doctest::Approx(0.20059880239520958).epsilon(1e-12));
}

TEST_CASE("all-zero counts give uniform rows") {
  CountTables counts;
  counts.users = 2;
  counts.items = 3;
  counts.topics = 4;
  counts.regions = 2;
  counts.sentiments = 2;
  counts.content_words = 5;
  counts.review_words = 6;
  counts.user_topic.assign(2 * 4, 0);
  counts.user_region.assign(2 * 2, 0);
  counts.topic_word.assign(4 * 5, 0);
  counts.topic_sentiment.assign(4 * 2, 0);
  counts.sentiment_word.assign(4 * 2 * 6, 0);
  counts.region_item.assign(2 * 3, 0);
  const HyperParams hyper = HyperParams::with_dimensions(4, 2, 2);
  const ModelParams params = estimate_parameters(counts, hyper);
  for (int u = 0; u < 2; ++u) {
    for (int z = 0; z < 4; ++z) {
      CHECK(params.user_topic.at(u, z) == doctest::Approx(0.25).epsilon(1e-12));
    }
  }
  for (int z = 0; z < 4; ++z) {
    for (int w = 0; w < 5; ++w) {
      CHECK(params.topic_word.at(z, w) == doctest::Approx(0.2).epsilon(1e-12));
    }
  }
}

TEST_CASE("every estimated row is normalized and positive") {
  const TrainedModel model = small_trained_model();
  auto check_rows = [](const Matrix& m) {
    for (int r = 0; r < m.rows; ++r) {
      double sum = 0.0;
      for (const double v : m.row(r)) {
        CHECK(v > 0.0);
        sum += v;
      }
      CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
  };
  check_rows(model.params.user_topic);
  check_rows(model.params.user_region);
  check_rows(model.params.topic_sentiment);
  check_rows(model.params.topic_word);
  check_rows(model.params.region_item);
  check_rows(model.params.sentiment_word);
}

TEST_CASE("estimation commutes with topic relabeling") {
  const CheckinCorpus corpus = make_corpus({
      raw("u0", "a", 0, 0, {"x", "y"}, {"p"}),
      raw("u1", "b", 1, 1, {"y"}, {"q", "p"}),
      raw("u0", "b", 1, 1, {"z"}, {}),
  });
  HyperParams hyper = HyperParams::with_dimensions(3, 1, 2);
  AssignmentState state;
  state.topic = {0, 1, 2};
  state.sentiment = {0, 1, 0};
  state.region = {0, 0, 0};
  const ModelParams base = estimate_parameters(counts_for(corpus, hyper, state), hyper);

  const std::vector<int> perm{2, 0, 1};  // new label of each old topic
  AssignmentState relabeled = state;
  for (auto& z : relabeled.topic) z = perm[z];
  const ModelParams moved =
      estimate_parameters(counts_for(corpus, hyper, relabeled), hyper);

  for (int u = 0; u < corpus.num_users(); ++u) {
    for (int z = 0; z < 3; ++z) {
      CHECK(base.user_topic.at(u, z) == moved.user_topic.at(u, perm[z]));
    }
  }
  for (int z = 0; z < 3; ++z) {
    for (int w = 0; w < corpus.num_content_words(); ++w) {
      CHECK(base.topic_word.at(z, w) == moved.topic_word.at(perm[z], w));
    }
    for (int s = 0; s < 2; ++s) {
      CHECK(base.topic_sentiment.at(z, s) == moved.topic_sentiment.at(perm[z], s));
    }
  }
}

TEST_CASE("save then load restores the model field for field") {
  TempDir dir;
  const TrainedModel model = small_trained_model();
  const auto path = dir.file("model.json");
  save_model(model, path);
  const TrainedModel loaded = load_model(path);
  CHECK(loaded == model);
}

TEST_CASE("load rejects a truncated file without leaving partial state") {
  TempDir dir;
  const TrainedModel model = small_trained_model();
  const auto path = dir.file("model.json");
  save_model(model, path);
  const std::string full = read_file(path);
  write_file(path, full.substr(0, full.size() / 2));
  CHECK_THROWS_AS(load_model(path), ModelIoError);
}

TEST_CASE("load rejects a non-normalized row naming the table and row") {
  TempDir dir;
  const auto path = dir.file("model.json");
  TrainedModel corrupted = small_trained_model();
  for (int z = 0; z < corrupted.params.user_topic.cols; ++z) {
    corrupted.params.user_topic.at(0, z) *= 0.5;  // row 0 now sums to 0.5
  }
  save_model(corrupted, path);
  CHECK_THROWS_WITH_AS(load_model(path), doctest::Contains("row 0"), ModelIoError);
  CHECK_THROWS_WITH_AS(load_model(path), doctest::Contains("user_topic"), ModelIoError);
}

TEST_CASE("load rejects a wrong format tag") {
  TempDir dir;
  const TrainedModel model = small_trained_model();
  const auto path = dir.file("model.json");
  save_model(model, path);
  nlohmann::json root = nlohmann::json::parse(read_file(path));
  root["format"] = "lsars-model/999";
  write_file(path, root.dump());
  CHECK_THROWS_WITH_AS(load_model(path), doctest::Contains("lsars-model/999"),
                       ModelIoError);
}

TEST_CASE("load rejects dimension mismatches") {
  TempDir dir;
  const TrainedModel model = small_trained_model();
  const auto path = dir.file("model.json");
  save_model(model, path);
  nlohmann::json root = nlohmann::json::parse(read_file(path));
  root["dims"]["topics"] = 7;
  write_file(path, root.dump());
  CHECK_THROWS_AS(load_model(path), ModelIoError);
}

TEST_CASE("save is atomic: failed write leaves no file behind") {
  const TrainedModel model = small_trained_model();
  CHECK_THROWS_AS(save_model(model, "/no/such/dir/model.json"), ModelIoError);
  CHECK(!std::filesystem::exists("/no/such/dir/model.json"));
}

TEST_CASE("doubles survive the round trip bit for bit") {
  TempDir dir;
  TrainedModel model = small_trained_model();
  // plant awkward values
  model.params.user_topic.at(0, 0) = 0.1 + 1e-17;
  model.params.user_topic.at(0, 1) = 1.0 - model.params.user_topic.at(0, 0);
  const auto path = dir.file("model.json");
  save_model(model, path);
  const TrainedModel loaded = load_model(path);
  CHECK(std::memcmp(loaded.params.user_topic.data.data(),
                    model.params.user_topic.data.data(),
                    model.params.user_topic.data.size() * sizeof(double)) == 0);
}
