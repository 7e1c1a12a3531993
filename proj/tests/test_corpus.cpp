#include <doctest.h>

#include <set>
#include <string>

#include "fixtures.hpp"
#include "lsars/corpus.hpp"
#include "lsars/errors.hpp"
#include "lsars/rng.hpp"

using namespace lsars;
using namespace lsars::testing;

TEST_CASE("parsing one minimal line") {
  TempDir dir;
  const auto path = dir.file("one.jsonl");
  write_file(path,
             R"({"user":"a","item":"x","lat":0,"lon":0,"content_words":["cafe"],"review_words":["good"]})"
             "\n");
  const CheckinCorpus corpus = parse_checkin_file(path);
  CHECK(corpus.num_users() == 1);
  CHECK(corpus.num_items() == 1);
  CHECK(corpus.num_content_words() == 1);
  CHECK(corpus.num_review_words() == 1);
  CHECK(corpus.num_records() == 1);
  CHECK(corpus.distinct_locations == 1);
  CHECK(corpus.user_home[0] == GeoPoint{0, 0});
}

TEST_CASE("out-of-range coordinate names the line") {
  TempDir dir;
  const auto path = dir.file("bad.jsonl");
  write_file(path, R"({"user":"a","item":"x","lat":95,"lon":0})"
                   "\n");
  CHECK_THROWS_WITH_AS(parse_checkin_file(path),
                       doctest::Contains("line 1"), ParseError);
}

TEST_CASE("conflicting item locations name the item") {
  TempDir dir;
  const auto path = dir.file("conflict.jsonl");
  write_file(path, R"({"user":"a","item":"x","lat":0,"lon":0})"
                   "\n"
                   R"({"user":"b","item":"x","lat":0,"lon":1})"
                   "\n");
  CHECK_THROWS_WITH_AS(parse_checkin_file(path), doctest::Contains("'x'"), ParseError);
}

TEST_CASE("malformed JSON and missing fields name the line") {
  TempDir dir;
  const auto path = dir.file("junk.jsonl");
  write_file(path, R"({"user":"a","item":"x","lat":0,"lon":0})"
                   "\n"
                   "not json at all\n");
  CHECK_THROWS_WITH_AS(parse_checkin_file(path), doctest::Contains("line 2"), ParseError);

  write_file(path, R"({"user":"a","lat":0,"lon":0})"
                   "\n");
  CHECK_THROWS_AS(parse_checkin_file(path), ParseError);
}

TEST_CASE("empty file yields an empty corpus") {
  TempDir dir;
  const auto path = dir.file("empty.jsonl");
  write_file(path, "");
  const CheckinCorpus corpus = parse_checkin_file(path);
  CHECK(corpus.num_records() == 0);
  CHECK(corpus.num_users() == 0);
}

TEST_CASE("missing file is an error naming the path") {
  CHECK_THROWS_WITH_AS(parse_checkin_file("/no/such/file.jsonl"),
                       doctest::Contains("/no/such/file.jsonl"), ParseError);
}

TEST_CASE("interning follows first appearance and is bijective") {
  const CheckinCorpus corpus = make_corpus({
      raw("bob", "pub", 1, 1),
      raw("amy", "gym", 2, 2),
      raw("bob", "gym", 2, 2),
  });
  CHECK(corpus.users.token(0) == "bob");
  CHECK(corpus.users.token(1) == "amy");
  CHECK(corpus.items.token(0) == "pub");
  CHECK(corpus.items.token(1) == "gym");
  for (int i = 0; i < corpus.num_users(); ++i) {
    CHECK(corpus.users.find(corpus.users.token(i)) == i);
  }
  for (int i = 0; i < corpus.num_items(); ++i) {
    CHECK(corpus.items.find(corpus.items.token(i)) == i);
  }
}

TEST_CASE("home location picks the most frequent item") {
  const CheckinCorpus corpus = make_corpus({
      raw("u", "a", 10, 0), raw("u", "b", 20, 0), raw("u", "a", 10, 0),
      raw("u", "b", 20, 0), raw("u", "a", 10, 0),
  });
  CHECK(corpus.user_home[0] == GeoPoint{10, 0});
}

TEST_CASE("home location ties break to the earliest first appearance") {
  const CheckinCorpus corpus = make_corpus({
      raw("u", "a", 10, 0), raw("u", "b", 20, 0),
      raw("u", "b", 20, 0), raw("u", "a", 10, 0),
  });
  CHECK(corpus.user_home[0] == GeoPoint{10, 0});

  std::vector<CheckinRecord> empty;
  CHECK_THROWS_AS(infer_home_location(empty), std::invalid_argument);
}

TEST_CASE("home location is always a profile item's location") {
  lsars::Rng rng(23);
  std::vector<RawCheckin> lines;
  for (int i = 0; i < 100; ++i) {
    const int user = static_cast<int>(rng.below(7));
    const int item = static_cast<int>(rng.below(13));
    lines.push_back(raw("u" + std::to_string(user), "v" + std::to_string(item),
                        item * 1.5, item * -2.0));
  }
  const CheckinCorpus corpus = make_corpus(lines);
  for (int u = 0; u < corpus.num_users(); ++u) {
    bool found = false;
    for (const auto index : corpus.profiles[u]) {
      if (corpus.records[index].location == corpus.user_home[u]) found = true;
    }
    CHECK(found);
  }
}

TEST_CASE("split respects the per-user floor rule") {
  std::vector<RawCheckin> lines;
  for (int i = 0; i < 10; ++i) {
    lines.push_back(raw("u", "v" + std::to_string(i), 0, static_cast<double>(i)));
  }
  lines.push_back(raw("loner", "w", 1, 1));
  const CheckinCorpus corpus = make_corpus(lines);
  const TrainTestSplit split = split_train_test(corpus, 0.7, 99);

  CHECK(split.train.profiles[0].size() == 7);  // floor(0.7 * 10)
  CHECK(split.train.profiles[1].size() == 1);  // single record goes to train
  CHECK(split.test.size() == 3);
}

TEST_CASE("split is deterministic and partitions the corpus") {
  lsars::Rng rng(31);
  std::vector<RawCheckin> lines;
  for (int i = 0; i < 120; ++i) {
    const int user = static_cast<int>(rng.below(9));
    const int item = static_cast<int>(rng.below(20));
    lines.push_back(raw("u" + std::to_string(user), "v" + std::to_string(item),
                        item * 0.5, item * 0.25));
  }
  const CheckinCorpus corpus = make_corpus(lines);

  for (const std::uint64_t seed : {1ULL, 2ULL, 77ULL}) {
    const TrainTestSplit a = split_train_test(corpus, 0.7, seed);
    const TrainTestSplit b = split_train_test(corpus, 0.7, seed);
    CHECK(a.train.records == b.train.records);
    CHECK(a.test == b.test);
    CHECK(a.train.records.size() + a.test.size() == corpus.records.size());

    // disjointness: every record lands exactly once
    std::multiset<std::string> all;
    auto key = [&](const CheckinRecord& r) {
      return std::to_string(r.user) + "|" + std::to_string(r.item) + "|" +
             std::to_string(r.location.lon);
    };
    for (const auto& r : a.train.records) all.insert(key(r));
    for (const auto& r : a.test) all.insert(key(r));
    std::multiset<std::string> expected;
    for (const auto& r : corpus.records) expected.insert(key(r));
    CHECK(all == expected);
  }

  CHECK_THROWS_AS(split_train_test(corpus, 1.5, 1), std::invalid_argument);
  CHECK_THROWS_AS(split_train_test(CheckinCorpus{}, 0.7, 1), std::invalid_argument);
}

TEST_CASE("split keeps full vocabularies so test indices stay valid") {
  const CheckinCorpus corpus = make_corpus({
      raw("u", "a", 0, 0), raw("u", "b", 1, 1), raw("u", "c", 2, 2),
  });
  const TrainTestSplit split = split_train_test(corpus, 0.34, 5);
  CHECK(split.train.num_items() == 3);
  CHECK(split.train.item_location.size() == 3);
  for (const auto& record : split.test) {
    CHECK(record.item < split.train.num_items());
  }
}

TEST_CASE("write then re-parse reproduces the corpus index-for-index") {
  TempDir dir;
  const CheckinCorpus corpus = make_corpus({
      raw("b", "y", 1, 2, {"bar", "late"}, {"loud"}),
      raw("a", "x", 3, 4, {"cafe"}, {"good", "good"}),
      raw("b", "x", 3, 4, {}, {}),
  });
  const auto path = dir.file("roundtrip.jsonl");
  write_checkin_file(corpus, path);
  const CheckinCorpus reparsed = parse_checkin_file(path);

  CHECK(reparsed.records == corpus.records);
  CHECK(reparsed.users.tokens() == corpus.users.tokens());
  CHECK(reparsed.items.tokens() == corpus.items.tokens());
  CHECK(reparsed.content_vocab.tokens() == corpus.content_vocab.tokens());
  CHECK(reparsed.review_vocab.tokens() == corpus.review_vocab.tokens());
  CHECK(reparsed.profiles == corpus.profiles);
  CHECK(reparsed.user_home == corpus.user_home);
  CHECK(reparsed.item_location == corpus.item_location);
  CHECK(reparsed.distinct_locations == corpus.distinct_locations);
}

TEST_CASE("timestamps survive the round trip") {
  TempDir dir;
  std::vector<RawCheckin> lines{raw("a", "x", 0, 0)};
  lines[0].timestamp = "2014-05-02";
  const CheckinCorpus corpus = make_corpus(lines);
  const auto path = dir.file("ts.jsonl");
  write_checkin_file(corpus, path);
  CHECK(parse_checkin_file(path).records[0].timestamp == "2014-05-02");
}
