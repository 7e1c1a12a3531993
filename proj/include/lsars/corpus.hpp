#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lsars/geo.hpp"

namespace lsars {

// Bijective token <-> dense index map; indices contiguous from 0 in
// first-appearance order.
class Vocabulary {
 public:
  int intern(std::string_view token);
  std::optional<int> find(std::string_view token) const;
  const std::string& token(int index) const { return tokens_.at(index); }
  int size() const { return static_cast<int>(tokens_.size()); }
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

// One observed check-in: user u visits item v at the item's location, with
// the item's content words and the user's review words.
struct CheckinRecord {
  int user = 0;
  int item = 0;
  GeoPoint location;
  std::vector<int> content_words;  // indices into the content vocabulary
  std::vector<int> review_words;   // indices into the review vocabulary
  std::string timestamp;           // opaque, ordering only; may be empty

  bool operator==(const CheckinRecord&) const = default;
};

// A check-in line before interning; tokens are raw strings. Evaluation maps
// these against a trained model's vocabularies instead of re-interning.
struct RawCheckin {
  std::string user;
  std::string item;
  GeoPoint location;
  std::vector<std::string> content_words;
  std::vector<std::string> review_words;
  std::string timestamp;
};

struct CheckinCorpus {
  Vocabulary users;
  Vocabulary items;
  Vocabulary content_vocab;
  Vocabulary review_vocab;

  std::vector<CheckinRecord> records;              // flat, input order
  std::vector<std::vector<std::int32_t>> profiles;  // record indices per user
  std::vector<GeoPoint> item_location;             // per item
  std::vector<std::vector<int>> item_words;        // per item, first-seen W_v
  std::vector<GeoPoint> user_home;                 // per user
  int distinct_locations = 0;                      // reported statistic only

  int num_users() const { return users.size(); }
  int num_items() const { return items.size(); }
  int num_content_words() const { return content_vocab.size(); }
  int num_review_words() const { return review_vocab.size(); }
  std::size_t num_records() const { return records.size(); }
};

// Accumulates records and finalizes profiles, home locations and statistics.
// Shared by the file parser and the synthetic generator.
class CorpusBuilder {
 public:
  // context identifies the source position (e.g. "line 12") in errors.
  void add(const RawCheckin& raw, const std::string& context);
  CheckinCorpus finish();

 private:
  CheckinCorpus corpus_;
};

// UTF-8 JSON-lines, one object per line with fields user, item, lat, lon,
// content_words, review_words and optional timestamp. Missing word-list
// fields are treated as empty lists. Blank lines are skipped.
std::vector<RawCheckin> read_raw_checkins(const std::string& path);
CheckinCorpus parse_checkin_file(const std::string& path);
CheckinCorpus corpus_from_raw(std::span<const RawCheckin> raw);

// Inverse of parse_checkin_file: records in flat order, token strings
// restored, so re-parsing reproduces the corpus index-for-index.
void write_checkin_file(const CheckinCorpus& corpus, const std::string& path);

// Same line format for an arbitrary record list; vocab_source supplies the
// token strings (e.g. held-out records of a split).
void write_checkin_records(const CheckinCorpus& vocab_source,
                           std::span<const CheckinRecord> records,
                           const std::string& path);

// Location of the most frequently visited item; ties go to the item whose
// first visit appears earliest in the profile.
GeoPoint infer_home_location(std::span<const CheckinRecord> profile);

struct TrainTestSplit {
  CheckinCorpus train;                 // shares all vocabularies and item maps
  std::vector<CheckinRecord> test;     // held-out records, corpus order
};

// Per-user random split: floor(train_fraction * |D_u|) records (at least 1)
// stay in train, the rest are held out. Deterministic given the seed.
TrainTestSplit split_train_test(const CheckinCorpus& corpus, double train_fraction,
                                std::uint64_t seed);

}  // namespace lsars
