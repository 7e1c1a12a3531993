#include "lsars/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lsars/errors.hpp"
#include "lsars/rng.hpp"

namespace lsars {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::vector<std::string> string_list(const json& object, const char* key,
                                     const std::string& context) {
  std::vector<std::string> out;
  if (!object.contains(key)) return out;
  const json& field = object.at(key);
  if (!field.is_array()) {
    throw ParseError(context + ": field '" + key + "' must be a list of strings");
  }
  out.reserve(field.size());
  for (const auto& entry : field) {
    if (!entry.is_string()) {
      throw ParseError(context + ": field '" + key + "' must be a list of strings");
    }
    out.push_back(entry.get<std::string>());
  }
  return out;
}

RawCheckin parse_raw_line(const std::string& line, const std::string& context) {
  json object;
  try {
    object = json::parse(line);
  } catch (const json::exception& e) {
    throw ParseError(context + ": invalid JSON: " + e.what());
  }
  if (!object.is_object()) throw ParseError(context + ": expected a JSON object");

  RawCheckin raw;
  try {
    raw.user = object.at("user").get<std::string>();
    raw.item = object.at("item").get<std::string>();
    raw.location.lat = object.at("lat").get<double>();
    raw.location.lon = object.at("lon").get<double>();
  } catch (const json::exception& e) {
    throw ParseError(context + ": " + e.what());
  }
  raw.content_words = string_list(object, "content_words", context);
  raw.review_words = string_list(object, "review_words", context);
  if (object.contains("timestamp")) {
    if (!object.at("timestamp").is_string()) {
      throw ParseError(context + ": field 'timestamp' must be a string");
    }
    raw.timestamp = object.at("timestamp").get<std::string>();
  }
  if (!valid_coordinates(raw.location)) {
    std::ostringstream msg;
    msg << context << ": coordinates (" << raw.location.lat << ", "
        << raw.location.lon << ") out of range";
    throw ParseError(msg.str());
  }
  return raw;
}

}  // namespace

int Vocabulary::intern(std::string_view token) {
  auto it = index_.find(std::string(token));
  if (it != index_.end()) return it->second;
  const int id = static_cast<int>(tokens_.size());
  tokens_.emplace_back(token);
  index_.emplace(tokens_.back(), id);
  return id;
}

std::optional<int> Vocabulary::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void CorpusBuilder::add(const RawCheckin& raw, const std::string& context) {
  if (!valid_coordinates(raw.location)) {
    throw ParseError(context + ": coordinates out of range");
  }
  CheckinRecord record;
  record.user = corpus_.users.intern(raw.user);
  record.item = corpus_.items.intern(raw.item);
  record.location = raw.location;
  record.timestamp = raw.timestamp;
  record.content_words.reserve(raw.content_words.size());
  for (const auto& w : raw.content_words) {
    record.content_words.push_back(corpus_.content_vocab.intern(w));
  }
  record.review_words.reserve(raw.review_words.size());
  for (const auto& c : raw.review_words) {
    record.review_words.push_back(corpus_.review_vocab.intern(c));
  }

  if (record.item == static_cast<int>(corpus_.item_location.size())) {
    corpus_.item_location.push_back(record.location);
    corpus_.item_words.push_back(record.content_words);
  } else if (!(corpus_.item_location[record.item] == record.location)) {
    throw ParseError(context + ": item '" + raw.item +
                     "' already seen at a different location");
  }

  if (record.user == static_cast<int>(corpus_.profiles.size())) {
    corpus_.profiles.emplace_back();
  }
  corpus_.profiles[record.user].push_back(
      static_cast<std::int32_t>(corpus_.records.size()));
  corpus_.records.push_back(std::move(record));
}

CheckinCorpus CorpusBuilder::finish() {
  std::set<std::pair<double, double>> locations;
  for (const auto& p : corpus_.item_location) locations.emplace(p.lat, p.lon);
  corpus_.distinct_locations = static_cast<int>(locations.size());

  corpus_.user_home.resize(corpus_.profiles.size());
  for (std::size_t u = 0; u < corpus_.profiles.size(); ++u) {
    std::vector<CheckinRecord> profile;
    profile.reserve(corpus_.profiles[u].size());
    for (const auto index : corpus_.profiles[u]) profile.push_back(corpus_.records[index]);
    corpus_.user_home[u] = infer_home_location(profile);
  }
  return std::move(corpus_);
}

std::vector<RawCheckin> read_raw_checkins(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open check-in file: " + path);
  std::vector<RawCheckin> out;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_raw_line(line, "line " + std::to_string(line_number)));
  }
  return out;
}

CheckinCorpus corpus_from_raw(std::span<const RawCheckin> raw) {
  CorpusBuilder builder;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    builder.add(raw[i], "record " + std::to_string(i));
  }
  return builder.finish();
}

CheckinCorpus parse_checkin_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open check-in file: " + path);
  CorpusBuilder builder;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string context = "line " + std::to_string(line_number);
    builder.add(parse_raw_line(line, context), context);
  }
  return builder.finish();
}

void write_checkin_records(const CheckinCorpus& vocab_source,
                           std::span<const CheckinRecord> records,
                           const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ParseError("cannot open output file: " + path);
  for (const auto& record : records) {
    ordered_json object;
    object["user"] = vocab_source.users.token(record.user);
    object["item"] = vocab_source.items.token(record.item);
    object["lat"] = record.location.lat;
    object["lon"] = record.location.lon;
    ordered_json content = ordered_json::array();
    for (const int w : record.content_words) {
      content.push_back(vocab_source.content_vocab.token(w));
    }
    object["content_words"] = std::move(content);
    ordered_json review = ordered_json::array();
    for (const int c : record.review_words) {
      review.push_back(vocab_source.review_vocab.token(c));
    }
    object["review_words"] = std::move(review);
    if (!record.timestamp.empty()) object["timestamp"] = record.timestamp;
    out << object.dump() << '\n';
  }
  if (!out) throw ParseError("failed writing check-in file: " + path);
}

void write_checkin_file(const CheckinCorpus& corpus, const std::string& path) {
  write_checkin_records(corpus, corpus.records, path);
}

GeoPoint infer_home_location(std::span<const CheckinRecord> profile) {
  if (profile.empty()) {
    throw std::invalid_argument("infer_home_location: empty profile");
  }
  std::unordered_map<int, int> counts;
  std::unordered_map<int, std::size_t> first_seen;
  for (std::size_t i = 0; i < profile.size(); ++i) {
    ++counts[profile[i].item];
    first_seen.emplace(profile[i].item, i);
  }
  int best_item = profile.front().item;
  for (const auto& [item, count] : counts) {
    const int best_count = counts[best_item];
    if (count > best_count ||
        (count == best_count && first_seen[item] < first_seen[best_item])) {
      best_item = item;
    }
  }
  for (const auto& record : profile) {
    if (record.item == best_item) return record.location;
  }
  return profile.front().location;  // unreachable
}

TrainTestSplit split_train_test(const CheckinCorpus& corpus, double train_fraction,
                                std::uint64_t seed) {
  if (corpus.records.empty()) {
    throw std::invalid_argument("split_train_test: empty corpus");
  }
  if (!(train_fraction > 0.0) || !(train_fraction < 1.0)) {
    throw std::invalid_argument("split_train_test: train_fraction must be in (0, 1)");
  }

  Rng rng(seed);
  std::vector<bool> in_train(corpus.records.size(), false);
  for (const auto& profile : corpus.profiles) {
    const std::size_t n = profile.size();
    const std::size_t take = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n))));
    std::vector<std::int32_t> shuffled(profile.begin(), profile.end());
    rng.shuffle(shuffled);
    for (std::size_t i = 0; i < take && i < shuffled.size(); ++i) {
      in_train[shuffled[i]] = true;
    }
  }

  TrainTestSplit split;
  // The train corpus keeps the full vocabularies and item maps so indices
  // stay valid for records that ended up in the test partition.
  split.train.users = corpus.users;
  split.train.items = corpus.items;
  split.train.content_vocab = corpus.content_vocab;
  split.train.review_vocab = corpus.review_vocab;
  split.train.item_location = corpus.item_location;
  split.train.item_words = corpus.item_words;
  split.train.distinct_locations = corpus.distinct_locations;
  split.train.profiles.resize(corpus.profiles.size());

  for (std::size_t i = 0; i < corpus.records.size(); ++i) {
    if (in_train[i]) {
      const auto index = static_cast<std::int32_t>(split.train.records.size());
      split.train.profiles[corpus.records[i].user].push_back(index);
      split.train.records.push_back(corpus.records[i]);
    } else {
      split.test.push_back(corpus.records[i]);
    }
  }

  split.train.user_home.resize(split.train.profiles.size());
  for (std::size_t u = 0; u < split.train.profiles.size(); ++u) {
    std::vector<CheckinRecord> profile;
    profile.reserve(split.train.profiles[u].size());
    for (const auto index : split.train.profiles[u]) {
      profile.push_back(split.train.records[index]);
    }
    split.train.user_home[u] = infer_home_location(profile);
  }
  return split;
}

}  // namespace lsars
