#include "lsars/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lsars/errors.hpp"

namespace lsars {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

constexpr double kRowSumTolerance = 1e-9;

void normalize_row(std::span<const std::int32_t> counts, double prior,
                   std::span<double> out) {
  double denominator = prior * static_cast<double>(counts.size());
  for (const auto n : counts) denominator += static_cast<double>(n);
  for (std::size_t j = 0; j < counts.size(); ++j) {
    out[j] = (static_cast<double>(counts[j]) + prior) / denominator;
  }
  // second pass squeezes the float residual of the division
  double sum = 0.0;
  for (const double value : out) sum += value;
  for (auto& value : out) value /= sum;
}

Matrix normalize_table(const std::vector<std::int32_t>& counts, int rows, int cols,
                       double prior) {
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    normalize_row({counts.data() + static_cast<std::size_t>(r) * cols,
                   static_cast<std::size_t>(cols)},
                  prior, m.row(r));
  }
  return m;
}

// --- base64 of little-endian IEEE doubles ---------------------------------

constexpr char kBase64Chars[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string encode_doubles(std::span<const double> values) {
  std::vector<unsigned char> bytes;
  bytes.reserve(values.size() * 8);
  for (const double value : values) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(value));
    std::memcpy(&bits, &value, sizeof(bits));
    for (int shift = 0; shift < 64; shift += 8) {
      bytes.push_back(static_cast<unsigned char>((bits >> shift) & 0xFF));
    }
  }
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  for (std::size_t i = 0; i < bytes.size(); i += 3) {
    std::uint32_t chunk = static_cast<std::uint32_t>(bytes[i]) << 16;
    if (i + 1 < bytes.size()) chunk |= static_cast<std::uint32_t>(bytes[i + 1]) << 8;
    if (i + 2 < bytes.size()) chunk |= bytes[i + 2];
    out.push_back(kBase64Chars[(chunk >> 18) & 0x3F]);
    out.push_back(kBase64Chars[(chunk >> 12) & 0x3F]);
    out.push_back(i + 1 < bytes.size() ? kBase64Chars[(chunk >> 6) & 0x3F] : '=');
    out.push_back(i + 2 < bytes.size() ? kBase64Chars[chunk & 0x3F] : '=');
  }
  return out;
}

std::vector<double> decode_doubles(const std::string& text, const std::string& what) {
  static const auto lookup = [] {
    std::array<int, 256> table;
    table.fill(-1);
    for (int i = 0; i < 64; ++i) table[static_cast<unsigned char>(kBase64Chars[i])] = i;
    return table;
  }();
  if (text.size() % 4 != 0) throw ModelIoError(what + ": malformed base64 section");
  std::vector<unsigned char> bytes;
  bytes.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    int values[4];
    int padding = 0;
    for (int j = 0; j < 4; ++j) {
      const char c = text[i + j];
      if (c == '=') {
        values[j] = 0;
        ++padding;
      } else {
        values[j] = lookup[static_cast<unsigned char>(c)];
        if (values[j] < 0 || padding > 0) {
          throw ModelIoError(what + ": malformed base64 section");
        }
      }
    }
    const std::uint32_t chunk = (static_cast<std::uint32_t>(values[0]) << 18) |
                                (static_cast<std::uint32_t>(values[1]) << 12) |
                                (static_cast<std::uint32_t>(values[2]) << 6) |
                                static_cast<std::uint32_t>(values[3]);
    bytes.push_back(static_cast<unsigned char>((chunk >> 16) & 0xFF));
    if (padding < 2) bytes.push_back(static_cast<unsigned char>((chunk >> 8) & 0xFF));
    if (padding < 1) bytes.push_back(static_cast<unsigned char>(chunk & 0xFF));
  }
  if (bytes.size() % 8 != 0) throw ModelIoError(what + ": truncated double section");
  std::vector<double> out(bytes.size() / 8);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint64_t bits = 0;
    for (int b = 7; b >= 0; --b) {
      bits = (bits << 8) | bytes[i * 8 + static_cast<std::size_t>(b)];
    }
    std::memcpy(&out[i], &bits, sizeof(double));
  }
  return out;
}

ordered_json matrix_to_json(const Matrix& m) {
  ordered_json j;
  j["rows"] = m.rows;
  j["cols"] = m.cols;
  j["data"] = encode_doubles(m.data);
  return j;
}

Matrix matrix_from_json(const json& j, const std::string& name) {
  Matrix m;
  m.rows = j.at("rows").get<int>();
  m.cols = j.at("cols").get<int>();
  m.data = decode_doubles(j.at("data").get<std::string>(), "table " + name);
  if (m.rows < 0 || m.cols < 0 ||
      m.data.size() != static_cast<std::size_t>(m.rows) * static_cast<std::size_t>(m.cols)) {
    throw ModelIoError("table " + name + ": dimension mismatch with data payload");
  }
  return m;
}

void check_table(const Matrix& m, int rows, int cols, const std::string& name) {
  if (m.rows != rows || m.cols != cols) {
    std::ostringstream msg;
    msg << "table " << name << ": expected " << rows << "x" << cols << ", found "
        << m.rows << "x" << m.cols;
    throw ModelIoError(msg.str());
  }
  if (m.cols == 0) return;  // an empty vocabulary has no distributions
  for (int r = 0; r < m.rows; ++r) {
    double sum = 0.0;
    for (const double value : m.row(r)) {
      if (!(value > 0.0) || !std::isfinite(value)) {
        throw ModelIoError("table " + name + ": row " + std::to_string(r) +
                           " has a non-positive entry");
      }
      sum += value;
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance) {
      std::ostringstream msg;
      msg << "table " << name << ": row " << r << " sums to " << sum
          << ", expected 1";
      throw ModelIoError(msg.str());
    }
  }
}

GeoPoint point_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ModelIoError("malformed location pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

ModelParams estimate_parameters(const CountTables& counts, const HyperParams& hyper) {
  ModelParams params;
  params.user_topic =
      normalize_table(counts.user_topic, counts.users, counts.topics, hyper.topic_prior);
  params.user_region = normalize_table(counts.user_region, counts.users, counts.regions,
                                       hyper.region_prior);
  params.topic_sentiment = normalize_table(counts.topic_sentiment, counts.topics,
                                           counts.sentiments, hyper.sentiment_prior);
  params.topic_word = normalize_table(counts.topic_word, counts.topics,
                                      counts.content_words, hyper.content_word_prior);
  params.region_item = normalize_table(counts.region_item, counts.regions, counts.items,
                                       hyper.item_prior);
  params.sentiment_word =
      normalize_table(counts.sentiment_word, counts.topics * counts.sentiments,
                      counts.review_words, hyper.review_word_prior);
  return params;
}

std::optional<int> TrainedModel::find_user(std::string_view token) const {
  const auto it = std::find(user_tokens.begin(), user_tokens.end(), token);
  if (it == user_tokens.end()) return std::nullopt;
  return static_cast<int>(it - user_tokens.begin());
}

std::optional<int> TrainedModel::find_item(std::string_view token) const {
  const auto it = std::find(item_tokens.begin(), item_tokens.end(), token);
  if (it == item_tokens.end()) return std::nullopt;
  return static_cast<int>(it - item_tokens.begin());
}

TrainedModel assemble_model(const SamplerState& state) {
  const CheckinCorpus& corpus = state.corpus();
  TrainedModel model;
  model.hyper = state.hyper();
  model.params = estimate_parameters(state.counts(), state.hyper());
  model.regions = state.region_gaussians();
  model.user_tokens = corpus.users.tokens();
  model.item_tokens = corpus.items.tokens();
  model.content_tokens = corpus.content_vocab.tokens();
  model.review_tokens = corpus.review_vocab.tokens();
  model.item_location = corpus.item_location;
  model.item_words = corpus.item_words;
  model.user_home = corpus.user_home;
  model.record_count = static_cast<std::int64_t>(corpus.records.size());
  model.distinct_locations = corpus.distinct_locations;

  model.user_checkins.resize(corpus.profiles.size());
  model.user_visited.resize(corpus.profiles.size());
  for (std::size_t u = 0; u < corpus.profiles.size(); ++u) {
    model.user_checkins[u] = static_cast<std::int64_t>(corpus.profiles[u].size());
    std::set<int> visited;
    for (const auto index : corpus.profiles[u]) visited.insert(corpus.records[index].item);
    model.user_visited[u].assign(visited.begin(), visited.end());
  }
  return model;
}

void save_model(const TrainedModel& model, const std::string& path) {
  ordered_json root;
  root["format"] = kModelFormatVersion;
  root["kind"] = model.kind;
  root["dims"] = {{"users", model.num_users()},
                  {"items", model.num_items()},
                  {"content_words", static_cast<int>(model.content_tokens.size())},
                  {"review_words", static_cast<int>(model.review_tokens.size())},
                  {"topics", model.hyper.topics},
                  {"regions", model.hyper.regions},
                  {"sentiments", model.hyper.sentiments}};
  root["hyper"] = {{"topic_prior", model.hyper.topic_prior},
                   {"region_prior", model.hyper.region_prior},
                   {"content_word_prior", model.hyper.content_word_prior},
                   {"sentiment_prior", model.hyper.sentiment_prior},
                   {"review_word_prior", model.hyper.review_word_prior},
                   {"item_prior", model.hyper.item_prior},
                   {"iterations", model.hyper.iterations},
                   {"seed", model.hyper.seed}};
  root["stats"] = {{"records", model.record_count},
                   {"locations", model.distinct_locations}};
  root["vocab"] = {{"users", model.user_tokens},
                   {"items", model.item_tokens},
                   {"content", model.content_tokens},
                   {"review", model.review_tokens}};

  ordered_json item_location = ordered_json::array();
  for (const auto& p : model.item_location) item_location.push_back({p.lat, p.lon});
  root["item_location"] = std::move(item_location);
  root["item_words"] = model.item_words;
  ordered_json user_home = ordered_json::array();
  for (const auto& p : model.user_home) user_home.push_back({p.lat, p.lon});
  root["user_home"] = std::move(user_home);
  root["user_checkins"] = model.user_checkins;
  root["user_visited"] = model.user_visited;

  ordered_json gaussians = ordered_json::array();
  for (const auto& g : model.regions) {
    gaussians.push_back({{"mean", {g.mean().lat, g.mean().lon}},
                         {"cov", {g.covariance().lat_lat, g.covariance().lat_lon,
                                  g.covariance().lon_lon}}});
  }
  root["region_gaussians"] = std::move(gaussians);

  root["tables"] = {{"user_topic", matrix_to_json(model.params.user_topic)},
                    {"user_region", matrix_to_json(model.params.user_region)},
                    {"topic_sentiment", matrix_to_json(model.params.topic_sentiment)},
                    {"topic_word", matrix_to_json(model.params.topic_word)},
                    {"region_item", matrix_to_json(model.params.region_item)},
                    {"sentiment_word", matrix_to_json(model.params.sentiment_word)}};

  const std::filesystem::path target(path);
  const std::filesystem::path temp(path + ".tmp");
  {
    std::ofstream out(temp, std::ios::trunc);
    if (!out) throw ModelIoError("cannot open model file for writing: " + path);
    out << root.dump(2) << '\n';
    if (!out) throw ModelIoError("failed writing model file: " + path);
  }
  std::error_code ec;
  std::filesystem::rename(temp, target, ec);
  if (ec) {
    std::filesystem::remove(temp);
    throw ModelIoError("cannot move model file into place: " + ec.message());
  }
}

TrainedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelIoError("cannot open model file: " + path);
  json root;
  try {
    root = json::parse(in);
  } catch (const json::exception& e) {
    throw ModelIoError("model file " + path + ": " + e.what());
  }

  TrainedModel model;
  try {
    const std::string format = root.at("format").get<std::string>();
    if (format != kModelFormatVersion) {
      throw ModelIoError("unsupported model format '" + format + "', expected '" +
                         kModelFormatVersion + "'");
    }
    model.kind = root.value("kind", "trained");

    const json& dims = root.at("dims");
    const int users = dims.at("users").get<int>();
    const int items = dims.at("items").get<int>();
    const int content_words = dims.at("content_words").get<int>();
    const int review_words = dims.at("review_words").get<int>();
    model.hyper.topics = dims.at("topics").get<int>();
    model.hyper.regions = dims.at("regions").get<int>();
    model.hyper.sentiments = dims.at("sentiments").get<int>();

    const json& hyper = root.at("hyper");
    model.hyper.topic_prior = hyper.at("topic_prior").get<double>();
    model.hyper.region_prior = hyper.at("region_prior").get<double>();
    model.hyper.content_word_prior = hyper.at("content_word_prior").get<double>();
    model.hyper.sentiment_prior = hyper.at("sentiment_prior").get<double>();
    model.hyper.review_word_prior = hyper.at("review_word_prior").get<double>();
    model.hyper.item_prior = hyper.at("item_prior").get<double>();
    model.hyper.iterations = hyper.at("iterations").get<int>();
    model.hyper.seed = hyper.at("seed").get<std::uint64_t>();
    model.hyper.validate();

    model.record_count = root.at("stats").at("records").get<std::int64_t>();
    model.distinct_locations = root.at("stats").at("locations").get<int>();

    const json& vocab = root.at("vocab");
    model.user_tokens = vocab.at("users").get<std::vector<std::string>>();
    model.item_tokens = vocab.at("items").get<std::vector<std::string>>();
    model.content_tokens = vocab.at("content").get<std::vector<std::string>>();
    model.review_tokens = vocab.at("review").get<std::vector<std::string>>();
    if (static_cast<int>(model.user_tokens.size()) != users ||
        static_cast<int>(model.item_tokens.size()) != items ||
        static_cast<int>(model.content_tokens.size()) != content_words ||
        static_cast<int>(model.review_tokens.size()) != review_words) {
      throw ModelIoError("vocabulary sizes disagree with the declared dimensions");
    }

    for (const auto& entry : root.at("item_location")) {
      model.item_location.push_back(point_from_json(entry));
    }
    model.item_words = root.at("item_words").get<std::vector<std::vector<int>>>();
    for (const auto& entry : root.at("user_home")) {
      model.user_home.push_back(point_from_json(entry));
    }
    model.user_checkins = root.at("user_checkins").get<std::vector<std::int64_t>>();
    model.user_visited = root.at("user_visited").get<std::vector<std::vector<int>>>();
    if (static_cast<int>(model.item_location.size()) != items ||
        static_cast<int>(model.item_words.size()) != items ||
        static_cast<int>(model.user_home.size()) != users ||
        static_cast<int>(model.user_checkins.size()) != users ||
        static_cast<int>(model.user_visited.size()) != users) {
      throw ModelIoError("per-user or per-item sections disagree with the dimensions");
    }

    for (const auto& entry : root.at("region_gaussians")) {
      const GeoPoint mean = point_from_json(entry.at("mean"));
      const json& cov = entry.at("cov");
      if (!cov.is_array() || cov.size() != 3) {
        throw ModelIoError("malformed region covariance");
      }
      model.regions.emplace_back(
          mean, CovMatrix2{cov[0].get<double>(), cov[1].get<double>(),
                           cov[2].get<double>()});
    }
    if (static_cast<int>(model.regions.size()) != model.hyper.regions) {
      throw ModelIoError("region gaussian count disagrees with the region dimension");
    }

    const json& tables = root.at("tables");
    model.params.user_topic = matrix_from_json(tables.at("user_topic"), "user_topic");
    model.params.user_region = matrix_from_json(tables.at("user_region"), "user_region");
    model.params.topic_sentiment =
        matrix_from_json(tables.at("topic_sentiment"), "topic_sentiment");
    model.params.topic_word = matrix_from_json(tables.at("topic_word"), "topic_word");
    model.params.region_item = matrix_from_json(tables.at("region_item"), "region_item");
    model.params.sentiment_word =
        matrix_from_json(tables.at("sentiment_word"), "sentiment_word");

    check_table(model.params.user_topic, users, model.hyper.topics, "user_topic");
    check_table(model.params.user_region, users, model.hyper.regions, "user_region");
    check_table(model.params.topic_sentiment, model.hyper.topics,
                model.hyper.sentiments, "topic_sentiment");
    check_table(model.params.topic_word, model.hyper.topics, content_words, "topic_word");
    check_table(model.params.region_item, model.hyper.regions, items, "region_item");
    check_table(model.params.sentiment_word, model.hyper.topics * model.hyper.sentiments,
                review_words, "sentiment_word");

    for (const auto& words : model.item_words) {
      for (const int w : words) {
        if (w < 0 || w >= content_words) throw ModelIoError("item word index out of range");
      }
    }
    for (const auto& visited : model.user_visited) {
      for (const int v : visited) {
        if (v < 0 || v >= items) throw ModelIoError("visited item index out of range");
      }
    }
  } catch (const json::exception& e) {
    throw ModelIoError("model file " + path + ": " + e.what());
  }
  return model;
}

}  // namespace lsars
