#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lsars/corpus.hpp"
#include "lsars/errors.hpp"
#include "lsars/eval.hpp"
#include "lsars/lexicon.hpp"
#include "lsars/model.hpp"
#include "lsars/sampler.hpp"
#include "lsars/scoring.hpp"
#include "lsars/synth.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;    // parse/config/model-file failures
constexpr int kExitQuery = 3;    // unknown user or item
constexpr int kExitEmptyEval = 4;

struct TrainConfig {
  std::string input, output, lexicon;
  int topics = 40, regions = 20, sentiments = 2, iters = 1600;
  std::uint64_t seed = 1;
  double alpha = 0.0, gamma = 0.0;  // 0 = use 50/K and 50/R
  double eta = 0.01, delta = 0.01, beta = 0.01, tau = 0.01;
  double holdout_fraction = 0.0;
  std::string holdout_out;
};

struct RecommendConfig {
  std::string model, user;
  double lat = 0.0, lon = 0.0;
  int k = 20;
  double kappa = 1.0;
  bool include_visited = false;
};

struct DiscoverConfig {
  std::string model, item;
  double lat = 0.0, lon = 0.0;
  std::vector<std::string> words;
  int k = 10;
  double kappa = 1.0;
};

struct EvalConfig {
  std::string model, test, task = "items", scenario = "all";
  std::vector<int> ks = {1, 5, 10, 20};
  double distance_km = 100.0;
  double kappa = 1.0;
  std::string json_out, csv_out;
};

struct SynthConfig {
  std::string output, truth_out, assignments_out, truth_in;
  bool random_truth = false;
  lsars::RandomTruthConfig random;
  std::uint64_t seed = 7;
};

int run_train(const TrainConfig& config) {
  lsars::CheckinCorpus corpus = lsars::parse_checkin_file(config.input);

  lsars::HyperParams hyper =
      lsars::HyperParams::with_dimensions(config.topics, config.regions, config.sentiments);
  if (config.alpha > 0.0) hyper.topic_prior = config.alpha;
  if (config.gamma > 0.0) hyper.region_prior = config.gamma;
  hyper.content_word_prior = config.eta;
  hyper.sentiment_prior = config.delta;
  hyper.review_word_prior = config.beta;
  hyper.item_prior = config.tau;
  hyper.iterations = config.iters;
  hyper.seed = config.seed;
  hyper.validate();

  const lsars::SentimentLexicon lexicon = config.lexicon.empty()
                                              ? lsars::SentimentLexicon::builtin()
                                              : lsars::SentimentLexicon::from_file(config.lexicon);

  const lsars::CheckinCorpus* training = &corpus;
  lsars::TrainTestSplit split;
  if (config.holdout_fraction > 0.0) {
    split = lsars::split_train_test(corpus, 1.0 - config.holdout_fraction, config.seed);
    if (!config.holdout_out.empty()) {
      lsars::write_checkin_records(corpus, split.test, config.holdout_out);
    }
    training = &split.train;
    std::cerr << "holdout: " << split.test.size() << " of " << corpus.records.size()
              << " records held out\n";
  }

  const lsars::TrainedModel model =
      lsars::train(*training, hyper, lexicon, [](int iteration, double log_posterior) {
        std::fprintf(stderr, "iter %d log_posterior %.6f\n", iteration, log_posterior);
      });
  lsars::save_model(model, config.output);
  std::cerr << "model written to " << config.output << "\n";
  return kExitOk;
}

int run_recommend(const RecommendConfig& config) {
  const lsars::TrainedModel model = lsars::load_model(config.model);
  const lsars::GeoPoint location{config.lat, config.lon};
  if (!lsars::valid_coordinates(location)) {
    throw lsars::ConfigError("query coordinates out of range");
  }
  const auto user = model.find_user(config.user);
  if (!user) throw lsars::QueryError("unknown user '" + config.user + "'");

  lsars::ItemQuery query{*user, location, config.k};
  lsars::ScoringOptions options;
  options.kappa = config.kappa;
  options.include_visited = config.include_visited;
  for (const auto& entry : lsars::recommend_items(model, query, options)) {
    std::printf("%s\t%.12g\n", model.item_tokens[entry.index].c_str(), entry.score);
  }
  return kExitOk;
}

int run_discover(const DiscoverConfig& config) {
  const lsars::TrainedModel model = lsars::load_model(config.model);
  lsars::UserQuery query;
  if (!config.item.empty()) {
    const auto item = model.find_item(config.item);
    if (!item) throw lsars::QueryError("unknown item '" + config.item + "'");
    query = lsars::user_query_for_item(model, *item, config.k);
  } else {
    // ad-hoc item: described by content words only; unknown words drop out
    query = lsars::user_query_ad_hoc(model, config.words, config.k);
  }
  lsars::ScoringOptions options;
  options.kappa = config.kappa;
  for (const auto& entry : lsars::discover_users(model, query, options)) {
    std::printf("%s\t%.12g\n", model.user_tokens[entry.index].c_str(), entry.score);
  }
  return kExitOk;
}

lsars::ScenarioFilter parse_filter(const std::string& name) {
  if (name == "all") return lsars::ScenarioFilter::All;
  if (name == "hometown") return lsars::ScenarioFilter::HomeTown;
  if (name == "outoftown") return lsars::ScenarioFilter::OutOfTown;
  throw lsars::ConfigError("unknown scenario filter '" + name + "'");
}

int run_eval(const EvalConfig& config) {
  const lsars::TrainedModel model = lsars::load_model(config.model);
  const std::vector<lsars::RawCheckin> test = lsars::read_raw_checkins(config.test);

  lsars::EvalOptions options;
  options.k_values = config.ks;
  options.filter = parse_filter(config.scenario);
  options.distance_km = config.distance_km;
  options.kappa = config.kappa;

  std::ofstream csv;
  if (!config.csv_out.empty()) {
    csv.open(config.csv_out, std::ios::trunc);
    if (!csv) throw lsars::ConfigError("cannot open case dump file: " + config.csv_out);
    options.case_dump = &csv;
  }

  lsars::EvalReport report;
  if (config.task == "items") {
    report = lsars::accuracy_at_k(model, test, options);
  } else if (config.task == "users") {
    report = lsars::precision_at_k(model, test, options);
  } else {
    throw lsars::ConfigError("unknown task '" + config.task + "', expected items|users");
  }

  if (report.evaluated == 0) {
    std::cerr << "error: no test cases left after mapping and scenario filtering\n";
    return kExitEmptyEval;
  }
  std::cout << lsars::report_to_text(report);
  if (!config.json_out.empty()) {
    std::ofstream json_file(config.json_out, std::ios::trunc);
    if (!json_file) throw lsars::ConfigError("cannot open report file: " + config.json_out);
    json_file << lsars::report_to_json(report) << '\n';
  }
  return kExitOk;
}

int run_synth(const SynthConfig& config) {
  lsars::TrueParams truth;
  if (config.random_truth) {
    truth = lsars::random_true_params(config.random, config.seed);
  } else if (!config.truth_in.empty()) {
    truth = lsars::truth_from_model(lsars::load_model(config.truth_in));
    truth.records_per_user = config.random.records_per_user;
    truth.content_words_min = config.random.content_words_min;
    truth.content_words_max = config.random.content_words_max;
    truth.review_words_min = config.random.review_words_min;
    truth.review_words_max = config.random.review_words_max;
  } else {
    throw lsars::ConfigError("either --random-truth or --truth-in is required");
  }

  const lsars::GeneratedCorpus generated = lsars::generate_corpus(truth, config.seed);
  lsars::write_checkin_file(generated.corpus, config.output);
  std::cerr << "wrote " << generated.corpus.records.size() << " records to "
            << config.output << "\n";
  if (!config.truth_out.empty()) {
    lsars::save_model(lsars::truth_to_model(truth, generated.corpus), config.truth_out);
  }
  if (!config.assignments_out.empty()) {
    lsars::write_hidden_assignments(generated.hidden, config.assignments_out);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latent topic/sentiment/region modeling of location check-ins"};
  app.require_subcommand(1);

  TrainConfig train_config;
  CLI::App* train = app.add_subcommand("train", "Fit a model on a check-in file");
  train->add_option("--input", train_config.input, "check-in JSON-lines file")->required();
  train->add_option("--output,-o", train_config.output, "model file to write")->required();
  train->add_option("--topics", train_config.topics, "number of latent topics");
  train->add_option("--regions", train_config.regions, "number of latent regions");
  train->add_option("--sentiments", train_config.sentiments, "number of sentiment labels");
  train->add_option("--iters", train_config.iters, "Gibbs sweeps");
  train->add_option("--seed", train_config.seed, "random seed");
  train->add_option("--lexicon", train_config.lexicon, "sentiment seed lexicon file");
  train->add_option("--alpha", train_config.alpha, "topic prior (default 50/K)");
  train->add_option("--gamma", train_config.gamma, "region prior (default 50/R)");
  train->add_option("--eta", train_config.eta, "content-word prior");
  train->add_option("--delta", train_config.delta, "sentiment prior");
  train->add_option("--beta", train_config.beta, "review-word prior");
  train->add_option("--tau", train_config.tau, "item prior");
  train->add_option("--holdout-fraction", train_config.holdout_fraction,
                    "per-user fraction of records held out before training");
  train->add_option("--holdout-out", train_config.holdout_out,
                    "file for the held-out records");

  RecommendConfig recommend_config;
  CLI::App* recommend = app.add_subcommand("recommend", "Top-k items for a user at a location");
  recommend->add_option("--model", recommend_config.model)->required();
  recommend->add_option("--user", recommend_config.user)->required();
  recommend->add_option("--lat", recommend_config.lat)->required();
  recommend->add_option("--lon", recommend_config.lon)->required();
  recommend->add_option("--k", recommend_config.k, "result count");
  recommend->add_option("--kappa", recommend_config.kappa, "prior pseudo-count");
  recommend->add_flag("--include-visited", recommend_config.include_visited,
                      "keep training-visited items as candidates");

  DiscoverConfig discover_config;
  CLI::App* discover = app.add_subcommand("discover", "Top-k users for an item");
  discover->add_option("--model", discover_config.model)->required();
  discover->add_option("--item", discover_config.item, "item token known to the model");
  discover->add_option("--lat", discover_config.lat, "ad-hoc item latitude");
  discover->add_option("--lon", discover_config.lon, "ad-hoc item longitude");
  discover->add_option("--words", discover_config.words, "ad-hoc item content words")
      ->delimiter(',');
  discover->add_option("--k", discover_config.k, "result count");
  discover->add_option("--kappa", discover_config.kappa, "prior pseudo-count");

  EvalConfig eval_config;
  CLI::App* evaluate = app.add_subcommand("eval", "Held-out evaluation of a model");
  evaluate->add_option("--model", eval_config.model)->required();
  evaluate->add_option("--test", eval_config.test, "held-out check-in file")->required();
  evaluate->add_option("--task", eval_config.task, "items or users");
  evaluate->add_option("--k", eval_config.ks, "k values")->delimiter(',');
  evaluate->add_option("--scenario", eval_config.scenario, "all, hometown or outoftown");
  evaluate->add_option("--distance-km", eval_config.distance_km, "scenario threshold");
  evaluate->add_option("--kappa", eval_config.kappa, "prior pseudo-count");
  evaluate->add_option("--json", eval_config.json_out, "machine-readable report file");
  evaluate->add_option("--csv", eval_config.csv_out, "per-case dump file");

  SynthConfig synth_config;
  CLI::App* synth = app.add_subcommand("synth", "Generate a corpus from known parameters");
  synth->add_option("--output", synth_config.output, "corpus file to write")->required();
  synth->add_option("--truth-out", synth_config.truth_out, "write the truth parameters");
  synth->add_option("--assignments", synth_config.assignments_out,
                    "write the hidden assignments");
  synth->add_flag("--random-truth", synth_config.random_truth,
                  "draw well-separated truth parameters");
  synth->add_option("--truth-in", synth_config.truth_in, "generate from an existing truth file");
  synth->add_option("--seed", synth_config.seed, "random seed");
  synth->add_option("--users", synth_config.random.users);
  synth->add_option("--items", synth_config.random.items);
  synth->add_option("--records", synth_config.random.records_per_user, "records per user");
  synth->add_option("--topics", synth_config.random.topics);
  synth->add_option("--regions", synth_config.random.regions);
  synth->add_option("--sentiments", synth_config.random.sentiments);
  synth->add_option("--content-vocab", synth_config.random.content_vocab);
  synth->add_option("--neutral-review-words", synth_config.random.neutral_review_words);
  synth->add_option("--wmin", synth_config.random.content_words_min);
  synth->add_option("--wmax", synth_config.random.content_words_max);
  synth->add_option("--cmin", synth_config.random.review_words_min);
  synth->add_option("--cmax", synth_config.random.review_words_max);
  synth->add_option("--region-spread", synth_config.random.region_spread_deg,
                    "per-region standard deviation, degrees");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*train) return run_train(train_config);
    if (*recommend) return run_recommend(recommend_config);
    if (*discover) return run_discover(discover_config);
    if (*evaluate) return run_eval(eval_config);
    if (*synth) return run_synth(synth_config);
  } catch (const lsars::QueryError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitQuery;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
