#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "lsars/corpus.hpp"
#include "lsars/model.hpp"

namespace lsars {

enum class Scenario { HomeTown, OutOfTown };
enum class ScenarioFilter { All, HomeTown, OutOfTown };

// Out-of-town iff the great-circle distance exceeds the threshold.
Scenario classify_scenario(const GeoPoint& home, const GeoPoint& target,
                           double distance_km);

bool scenario_matches(Scenario scenario, ScenarioFilter filter);

std::string to_string(Scenario scenario);
std::string to_string(ScenarioFilter filter);

struct EvalOptions {
  std::vector<int> k_values = {1, 5, 10, 20};
  ScenarioFilter filter = ScenarioFilter::All;
  double distance_km = 100.0;
  double kappa = 1.0;
  std::ostream* case_dump = nullptr;  // optional per-case CSV
};

struct EvalReport {
  std::string task;      // "items" or "users"
  std::string scenario;  // filter the metrics were computed under
  double distance_km = 100.0;
  std::vector<int> k_values;
  std::vector<double> metric;  // Accuracy@k or Precision@k per k value

  std::int64_t cases_hometown = 0;   // classified test cases per scenario
  std::int64_t cases_outoftown = 0;
  std::int64_t evaluated = 0;        // cases that entered the metric
  std::int64_t skipped_unknown_user = 0;
  std::int64_t skipped_unknown_item = 0;
};

std::string report_to_json(const EvalReport& report);
std::string report_to_text(const EvalReport& report);

// Fraction of test records whose ground-truth item lands in the top k when
// ranked against every item the user had not visited in training. The query
// location is the ground-truth item's location. Test users or items unknown
// to the model are skipped and counted.
EvalReport accuracy_at_k(const TrainedModel& model, std::span<const RawCheckin> test,
                         const EvalOptions& options = {});

// Mean over test items of (relevant users in the discovery top k) / k, where
// the relevant users are those with an in-scenario test check-in on the item.
// Items without any in-scenario test user are not cases under that filter.
EvalReport precision_at_k(const TrainedModel& model, std::span<const RawCheckin> test,
                          const EvalOptions& options = {});

}  // namespace lsars
