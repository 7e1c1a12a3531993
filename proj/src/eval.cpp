#include "lsars/eval.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "lsars/scoring.hpp"

namespace lsars {

namespace {

struct TestCase {
  int user = 0;
  int item = 0;
};

struct MappedCases {
  std::vector<TestCase> cases;
  std::int64_t skipped_unknown_user = 0;
  std::int64_t skipped_unknown_item = 0;
};

MappedCases map_cases(const TrainedModel& model, std::span<const RawCheckin> test) {
  std::unordered_map<std::string, int> user_index, item_index;
  for (int u = 0; u < model.num_users(); ++u) user_index.emplace(model.user_tokens[u], u);
  for (int v = 0; v < model.num_items(); ++v) item_index.emplace(model.item_tokens[v], v);

  MappedCases mapped;
  for (const auto& raw : test) {
    const auto user = user_index.find(raw.user);
    if (user == user_index.end()) {
      ++mapped.skipped_unknown_user;
      continue;
    }
    const auto item = item_index.find(raw.item);
    if (item == item_index.end()) {
      ++mapped.skipped_unknown_item;
      continue;
    }
    mapped.cases.push_back({user->second, item->second});
  }
  return mapped;
}

}  // namespace

Scenario classify_scenario(const GeoPoint& home, const GeoPoint& target,
                           double distance_km) {
  return haversine_km(home, target) > distance_km ? Scenario::OutOfTown
                                                  : Scenario::HomeTown;
}

bool scenario_matches(Scenario scenario, ScenarioFilter filter) {
  switch (filter) {
    case ScenarioFilter::All: return true;
    case ScenarioFilter::HomeTown: return scenario == Scenario::HomeTown;
    case ScenarioFilter::OutOfTown: return scenario == Scenario::OutOfTown;
  }
  return true;
}

std::string to_string(Scenario scenario) {
  return scenario == Scenario::HomeTown ? "hometown" : "outoftown";
}

std::string to_string(ScenarioFilter filter) {
  switch (filter) {
    case ScenarioFilter::All: return "all";
    case ScenarioFilter::HomeTown: return "hometown";
    case ScenarioFilter::OutOfTown: return "outoftown";
  }
  return "all";
}

EvalReport accuracy_at_k(const TrainedModel& model, std::span<const RawCheckin> test,
                         const EvalOptions& options) {
  EvalReport report;
  report.task = "items";
  report.scenario = to_string(options.filter);
  report.distance_km = options.distance_km;
  report.k_values = options.k_values;
  report.metric.assign(options.k_values.size(), 0.0);

  const MappedCases mapped = map_cases(model, test);
  report.skipped_unknown_user = mapped.skipped_unknown_user;
  report.skipped_unknown_item = mapped.skipped_unknown_item;

  if (options.case_dump) {
    *options.case_dump << "case,user,item,scenario,rank,hit\n";
  }
  const int max_k =
      options.k_values.empty() ? 0 : *std::max_element(options.k_values.begin(),
                                                       options.k_values.end());

  std::vector<std::int64_t> hits(options.k_values.size(), 0);
  std::int64_t case_id = -1;
  for (const auto& test_case : mapped.cases) {
    ++case_id;
    const GeoPoint& item_location = model.item_location[test_case.item];
    const Scenario scenario = classify_scenario(model.user_home[test_case.user],
                                                item_location, options.distance_km);
    if (scenario == Scenario::HomeTown) {
      ++report.cases_hometown;
    } else {
      ++report.cases_outoftown;
    }
    if (!scenario_matches(scenario, options.filter)) continue;
    ++report.evaluated;

    // Rank the ground truth against every unvisited item; the query location
    // is the ground-truth item's own location.
    const ItemScorer scorer(model, test_case.user, item_location, options.kappa);
    const double truth_score = scorer.log_score(test_case.item);
    const auto& visited = model.user_visited[test_case.user];
    std::int64_t rank = 1;
    for (int v = 0; v < model.num_items(); ++v) {
      if (v == test_case.item) continue;
      if (std::binary_search(visited.begin(), visited.end(), v)) continue;
      const double score = scorer.log_score(v);
      if (score > truth_score || (score == truth_score && v < test_case.item)) ++rank;
    }
    for (std::size_t i = 0; i < options.k_values.size(); ++i) {
      if (rank <= options.k_values[i]) ++hits[i];
    }
    if (options.case_dump) {
      *options.case_dump << case_id << ',' << model.user_tokens[test_case.user] << ','
                         << model.item_tokens[test_case.item] << ','
                         << to_string(scenario) << ',' << rank << ','
                         << (rank <= max_k ? 1 : 0) << '\n';
    }
  }

  for (std::size_t i = 0; i < hits.size(); ++i) {
    report.metric[i] = report.evaluated > 0
                           ? static_cast<double>(hits[i]) /
                                 static_cast<double>(report.evaluated)
                           : 0.0;
  }
  return report;
}

EvalReport precision_at_k(const TrainedModel& model, std::span<const RawCheckin> test,
                          const EvalOptions& options) {
  EvalReport report;
  report.task = "users";
  report.scenario = to_string(options.filter);
  report.distance_km = options.distance_km;
  report.k_values = options.k_values;
  report.metric.assign(options.k_values.size(), 0.0);

  const MappedCases mapped = map_cases(model, test);
  report.skipped_unknown_user = mapped.skipped_unknown_user;
  report.skipped_unknown_item = mapped.skipped_unknown_item;

  // item -> users with an in-scenario test check-in (the relevant set)
  std::map<int, std::vector<int>> relevant_by_item;
  for (const auto& test_case : mapped.cases) {
    const Scenario scenario =
        classify_scenario(model.user_home[test_case.user],
                          model.item_location[test_case.item], options.distance_km);
    if (scenario == Scenario::HomeTown) {
      ++report.cases_hometown;
    } else {
      ++report.cases_outoftown;
    }
    if (!scenario_matches(scenario, options.filter)) continue;
    relevant_by_item[test_case.item].push_back(test_case.user);
  }

  if (options.case_dump) {
    *options.case_dump << "item,user,rank,scenario,relevant\n";
  }
  const int max_k =
      options.k_values.empty() ? 0 : *std::max_element(options.k_values.begin(),
                                                       options.k_values.end());

  for (auto& [item, users] : relevant_by_item) {
    std::sort(users.begin(), users.end());
    users.erase(std::unique(users.begin(), users.end()), users.end());
    ++report.evaluated;

    const UserQuery query = user_query_for_item(model, item, max_k);
    ScoringOptions scoring;
    scoring.kappa = options.kappa;
    const RankedList ranked = discover_users(model, query, scoring);

    for (std::size_t i = 0; i < options.k_values.size(); ++i) {
      const int k = options.k_values[i];
      int relevant = 0;
      for (int p = 0; p < k && p < static_cast<int>(ranked.size()); ++p) {
        if (std::binary_search(users.begin(), users.end(), ranked[p].index)) ++relevant;
      }
      report.metric[i] += static_cast<double>(relevant) / static_cast<double>(k);
    }
    if (options.case_dump) {
      for (std::size_t p = 0; p < ranked.size(); ++p) {
        const int u = ranked[p].index;
        const Scenario scenario = classify_scenario(
            model.user_home[u], model.item_location[item], options.distance_km);
        *options.case_dump << model.item_tokens[item] << ',' << model.user_tokens[u]
                           << ',' << (p + 1) << ',' << to_string(scenario) << ','
                           << (std::binary_search(users.begin(), users.end(), u) ? 1 : 0)
                           << '\n';
      }
    }
  }

  if (report.evaluated > 0) {
    for (auto& value : report.metric) value /= static_cast<double>(report.evaluated);
  }
  return report;
}

std::string report_to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["task"] = report.task;
  j["scenario"] = report.scenario;
  j["distance_km"] = report.distance_km;
  nlohmann::ordered_json metrics = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < report.k_values.size(); ++i) {
    metrics.push_back({{"k", report.k_values[i]}, {"value", report.metric[i]}});
  }
  j["metrics"] = std::move(metrics);
  j["cases"] = {{"hometown", report.cases_hometown},
                {"outoftown", report.cases_outoftown},
                {"evaluated", report.evaluated}};
  j["skipped"] = {{"unknown_user", report.skipped_unknown_user},
                  {"unknown_item", report.skipped_unknown_item}};
  return j.dump(2);
}

std::string report_to_text(const EvalReport& report) {
  std::ostringstream out;
  const std::string name = report.task == "items" ? "Accuracy" : "Precision";
  out << "task: " << report.task << "  scenario: " << report.scenario
      << "  d: " << report.distance_km << " km\n";
  out << "cases: hometown " << report.cases_hometown << ", outoftown "
      << report.cases_outoftown << ", evaluated " << report.evaluated
      << ", skipped " << (report.skipped_unknown_user + report.skipped_unknown_item)
      << "\n";
  for (std::size_t i = 0; i < report.k_values.size(); ++i) {
    out << name << "@" << report.k_values[i] << " = ";
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.6f", report.metric[i]);
    out << buffer << "\n";
  }
  return out.str();
}

}  // namespace lsars
