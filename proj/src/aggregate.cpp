#include "sdidml/aggregate.hpp"

#include "sdidml/error.hpp"

#include <algorithm>
#include <cmath>

namespace sdidml {

std::string to_string(AggregationScheme scheme) {
  switch (scheme) {
    case AggregationScheme::Overall: return "overall";
    case AggregationScheme::EventTime: return "event_time";
    case AggregationScheme::ByGroup: return "by_group";
  }
  return "overall";
}

AggregationScheme aggregation_scheme_from_string(const std::string& name) {
  if (name == "overall" || name == "Overall") return AggregationScheme::Overall;
  if (name == "event_time" || name == "EventTime") return AggregationScheme::EventTime;
  if (name == "by_group" || name == "ByGroup") return AggregationScheme::ByGroup;
  throw Error(ErrorCode::InvalidConfig, "unknown aggregation scheme '" + name + "'");
}

std::string event_key(int e) { return "e:" + std::to_string(e); }
std::string group_key(int g) { return "g:" + std::to_string(g); }
std::string cell_key(const CellKey& cell) { return "cell:" + std::to_string(cell.g) + ":" + std::to_string(cell.t); }

namespace {

struct WeightedMean {
  std::vector<std::pair<CellKey, const CellEstimate*>> cells;

  double total() const {
    double n = 0.0;
    for (const auto& c : cells) n += c.second->n_treated;
    return n;
  }
};

double finish(const WeightedMean& group, AggregatedResults& out, std::map<CellKey, double>* weights) {
  const double total = group.total();
  double value = 0.0;
  double sum = 0.0;
  for (const auto& [key, cell] : group.cells) {
    const double w = cell->n_treated / total;
    out.min_weight = std::min(out.min_weight, w);
    sum += w;
    value += w * cell->tau;
    if (weights) (*weights)[key] = w;
  }
  out.max_weight_sum_error = std::max(out.max_weight_sum_error, std::abs(sum - 1.0));
  return value;
}

}  // namespace

AggregatedResults aggregate(const GroupTimeEffects& effects, double ci_level) {
  if (!(ci_level > 0.0 && ci_level < 1.0)) throw Error(ErrorCode::InvalidConfig, "ci_level must be in (0, 1)");
  WeightedMean overall;
  std::map<int, WeightedMean> by_event, by_group;
  for (const auto& [key, cell] : effects.cells) {
    by_event[key.event_time()].cells.emplace_back(key, &cell);
    if (!effects.is_post(key)) continue;
    overall.cells.emplace_back(key, &cell);
    by_group[key.g].cells.emplace_back(key, &cell);
  }
  if (overall.cells.empty()) throw Error(ErrorCode::EmptyResult, "no post-treatment cell to aggregate");

  AggregatedResults out;
  out.ci_level = ci_level;
  out.min_weight = 1.0;
  out.overall.att = finish(overall, out, &out.weights_used);
  for (const auto& [e, group] : by_event) out.event_curve[e].att = finish(group, out, nullptr);
  for (const auto& [g, group] : by_group) out.group_atts[g].att = finish(group, out, nullptr);
  return out;
}

std::map<std::string, double> flatten(const AggregatedResults& results, const GroupTimeEffects& effects) {
  std::map<std::string, double> out;
  out["overall"] = results.overall.att;
  for (const auto& [e, est] : results.event_curve) out[event_key(e)] = est.att;
  for (const auto& [g, est] : results.group_atts) out[group_key(g)] = est.att;
  for (const auto& [key, cell] : effects.cells) out[cell_key(key)] = cell.tau;
  return out;
}

}  // namespace sdidml
