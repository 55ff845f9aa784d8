#pragma once

#include "sdidml/didcore.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sdidml {

enum class AggregationScheme { Overall, EventTime, ByGroup };

std::string to_string(AggregationScheme scheme);
AggregationScheme aggregation_scheme_from_string(const std::string& name);

/// A point estimate with optional bootstrap inference attached later.
struct Estimate {
  double att = 0.0;
  std::optional<double> se;
  std::optional<double> ci_low;
  std::optional<double> ci_high;
};

struct AggregatedResults {
  Estimate overall;
  std::map<int, Estimate> event_curve;  // pre-period e come from placebo cells
  std::map<int, Estimate> group_atts;   // post cells only
  std::map<CellKey, double> weights_used;  // overall weights over post cells
  double ci_level = 0.95;
  /// Smallest weight and largest |sum - 1| over every weighted mean formed
  /// (overall, each event time, each group).
  double min_weight = 0.0;
  double max_weight_sum_error = 0.0;
};

/// Every scheme is computed; weights are proportional to n_treated.
/// Throws EmptyResult when there is no post-treatment cell.
AggregatedResults aggregate(const GroupTimeEffects& effects, double ci_level = 0.95);

/// Flat view of every reported number: "overall", "e:<e>", "g:<g>", "cell:<g>:<t>".
std::map<std::string, double> flatten(const AggregatedResults& results, const GroupTimeEffects& effects);

std::string event_key(int e);
std::string group_key(int g);
std::string cell_key(const CellKey& cell);

}  // namespace sdidml
