#pragma once

#include "sdidml/bootstrap.hpp"
#include "sdidml/diagnostics.hpp"
#include "sdidml/learners.hpp"
#include "sdidml/monte_carlo.hpp"
#include "sdidml/pipeline.hpp"
#include "sdidml/simulate.hpp"

#include <json.hpp>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace sdidml {

using Json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "0.1.0";

/// {"kind":"ridge","lambda":1.0}; kinds: mean, ridge, lasso,
/// gradient_boosted_trees, logistic. Absent fields take defaults; unknown
/// fields throw InvalidConfig.
Json to_json(const LearnerSpec& spec);
LearnerSpec learner_from_json(const Json& j);

Json to_json(const EffectSpec& effect);
EffectSpec effect_from_json(const Json& j);
Json to_json(const DGPConfig& config);
/// Starts from `base` (a scenario or defaults) and applies the given fields.
DGPConfig dgp_from_json(const Json& j, DGPConfig base = {});

Json to_json(const GroupTimeEffects& effects);
Json to_json(const AggregatedResults& results);
Json to_json(const PretrendReport& report);
Json to_json(const PlaceboReport& report);
Json to_json(const OverlapReport& report);
Json to_json(const DiagnosticsReport& report);
Json to_json(const OraclePanel& oracle, const DGPConfig& config);
Json to_json(const MonteCarloResult& result);
Json versions_json();

/// g,t,event_time,tau,n_treated,n_control
void write_group_time_csv(const GroupTimeEffects& effects, std::ostream& out);
/// e,att,ci_low,ci_high (empty cells where no CI exists)
void write_event_curve_csv(const AggregatedResults& results, std::ostream& out);

/// Missing optionals serialize as null; non-finite doubles as null too.
Json number_or_null(std::optional<double> v);

}  // namespace sdidml
