#include "sdidml/serialization.hpp"

#include "sdidml/error.hpp"
#include "sdidml/panel_io.hpp"
#include "sdidml/rng.hpp"

#include <Eigen/Core>

#include <cmath>
#include <ostream>
#include <set>

namespace sdidml {

Json number_or_null(std::optional<double> v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

namespace {

void check_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, where + " must be a JSON object");
  for (const auto& item : j.items())
    if (!allowed.count(item.key()))
      throw Error(ErrorCode::InvalidConfig, "unknown field '" + item.key() + "' in " + where);
}

template <class T>
void read(const Json& j, const char* key, T& into) {
  const auto it = j.find(key);
  if (it == j.end()) return;
  try {
    into = it->template get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::InvalidConfig, std::string("field '") + key + "' has the wrong type");
  }
}

}  // namespace

Json to_json(const LearnerSpec& spec) {
  return std::visit(
      [](const auto& s) -> Json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, MeanSpec>) {
          return {{"kind", "mean"}};
        } else if constexpr (std::is_same_v<T, RidgeSpec>) {
          return {{"kind", "ridge"}, {"lambda", s.lambda}};
        } else if constexpr (std::is_same_v<T, LassoSpec>) {
          return {{"kind", "lasso"}, {"lambda", s.lambda}, {"max_iter", s.max_iter}, {"tol", s.tol}};
        } else if constexpr (std::is_same_v<T, GradientBoostedTreesSpec>) {
          return {{"kind", "gradient_boosted_trees"}, {"n_trees", s.n_trees},         {"max_depth", s.max_depth},
                  {"learning_rate", s.learning_rate},  {"min_leaf", s.min_leaf},     {"subsample", s.subsample}};
        } else {
          return {{"kind", "logistic"}, {"lambda", s.lambda}, {"max_iter", s.max_iter}, {"tol", s.tol}};
        }
      },
      spec);
}

LearnerSpec learner_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
    throw Error(ErrorCode::InvalidConfig, "learner spec needs a string 'kind'");
  const std::string kind = j["kind"];
  LearnerSpec out;
  if (kind == "mean") {
    check_keys(j, {"kind"}, "mean learner");
    out = MeanSpec{};
  } else if (kind == "ridge") {
    check_keys(j, {"kind", "lambda"}, "ridge learner");
    RidgeSpec s;
    read(j, "lambda", s.lambda);
    out = s;
  } else if (kind == "lasso") {
    check_keys(j, {"kind", "lambda", "max_iter", "tol"}, "lasso learner");
    LassoSpec s;
    read(j, "lambda", s.lambda);
    read(j, "max_iter", s.max_iter);
    read(j, "tol", s.tol);
    out = s;
  } else if (kind == "gradient_boosted_trees" || kind == "gbt") {
    check_keys(j, {"kind", "n_trees", "max_depth", "learning_rate", "min_leaf", "subsample"}, "boosted-trees learner");
    GradientBoostedTreesSpec s;
    read(j, "n_trees", s.n_trees);
    read(j, "max_depth", s.max_depth);
    read(j, "learning_rate", s.learning_rate);
    read(j, "min_leaf", s.min_leaf);
    read(j, "subsample", s.subsample);
    out = s;
  } else if (kind == "logistic") {
    check_keys(j, {"kind", "lambda", "max_iter", "tol"}, "logistic learner");
    LogisticSpec s;
    read(j, "lambda", s.lambda);
    read(j, "max_iter", s.max_iter);
    read(j, "tol", s.tol);
    out = s;
  } else {
    throw Error(ErrorCode::InvalidConfig, "unknown learner kind '" + kind + "'");
  }
  try {
    validate(out);
  } catch (const Error& e) {
    throw Error(ErrorCode::InvalidConfig, e.what());
  }
  return out;
}

Json to_json(const EffectSpec& effect) {
  return std::visit(
      [](const auto& s) -> Json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, NullEffect>) {
          return {{"kind", "null"}};
        } else if constexpr (std::is_same_v<T, HomogeneousEffect>) {
          return {{"kind", "homogeneous"}, {"tau", s.tau}};
        } else if constexpr (std::is_same_v<T, DynamicEffect>) {
          return {{"kind", "dynamic"}, {"effects", s.effects}};
        } else {
          return {{"kind", "subgroup_split"}, {"tau_a", s.tau_a}, {"tau_b", s.tau_b}};
        }
      },
      effect);
}

EffectSpec effect_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
    throw Error(ErrorCode::InvalidConfig, "effect needs a string 'kind'");
  const std::string kind = j["kind"];
  if (kind == "null") {
    check_keys(j, {"kind"}, "effect");
    return NullEffect{};
  }
  if (kind == "homogeneous") {
    check_keys(j, {"kind", "tau"}, "effect");
    HomogeneousEffect e;
    read(j, "tau", e.tau);
    return e;
  }
  if (kind == "dynamic") {
    check_keys(j, {"kind", "effects"}, "effect");
    DynamicEffect e;
    read(j, "effects", e.effects);
    return e;
  }
  if (kind == "subgroup_split") {
    check_keys(j, {"kind", "tau_a", "tau_b"}, "effect");
    SubgroupSplitEffect e;
    read(j, "tau_a", e.tau_a);
    read(j, "tau_b", e.tau_b);
    return e;
  }
  throw Error(ErrorCode::InvalidConfig, "unknown effect kind '" + kind + "'");
}

Json to_json(const DGPConfig& c) {
  return {{"n_units", c.n_units},
          {"n_periods", c.n_periods},
          {"p", c.p},
          {"cohort_times", c.cohort_times},
          {"cohort_shares", c.cohort_shares},
          {"never_treated_share", c.never_treated_share},
          {"selection_strength", c.selection_strength},
          {"confounding", to_string(c.confounding)},
          {"effect", to_json(c.effect)},
          {"noise_sd", c.noise_sd},
          {"trend_violation", c.trend_violation},
          {"drift_confounding", c.drift_confounding},
          {"ar_rho", c.ar_rho},
          {"n_time_varying", c.n_time_varying},
          {"seed", c.seed}};
}

DGPConfig dgp_from_json(const Json& j, DGPConfig c) {
  check_keys(j,
             {"scenario", "n_units", "n_periods", "p", "cohort_times", "cohort_shares", "never_treated_share",
              "selection_strength", "confounding", "effect", "noise_sd", "trend_violation", "drift_confounding",
              "ar_rho", "n_time_varying", "seed"},
             "DGP config");
  if (j.contains("scenario")) c = scenario(j["scenario"].get<std::string>());
  read(j, "n_units", c.n_units);
  read(j, "n_periods", c.n_periods);
  read(j, "p", c.p);
  read(j, "cohort_times", c.cohort_times);
  read(j, "cohort_shares", c.cohort_shares);
  read(j, "never_treated_share", c.never_treated_share);
  read(j, "selection_strength", c.selection_strength);
  if (j.contains("confounding")) c.confounding = confounding_from_string(j["confounding"].get<std::string>());
  if (j.contains("effect")) c.effect = effect_from_json(j["effect"]);
  read(j, "noise_sd", c.noise_sd);
  read(j, "trend_violation", c.trend_violation);
  read(j, "drift_confounding", c.drift_confounding);
  read(j, "ar_rho", c.ar_rho);
  read(j, "n_time_varying", c.n_time_varying);
  read(j, "seed", c.seed);
  validate(c);
  return c;
}

Json to_json(const GroupTimeEffects& effects) {
  Json cells = Json::array();
  for (const auto& [key, cell] : effects.cells)
    cells.push_back({{"g", key.g},
                     {"t", key.t},
                     {"event_time", key.event_time()},
                     {"tau", cell.tau},
                     {"se", number_or_null(cell.se)},
                     {"n_treated", cell.n_treated},
                     {"n_control", cell.n_control}});
  Json omitted = Json::array();
  for (const auto& o : effects.omitted) omitted.push_back({{"g", o.cell.g}, {"t", o.cell.t}, {"reason", o.reason}});
  Json out = {{"control_rule", to_string(effects.control_rule)},
              {"anticipation", effects.anticipation},
              {"base_period_rule", effects.base_period_rule()},
              {"cells", cells},
              {"omitted", omitted}};
  if (effects.solver) {
    out["solver"] = {{"coefficients", effects.solver->coefficients},
                     {"demeaning_iterations", effects.solver->demeaning_iterations},
                     {"demeaning_residual", effects.solver->demeaning_residual},
                     {"dof", effects.solver->dof}};
  }
  return out;
}

namespace {

Json estimate_json(const Estimate& e) {
  return {{"att", e.att}, {"se", number_or_null(e.se)}, {"ci_low", number_or_null(e.ci_low)},
          {"ci_high", number_or_null(e.ci_high)}};
}

}  // namespace

Json to_json(const AggregatedResults& r) {
  Json curve = Json::array();
  for (const auto& [e, est] : r.event_curve) {
    Json row = {{"e", e}};
    row.update(estimate_json(est));
    curve.push_back(row);
  }
  Json groups = Json::array();
  for (const auto& [g, est] : r.group_atts) {
    Json row = {{"g", g}};
    row.update(estimate_json(est));
    groups.push_back(row);
  }
  Json weights = Json::array();
  for (const auto& [key, w] : r.weights_used) weights.push_back({{"g", key.g}, {"t", key.t}, {"weight", w}});
  Json overall = estimate_json(r.overall);
  overall["ci_level"] = r.ci_level;
  return {{"overall", overall}, {"event_curve", curve}, {"groups", groups}, {"weights", weights}};
}

Json to_json(const PretrendReport& r) {
  Json terms = Json::array();
  for (const auto& t : r.per_e)
    terms.push_back({{"e", t.event_time}, {"att", t.att}, {"se", t.se}, {"z", number_or_null(t.z)}});
  return {{"statistic", number_or_null(r.statistic)}, {"dof", r.dof},          {"p_value", r.p_value},
          {"per_e", terms},                           {"skipped_e", r.skipped}, {"approximate", r.approximate}};
}

Json to_json(const PlaceboReport& r) {
  return {{"shift", r.shift},
          {"pseudo_att", r.pseudo_att},
          {"se", number_or_null(r.se)},
          {"ci", {number_or_null(r.ci_low), number_or_null(r.ci_high)}},
          {"n_obs", r.n_obs}};
}

Json to_json(const OverlapReport& r) {
  return {{"histogram", r.histogram}, {"bins", OverlapReport::kBins}, {"min", r.min},
          {"max", r.max},             {"n", r.n},                      {"n_clipped", r.n_clipped},
          {"share_outside", r.share_outside}, {"weak_overlap", r.weak_overlap}};
}

Json to_json(const DiagnosticsReport& d) {
  Json out;
  out["pretrend"] = d.pretrend ? to_json(*d.pretrend) : Json(nullptr);
  if (d.pretrend_error) out["pretrend_error"] = *d.pretrend_error;
  out["placebo"] = d.placebo ? to_json(*d.placebo) : Json(nullptr);
  if (d.placebo_error) out["placebo_error"] = *d.placebo_error;
  out["overlap"] = to_json(d.overlap);
  out["warnings"] = d.warnings;
  return out;
}

Json to_json(const OraclePanel& oracle, const DGPConfig& config) {
  Json cells = Json::array();
  for (const auto& [key, att] : oracle.true_att)
    cells.push_back({{"g", key.g}, {"t", key.t}, {"att", att}, {"n_treated", oracle.cell_counts.at(key)}});
  Json curve = Json::array();
  for (const auto& [e, att] : oracle.true_event_curve) curve.push_back({{"e", e}, {"att", att}});
  return {{"config", to_json(config)},
          {"true_overall_att", oracle.true_overall_att},
          {"true_att", cells},
          {"true_event_curve", curve},
          {"versions", versions_json()}};
}

Json to_json(const MonteCarloResult& r) {
  Json summary = Json::object();
  for (const auto& [m, s] : r.summary)
    summary[to_string(m)] = {{"mean_estimate", s.mean_estimate},
                             {"bias", s.bias},
                             {"rmse", s.rmse},
                             {"coverage", number_or_null(s.coverage)},
                             {"n_intervals", s.n_intervals}};
  Json records = Json::array();
  for (const auto& rec : r.records) {
    Json methods = Json::object();
    for (const auto& [m, mr] : rec.methods)
      methods[to_string(m)] = {
          {"estimate", mr.estimate}, {"ci_low", number_or_null(mr.ci_low)}, {"ci_high", number_or_null(mr.ci_high)}};
    records.push_back({{"rep", rec.rep},
                       {"seed", rec.seed},
                       {"truth", rec.truth},
                       {"methods", methods},
                       {"pretrend_p", number_or_null(rec.pretrend_p)},
                       {"placebo_att", number_or_null(rec.placebo_att)},
                       {"min_weight", rec.min_weight},
                       {"max_weight_sum_error", rec.max_weight_sum_error}});
  }
  return {{"summary", summary},
          {"min_weight", r.min_weight},
          {"max_weight_sum_error", r.max_weight_sum_error},
          {"records", records}};
}

Json versions_json() {
  return {{"sdidml", kVersion},
          {"rng", std::string(Rng::kName)},
          {"rng_version", std::string(Rng::kVersion)},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)}};
}

void write_group_time_csv(const GroupTimeEffects& effects, std::ostream& out) {
  out << "g,t,event_time,tau,n_treated,n_control\n";
  for (const auto& [key, cell] : effects.cells)
    out << key.g << ',' << key.t << ',' << key.event_time() << ',' << format_double(cell.tau) << ','
        << cell.n_treated << ',' << cell.n_control << '\n';
}

void write_event_curve_csv(const AggregatedResults& results, std::ostream& out) {
  out << "e,att,ci_low,ci_high\n";
  for (const auto& [e, est] : results.event_curve)
    out << e << ',' << format_double(est.att) << ',' << (est.ci_low ? format_double(*est.ci_low) : "") << ','
        << (est.ci_high ? format_double(*est.ci_high) : "") << '\n';
}

}  // namespace sdidml
