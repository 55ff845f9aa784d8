#pragma once

#include "sdidml/didcore.hpp"
#include "sdidml/panel.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace sdidml {

enum class Confounding { None, Linear, SparseNonlinear };

struct NullEffect {
  friend bool operator==(const NullEffect&, const NullEffect&) = default;
};
struct HomogeneousEffect {
  double tau = 1.0;
  friend bool operator==(const HomogeneousEffect&, const HomogeneousEffect&) = default;
};
/// effects[e] at event time e; later event times reuse the last entry.
struct DynamicEffect {
  std::vector<double> effects;
  friend bool operator==(const DynamicEffect&, const DynamicEffect&) = default;
};
/// tau_a for units whose last covariate is >= 0 (label "a"), tau_b otherwise.
struct SubgroupSplitEffect {
  double tau_a = 1.0;
  double tau_b = 3.0;
  friend bool operator==(const SubgroupSplitEffect&, const SubgroupSplitEffect&) = default;
};

using EffectSpec = std::variant<NullEffect, HomogeneousEffect, DynamicEffect, SubgroupSplitEffect>;

/// Periods are 1..n_periods. A unit is ever treated with probability
/// sigmoid(logit(1 - never_treated_share) + selection_strength * s_i), where
/// s_i = (z1 + z2 + z3)/sqrt(3); treated units pick a cohort in proportion
/// to cohort_shares.
///
/// The first n_time_varying covariates move over time:
///   x_itj = z_ij + u_itj + drift_confounding * s_i * (t - 1)/(T - 1),
/// with u an AR(1) (coefficient ar_rho) started at 0 whose innovations have
/// sd noise_sd * sqrt(1 - ar_rho^2).
///
///   Y0 = f(x_it) + alpha_i + lambda_t + trend_violation * (t - 1) * 1[ever treated] + noise_sd * eps
///   alpha_i = 0.5 z_i1 + noise_sd * nu_i,  lambda_t = 0.1 (t - 1) + 0.5 sin(t)
///   Linear:          f = sum_{j <= 10} x_j / j
///   SparseNonlinear: f = x1 x2 + 1.5 * 1[x3 > 0] + x4 + 0.5 max(x5, 0) x1
struct DGPConfig {
  int n_units = 200;
  int n_periods = 8;
  int p = 20;
  std::vector<int> cohort_times{3, 5, 7};
  std::vector<double> cohort_shares{0.2, 0.2, 0.2};
  double never_treated_share = 0.4;
  double selection_strength = 1.0;
  Confounding confounding = Confounding::Linear;
  EffectSpec effect = HomogeneousEffect{1.0};
  double noise_sd = 1.0;
  double trend_violation = 0.0;
  double drift_confounding = 0.0;
  double ar_rho = 0.5;
  int n_time_varying = 5;
  std::uint64_t seed = 0;
};

/// Throws InvalidConfig.
void validate(const DGPConfig& config);

struct OraclePanel {
  PanelDataset panel;
  std::map<CellKey, double> true_att;  // post cells (t >= g)
  std::map<CellKey, int> cell_counts;
  double true_overall_att = 0.0;       // mean over all treated observations
  std::map<int, double> true_event_curve;
  std::map<UnitId, std::string> subgroup;  // "a" / "b" by sign of the last covariate
};

OraclePanel generate(const DGPConfig& config);

std::string to_string(Confounding c);
Confounding confounding_from_string(const std::string& name);

/// Names accepted by scenario(): S1_homogeneous, S2_dynamic_heterogeneous,
/// S3_highdim_nonlinear, S4_null, S5_pretrend_violation (or just S1..S5).
const std::vector<std::string>& scenario_names();
DGPConfig scenario(const std::string& name);

}  // namespace sdidml
