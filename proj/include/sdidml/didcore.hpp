#pragma once

#include "sdidml/crossfit.hpp"
#include "sdidml/fixed_effects.hpp"
#include "sdidml/panel.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace sdidml {

enum class ControlRule { NeverTreated, NotYetTreated };

/// How the double difference combines cross-fitting folds.
///  PerFold: contrast within each fold (treated units against same-fold
///    controls, falling back to all controls when a fold has none) and
///    average with treated-count weights. Each fold's nuisance model then
///    cancels exactly inside its own contrast.
///  Pooled: one contrast over all treated and all control units.
/// The two coincide when K = 1.
enum class FoldPooling { PerFold, Pooled };

struct CellKey {
  int g = 0;  // cohort adoption time
  int t = 0;  // calendar period
  int event_time() const { return t - g; }
  friend auto operator<=>(const CellKey&, const CellKey&) = default;
};

struct CellEstimate {
  double tau = 0.0;
  int n_treated = 0;
  int n_control = 0;
  std::optional<double> se;
};

struct CellOmission {
  CellKey cell;
  std::string reason;  // NoControlPool, NoTreatedUnits, MissingBasePeriod, CollinearCell
};

struct FixedEffectsSolution {
  std::map<std::string, double> coefficients;
  int demeaning_iterations = 0;
  double demeaning_residual = 0.0;
  int dof = 0;
};

struct GroupTimeEffects {
  std::map<CellKey, CellEstimate> cells;
  ControlRule control_rule = ControlRule::NeverTreated;
  int anticipation = 0;
  std::vector<CellOmission> omitted;
  std::optional<FixedEffectsSolution> solver;  // set by the regression form

  std::string base_period_rule() const { return "g-1-" + std::to_string(anticipation); }
  bool is_post(const CellKey& c) const { return c.t >= c.g; }
};

std::string to_string(ControlRule rule);
ControlRule control_rule_from_string(const std::string& name);

struct ContrastOptions {
  ControlRule control_rule = ControlRule::NeverTreated;
  int anticipation = 0;
  FoldPooling pooling = FoldPooling::PerFold;
};

/// 2x2 contrasts on residualized outcomes against base period g-1-anticipation,
/// for every cohort g and every period t != base (t < g cells are placebos).
/// `include_unit`, when given, restricts both treated and control units.
/// Throws EmptyResult when no cell is estimable.
GroupTimeEffects estimate_group_time(const ResidualPanel& resid, const ContrastOptions& options = {},
                                     const std::vector<char>* include_unit = nullptr);

/// Regression form: y_tilde on d_tilde x 1[cell] for post cells and on 1[cell]
/// for pre-period cells other than the base period, with cohort and period
/// fixed effects absorbed by alternating projections.
GroupTimeEffects estimate_interacted_regression(const ResidualPanel& resid, const DemeanOptions& demean = {});

struct TwfeResult {
  double tau = 0.0;
  double se = 0.0;  // clustered by unit
  int sweeps = 0;
};

/// Static TWFE: raw Y on raw D with unit and period fixed effects.
TwfeResult twfe_baseline(const PanelDataset& panel, const DemeanOptions& demean = {});

struct SubgroupResult {
  std::optional<GroupTimeEffects> effects;
  std::optional<std::string> error;
};

/// estimate_group_time within each label's units. Per-subgroup failures are
/// recorded, not thrown; a unit without a label throws MissingSubgroupLabel.
std::map<std::string, SubgroupResult> subgroup_effects(const ResidualPanel& resid,
                                                       const std::map<UnitId, std::string>& subgroup_of_unit,
                                                       const ContrastOptions& options = {});

}  // namespace sdidml
