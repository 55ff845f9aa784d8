#pragma once

#include "sdidml/bootstrap.hpp"
#include "sdidml/crossfit.hpp"
#include "sdidml/didcore.hpp"
#include "sdidml/pipeline.hpp"

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sdidml {

struct PretrendTerm {
  int event_time = 0;
  double att = 0.0;
  double se = 0.0;
  double z = 0.0;
};

struct PretrendReport {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
  std::vector<PretrendTerm> per_e;
  std::vector<int> skipped;  // pre event times without a usable SE
  bool approximate = true;   // chi-square reference with estimated SEs
};

/// Wald statistic sum_e (att_e / se_e)^2 over event times e < -anticipation,
/// att_e the n_treated-weighted mean of the pre cells at e. dof is the number
/// of event times used. Throws NoPreCells when none is usable.
PretrendReport pretrend_test(const GroupTimeEffects& effects, const std::map<int, double>& se_by_event);

/// Event-time SEs from a bootstrap, keyed by e.
std::map<int, double> event_time_ses(const BootstrapResult& boot);

struct PlaceboReport {
  int shift = 1;
  double pseudo_att = 0.0;
  std::optional<double> se;
  std::optional<double> ci_low;
  std::optional<double> ci_high;
  std::size_t n_obs = 0;

  bool covers_zero() const { return ci_low && ci_high && *ci_low <= 0.0 && 0.0 <= *ci_high; }
};

/// Treated units keep only periods t < g and are reassigned adoption time
/// g - shift; never-treated units keep every period. Throws
/// InsufficientPrePeriods when some cohort would lack a base period.
PanelDataset placebo_panel(const PanelDataset& panel, int shift, int anticipation = 0);

/// Full pipeline rerun on placebo_panel; the CI comes from `boot` if given.
PlaceboReport placebo_test(const PanelDataset& panel, const PipelineConfig& config, int shift,
                           const std::optional<BootstrapOptions>& boot = std::nullopt);

struct OverlapReport {
  static constexpr int kBins = 20;
  std::array<int, kBins> histogram{};  // bin b covers [b/20, (b+1)/20), last bin closed
  double min = 0.0;
  double max = 0.0;
  int n = 0;
  int n_clipped = 0;
  double share_outside = 0.0;  // share of m_hat outside [0.05, 0.95]
  bool weak_overlap = false;   // n_clipped > 0.1 n
};

OverlapReport overlap_report(const NuisanceFits& fits);

struct DiagnosticsReport {
  std::optional<PretrendReport> pretrend;
  std::optional<std::string> pretrend_error;
  std::optional<PlaceboReport> placebo;
  std::optional<std::string> placebo_error;
  OverlapReport overlap;
  std::vector<std::string> warnings;
};

}  // namespace sdidml
