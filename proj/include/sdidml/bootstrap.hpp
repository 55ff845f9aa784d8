#pragma once

#include "sdidml/pipeline.hpp"
#include "sdidml/rng.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sdidml {

enum class BootstrapMode { Full, FixedNuisance };

std::string to_string(BootstrapMode mode);
BootstrapMode bootstrap_mode_from_string(const std::string& name);

struct BootstrapOptions {
  int replicates = 199;
  BootstrapMode mode = BootstrapMode::Full;
  std::uint64_t seed = 0;  // replicate r uses seed + r
  int threads = 1;
};

struct BootstrapSummary {
  std::optional<double> se;  // absent with fewer than two replicates
  double ci_low = 0.0;
  double ci_high = 0.0;
  int n = 0;  // replicates in which the quantity was estimable
};

struct BootstrapResult {
  BootstrapMode mode = BootstrapMode::Full;
  int replicates = 0;
  std::vector<int> failed;  // replicate indices
  std::optional<std::string> first_failure;
  std::map<std::string, BootstrapSummary> quantities;  // keyed like flatten()
  double min_weight = 1.0;
  double max_weight_sum_error = 0.0;
};

/// Draws n units with replacement. Draw j becomes a fresh unit whose id
/// sorts in draw order; origin[j] is the source unit index.
PanelDataset resample_units(const PanelDataset& panel, Rng& rng, std::vector<std::size_t>& origin);

/// Unit-level cluster bootstrap around a point estimate. Full mode reruns
/// crossfitting with pipeline seed = options.seed + r; FixedNuisance reuses
/// point.fits by source unit. Throws BootstrapFailure when more than 20% of
/// replicates fail.
BootstrapResult bootstrap(const PipelineResult& point, const PipelineConfig& config, const BootstrapOptions& options);

/// Copies SEs and percentile CIs onto the aggregated results and cells.
void attach_bootstrap(const BootstrapResult& boot, AggregatedResults& results, GroupTimeEffects& effects);

/// Type-7 sample quantile of already sorted values.
double quantile_sorted(const std::vector<double>& sorted, double p);

}  // namespace sdidml
