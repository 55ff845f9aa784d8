#include "sdidml/bootstrap.hpp"

#include "sdidml/error.hpp"
#include "sdidml/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace sdidml {

std::string to_string(BootstrapMode mode) { return mode == BootstrapMode::Full ? "full" : "fixed_nuisance"; }

BootstrapMode bootstrap_mode_from_string(const std::string& name) {
  if (name == "full" || name == "Full") return BootstrapMode::Full;
  if (name == "fixed_nuisance" || name == "FixedNuisance") return BootstrapMode::FixedNuisance;
  throw Error(ErrorCode::InvalidConfig, "unknown bootstrap mode '" + name + "'");
}

double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw Error(ErrorCode::EmptyResult, "quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

PanelDataset resample_units(const PanelDataset& panel, Rng& rng, std::vector<std::size_t>& origin) {
  const std::size_t n = panel.n_units();
  const std::size_t width = std::to_string(n).size();
  origin.resize(n);
  std::vector<PanelObservation> rows;
  rows.reserve(panel.n_obs());
  for (std::size_t j = 0; j < n; ++j) {
    origin[j] = static_cast<std::size_t>(rng.below(n));
    std::string id = std::to_string(j);
    id = "b" + std::string(width - id.size(), '0') + id;
    const auto [first, last] = panel.unit_rows(origin[j]);
    for (std::size_t k = first; k < last; ++k) {
      rows.push_back(panel.observation(k));
      rows.back().unit = id;
    }
  }
  return build_panel(std::move(rows), panel.covariate_names());
}

namespace {

struct Replicate {
  std::map<std::string, double> values;
  double min_weight = 1.0;
  double sum_error = 0.0;
  std::optional<std::string> error;
};

Replicate run_replicate(const PipelineResult& point, const PipelineConfig& config, const BootstrapOptions& options,
                        int r) {
  Replicate out;
  try {
    const auto seed = derive_seed(options.seed, static_cast<std::uint64_t>(r));
    Rng rng(seed);
    std::vector<std::size_t> origin;
    auto panel = std::make_shared<const PanelDataset>(resample_units(*point.panel, rng, origin));
    GroupTimeEffects effects;
    AggregatedResults agg;
    if (options.mode == BootstrapMode::Full) {
      PipelineConfig c = config;
      c.seed = seed;
      c.threads = 1;
      PipelineResult res = run_pipeline(panel, c);
      effects = std::move(res.effects);
      agg = std::move(res.aggregated);
    } else {
      const NuisanceFits& base = *point.fits;
      NuisanceFits fits = base;
      fits.g_hat.resize(static_cast<Eigen::Index>(panel->n_obs()));
      fits.m_hat.resize(static_cast<Eigen::Index>(panel->n_obs()));
      fits.folds.fold_of_unit.resize(panel->n_units());
      for (std::size_t j = 0; j < panel->n_units(); ++j) {
        const auto [first, last] = panel->unit_rows(j);
        const auto src = point.panel->unit_rows(origin[j]).first;
        for (std::size_t k = first; k < last; ++k) {
          const auto from = static_cast<Eigen::Index>(src + (k - first));
          fits.g_hat(static_cast<Eigen::Index>(k)) = base.g_hat(from);
          fits.m_hat(static_cast<Eigen::Index>(k)) = base.m_hat(from);
        }
        fits.folds.fold_of_unit[j] = base.folds.fold_of_unit[origin[j]];
      }
      const ResidualPanel resid = residualize(panel, std::make_shared<const NuisanceFits>(std::move(fits)));
      effects = estimate_cells(resid, config);
      agg = aggregate(effects, config.ci_level);
    }
    out.values = flatten(agg, effects);
    out.min_weight = agg.min_weight;
    out.sum_error = agg.max_weight_sum_error;
  } catch (const Error& e) {
    out.error = e.what();
  }
  return out;
}

}  // namespace

BootstrapResult bootstrap(const PipelineResult& point, const PipelineConfig& config, const BootstrapOptions& options) {
  if (options.replicates < 1) throw Error(ErrorCode::InvalidConfig, "bootstrap needs B >= 1");
  const auto b = static_cast<std::size_t>(options.replicates);
  std::vector<Replicate> reps(b);
  parallel_for(b, options.threads,
               [&](std::size_t r) { reps[r] = run_replicate(point, config, options, static_cast<int>(r)); });

  BootstrapResult out;
  out.mode = options.mode;
  out.replicates = options.replicates;
  std::map<std::string, std::vector<double>> draws;
  for (std::size_t r = 0; r < b; ++r) {
    if (reps[r].error) {
      out.failed.push_back(static_cast<int>(r));
      if (!out.first_failure) out.first_failure = "replicate " + std::to_string(r) + ": " + *reps[r].error;
      continue;
    }
    out.min_weight = std::min(out.min_weight, reps[r].min_weight);
    out.max_weight_sum_error = std::max(out.max_weight_sum_error, reps[r].sum_error);
    for (const auto& [name, v] : reps[r].values) draws[name].push_back(v);
  }
  if (out.failed.size() * 5 > b)
    throw Error(ErrorCode::BootstrapFailure, std::to_string(out.failed.size()) + " of " + std::to_string(b) +
                                                 " replicates failed; " + out.first_failure.value_or(""));

  const double alpha = 1.0 - config.ci_level;
  for (auto& [name, values] : draws) {
    BootstrapSummary s;
    s.n = static_cast<int>(values.size());
    if (values.size() >= 2) {
      double mean = 0.0;
      for (double v : values) mean += v;
      mean /= static_cast<double>(values.size());
      double ss = 0.0;
      for (double v : values) ss += (v - mean) * (v - mean);
      s.se = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    std::sort(values.begin(), values.end());
    s.ci_low = quantile_sorted(values, alpha / 2.0);
    s.ci_high = quantile_sorted(values, 1.0 - alpha / 2.0);
    out.quantities[name] = s;
  }
  return out;
}

void attach_bootstrap(const BootstrapResult& boot, AggregatedResults& results, GroupTimeEffects& effects) {
  auto apply = [&](const std::string& name, Estimate& est) {
    const auto it = boot.quantities.find(name);
    if (it == boot.quantities.end()) return;
    est.se = it->second.se;
    est.ci_low = it->second.ci_low;
    est.ci_high = it->second.ci_high;
  };
  apply("overall", results.overall);
  for (auto& [e, est] : results.event_curve) apply(event_key(e), est);
  for (auto& [g, est] : results.group_atts) apply(group_key(g), est);
  for (auto& [key, cell] : effects.cells) {
    const auto it = boot.quantities.find(cell_key(key));
    if (it != boot.quantities.end()) cell.se = it->second.se;
  }
}

}  // namespace sdidml
