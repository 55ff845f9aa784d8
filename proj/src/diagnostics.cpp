#include "sdidml/diagnostics.hpp"

#include "sdidml/error.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace sdidml {

PretrendReport pretrend_test(const GroupTimeEffects& effects, const std::map<int, double>& se_by_event) {
  std::map<int, std::pair<double, double>> sums;  // e -> (sum n*tau, sum n)
  for (const auto& [key, cell] : effects.cells) {
    const int e = key.event_time();
    if (e >= -effects.anticipation || effects.is_post(key)) continue;
    auto& s = sums[e];
    s.first += cell.n_treated * cell.tau;
    s.second += cell.n_treated;
  }
  PretrendReport out;
  for (const auto& [e, s] : sums) {
    const double att = s.first / s.second;
    const auto it = se_by_event.find(e);
    if (it == se_by_event.end() || !std::isfinite(it->second) || it->second < 0.0) {
      out.skipped.push_back(e);
      continue;
    }
    PretrendTerm term{e, att, it->second, 0.0};
    if (term.se > 0.0)
      term.z = att / term.se;
    else
      term.z = att == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    out.statistic += term.z * term.z;
    out.per_e.push_back(term);
  }
  if (out.per_e.empty()) throw Error(ErrorCode::NoPreCells, "no pre-treatment event time with a standard error");
  out.dof = static_cast<int>(out.per_e.size());
  out.p_value = std::isfinite(out.statistic) ? boost::math::gamma_q(out.dof / 2.0, out.statistic / 2.0) : 0.0;
  return out;
}

std::map<int, double> event_time_ses(const BootstrapResult& boot) {
  std::map<int, double> out;
  for (const auto& [name, s] : boot.quantities) {
    if (name.rfind("e:", 0) != 0 || !s.se) continue;
    out[std::stoi(name.substr(2))] = *s.se;
  }
  return out;
}

PanelDataset placebo_panel(const PanelDataset& panel, int shift, int anticipation) {
  if (shift < 1) throw Error(ErrorCode::InvalidConfig, "placebo shift must be >= 1");
  const int first_period = panel.periods().front();
  std::vector<PanelObservation> rows;
  for (std::size_t i = 0; i < panel.n_units(); ++i) {
    const Cohort& c = panel.cohort_of_unit(i);
    if (!c.is_never_treated() && c.time() - shift - 1 - anticipation < first_period)
      throw Error(ErrorCode::InsufficientPrePeriods,
                  "cohort " + std::to_string(c.time()) + " has too few pre-treatment periods for shift " +
                      std::to_string(shift));
    const auto [first, last] = panel.unit_rows(i);
    for (std::size_t k = first; k < last; ++k) {
      PanelObservation obs = panel.observation(k);
      if (!c.is_never_treated()) {
        if (obs.time >= c.time()) continue;
        obs.treatment = obs.time >= c.time() - shift ? 1 : 0;
      }
      rows.push_back(std::move(obs));
    }
  }
  return build_panel(std::move(rows), panel.covariate_names());
}

PlaceboReport placebo_test(const PanelDataset& panel, const PipelineConfig& config, int shift,
                           const std::optional<BootstrapOptions>& boot) {
  auto pseudo = std::make_shared<const PanelDataset>(placebo_panel(panel, shift, config.contrast.anticipation));
  const PipelineResult res = run_pipeline(pseudo, config);
  PlaceboReport out;
  out.shift = shift;
  out.pseudo_att = res.aggregated.overall.att;
  out.n_obs = pseudo->n_obs();
  if (boot) {
    const BootstrapResult b = bootstrap(res, config, *boot);
    const auto it = b.quantities.find("overall");
    if (it != b.quantities.end()) {
      out.se = it->second.se;
      out.ci_low = it->second.ci_low;
      out.ci_high = it->second.ci_high;
    }
  }
  return out;
}

OverlapReport overlap_report(const NuisanceFits& fits) {
  OverlapReport out;
  const Eigen::VectorXd& m = fits.m_hat;
  out.n = static_cast<int>(m.size());
  out.n_clipped = fits.n_clipped;
  if (m.size() == 0) return out;
  out.min = m.minCoeff();
  out.max = m.maxCoeff();
  int outside = 0;
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const double v = m(i);
    const int bin = std::clamp(static_cast<int>(std::floor(v * OverlapReport::kBins)), 0, OverlapReport::kBins - 1);
    ++out.histogram[static_cast<std::size_t>(bin)];
    if (v < 0.05 || v > 0.95) ++outside;
  }
  out.share_outside = static_cast<double>(outside) / out.n;
  out.weak_overlap = out.n_clipped > 0.1 * out.n;
  return out;
}

}  // namespace sdidml
