#include "sdidml/simulate.hpp"

#include "sdidml/error.hpp"
#include "sdidml/rng.hpp"

#include <algorithm>
#include <cmath>

namespace sdidml {

std::string to_string(Confounding c) {
  switch (c) {
    case Confounding::None: return "none";
    case Confounding::Linear: return "linear";
    case Confounding::SparseNonlinear: return "sparse_nonlinear";
  }
  return "none";
}

Confounding confounding_from_string(const std::string& name) {
  if (name == "none" || name == "None") return Confounding::None;
  if (name == "linear" || name == "Linear") return Confounding::Linear;
  if (name == "sparse_nonlinear" || name == "SparseNonlinear") return Confounding::SparseNonlinear;
  throw Error(ErrorCode::InvalidConfig, "unknown confounding '" + name + "'");
}

void validate(const DGPConfig& c) {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidConfig, msg); };
  if (c.n_units < 2) fail("n_units must be >= 2");
  if (c.n_periods < 2) fail("n_periods must be >= 2");
  if (c.p < 1) fail("p must be >= 1");
  if (c.cohort_times.empty()) fail("cohort_times must not be empty");
  if (c.cohort_times.size() != c.cohort_shares.size()) fail("cohort_times and cohort_shares differ in length");
  for (int g : c.cohort_times)
    if (g <= 1 || g > c.n_periods) fail("cohort time " + std::to_string(g) + " is outside (1, n_periods]");
  std::vector<int> sorted = c.cohort_times;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) fail("cohort_times has duplicates");
  double total = c.never_treated_share;
  for (double s : c.cohort_shares) {
    if (!(s > 0.0)) fail("cohort shares must be positive");
    total += s;
  }
  if (!(c.never_treated_share > 0.0 && c.never_treated_share < 1.0)) fail("never_treated_share must be in (0, 1)");
  if (std::abs(total - 1.0) > 1e-9) fail("cohort shares and never_treated_share must sum to 1");
  if (!(c.noise_sd >= 0.0) || !std::isfinite(c.noise_sd)) fail("noise_sd must be >= 0");
  if (!std::isfinite(c.selection_strength) || !std::isfinite(c.trend_violation) ||
      !std::isfinite(c.drift_confounding))
    fail("DGP coefficients must be finite");
  if (!(c.ar_rho > -1.0 && c.ar_rho < 1.0)) fail("ar_rho must be in (-1, 1)");
  if (c.n_time_varying < 0) fail("n_time_varying must be >= 0");
  if (c.confounding == Confounding::SparseNonlinear && c.p < 5) fail("SparseNonlinear confounding needs p >= 5");
  if (const auto* d = std::get_if<DynamicEffect>(&c.effect); d && d->effects.empty())
    fail("DynamicByEventTime needs at least one effect");
}

namespace {

double outcome_function(Confounding c, const std::vector<double>& x) {
  switch (c) {
    case Confounding::None: return 0.0;
    case Confounding::Linear: {
      double f = 0.0;
      const std::size_t m = std::min<std::size_t>(x.size(), 10);
      for (std::size_t j = 0; j < m; ++j) f += x[j] / static_cast<double>(j + 1);
      return f;
    }
    case Confounding::SparseNonlinear:
      return x[0] * x[1] + (x[2] > 0.0 ? 1.5 : 0.0) + x[3] + 0.5 * std::max(x[4], 0.0) * x[0];
  }
  return 0.0;
}

double effect_of(const EffectSpec& spec, int e, bool label_a) {
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, NullEffect>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, HomogeneousEffect>) {
          return s.tau;
        } else if constexpr (std::is_same_v<T, DynamicEffect>) {
          return s.effects[std::min<std::size_t>(static_cast<std::size_t>(e), s.effects.size() - 1)];
        } else {
          return label_a ? s.tau_a : s.tau_b;
        }
      },
      spec);
}

}  // namespace

OraclePanel generate(const DGPConfig& c) {
  validate(c);
  Rng rng(c.seed);
  const auto p = static_cast<std::size_t>(c.p);
  const auto n_tv = std::min<std::size_t>(p, static_cast<std::size_t>(c.n_time_varying));
  const double base_logit = std::log((1.0 - c.never_treated_share) / c.never_treated_share);
  const double treated_share = 1.0 - c.never_treated_share;
  const double innovation_sd = c.noise_sd * std::sqrt(1.0 - c.ar_rho * c.ar_rho);
  const std::size_t width = std::max<std::size_t>(3, std::to_string(c.n_units).size());

  OraclePanel out;
  std::vector<PanelObservation> rows;
  rows.reserve(static_cast<std::size_t>(c.n_units) * static_cast<std::size_t>(c.n_periods));
  std::map<CellKey, double> effect_sums;
  double total_effect = 0.0;
  int total_treated = 0;
  std::map<int, std::pair<double, int>> event_sums;

  for (int i = 0; i < c.n_units; ++i) {
    std::string id = std::to_string(i + 1);
    id = "u" + std::string(width - id.size(), '0') + id;

    std::vector<double> z(p);
    for (auto& v : z) v = rng.normal();
    const double s = (z[0] + (p > 1 ? z[1] : 0.0) + (p > 2 ? z[2] : 0.0)) / std::sqrt(static_cast<double>(std::min<std::size_t>(p, 3)));
    const double prob = 1.0 / (1.0 + std::exp(-(base_logit + c.selection_strength * s)));
    std::optional<int> cohort;
    if (rng.uniform() < prob) {
      double u = rng.uniform() * treated_share;
      std::size_t pick = c.cohort_times.size() - 1;
      for (std::size_t k = 0; k < c.cohort_shares.size(); ++k) {
        if (u < c.cohort_shares[k]) {
          pick = k;
          break;
        }
        u -= c.cohort_shares[k];
      }
      cohort = c.cohort_times[pick];
    }
    const bool label_a = z[p - 1] >= 0.0;
    out.subgroup[id] = label_a ? "a" : "b";
    const double alpha = 0.5 * z[0] + c.noise_sd * rng.normal();

    std::vector<double> ar(n_tv, 0.0);
    for (int t = 1; t <= c.n_periods; ++t) {
      if (t > 1)
        for (auto& v : ar) v = c.ar_rho * v + innovation_sd * rng.normal();
      std::vector<double> x = z;
      const double drift = c.drift_confounding * s * (t - 1) / static_cast<double>(c.n_periods - 1);
      for (std::size_t j = 0; j < n_tv; ++j) x[j] += ar[j] + drift;
      const double lambda = 0.1 * (t - 1) + 0.5 * std::sin(static_cast<double>(t));
      double y0 = outcome_function(c.confounding, x) + alpha + lambda + c.noise_sd * rng.normal();
      if (cohort) y0 += c.trend_violation * (t - 1);
      const bool treated = cohort && t >= *cohort;
      double y = y0;
      if (treated) {
        const int e = t - *cohort;
        const double effect = effect_of(c.effect, e, label_a);
        y = y0 + effect;
        const double recorded = y - y0;  // exact individual effect as stored
        effect_sums[{*cohort, t}] += recorded;
        ++out.cell_counts[{*cohort, t}];
        total_effect += recorded;
        ++total_treated;
        event_sums[e].first += recorded;
        ++event_sums[e].second;
      }
      rows.push_back(PanelObservation{id, t, y, treated ? 1 : 0, std::move(x)});
    }
  }

  std::vector<std::string> names(p);
  for (std::size_t j = 0; j < p; ++j) names[j] = "x" + std::to_string(j + 1);
  out.panel = build_panel(std::move(rows), std::move(names));
  for (const auto& [key, sum] : effect_sums) out.true_att[key] = sum / out.cell_counts[key];
  out.true_overall_att = total_treated > 0 ? total_effect / total_treated : 0.0;
  for (const auto& [e, s] : event_sums) out.true_event_curve[e] = s.first / s.second;
  return out;
}

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names{"S1_homogeneous", "S2_dynamic_heterogeneous", "S3_highdim_nonlinear",
                                              "S4_null", "S5_pretrend_violation"};
  return names;
}

DGPConfig scenario(const std::string& name) {
  DGPConfig c;  // defaults are S1
  const std::string tag = name.substr(0, 2);
  const auto& names = scenario_names();
  const bool known = std::find(names.begin(), names.end(), name) != names.end() ||
                     (name.size() == 2 && tag >= "S1" && tag <= "S5");
  if (!known) {
    std::string list;
    for (const auto& n : names) list += (list.empty() ? "" : ", ") + n;
    throw Error(ErrorCode::InvalidConfig, "unknown scenario '" + name + "'; valid: " + list);
  }
  if (tag == "S2") {
    c.cohort_times = {2, 4, 6};
    c.cohort_shares = {0.3, 0.3, 0.3};
    c.never_treated_share = 0.1;
    c.selection_strength = 0.5;
    c.effect = DynamicEffect{{0.5, 1.0, 1.5, 2.0, 2.5, 3.0}};
  } else if (tag == "S3") {
    c.p = 200;
    c.confounding = Confounding::SparseNonlinear;
    c.selection_strength = 1.5;
    c.drift_confounding = 2.0;
  } else if (tag == "S4") {
    c.effect = NullEffect{};
  } else if (tag == "S5") {
    c.trend_violation = 0.3;
  }
  return c;
}

}  // namespace sdidml
