#include "sdidml/panel.hpp"

#include "sdidml/error.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace sdidml {

namespace {

std::string row_field(std::size_t row, std::string_view field) {
  return "row " + std::to_string(row) + ", field '" + std::string(field) + "'";
}

template <class T>
const T& require(const std::optional<T>& value, std::size_t row, std::string_view field) {
  if (!value) throw Error(ErrorCode::MissingField, row_field(row, field));
  return *value;
}

double require_finite(const std::optional<double>& value, std::size_t row, std::string_view field) {
  const double v = require(value, row, field);
  if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteValue, row_field(row, field));
  return v;
}

}  // namespace

const Cohort& PanelDataset::cohort(const UnitId& unit) const {
  const auto idx = unit_index(unit);
  if (!idx) throw Error(ErrorCode::UnknownUnit, unit);
  return cohorts_[*idx];
}

std::map<UnitId, Cohort> PanelDataset::cohort_map() const {
  std::map<UnitId, Cohort> out;
  for (std::size_t i = 0; i < units_.size(); ++i) out.emplace(units_[i], cohorts_[i]);
  return out;
}

std::size_t PanelDataset::n_never_treated() const {
  return static_cast<std::size_t>(
      std::count_if(cohorts_.begin(), cohorts_.end(), [](const Cohort& c) { return c.is_never_treated(); }));
}

std::optional<std::size_t> PanelDataset::unit_index(const UnitId& unit) const {
  const auto it = std::lower_bound(units_.begin(), units_.end(), unit);
  if (it == units_.end() || *it != unit) return std::nullopt;
  return static_cast<std::size_t>(it - units_.begin());
}

std::optional<std::size_t> PanelDataset::period_index(int time) const {
  const auto it = std::lower_bound(periods_.begin(), periods_.end(), time);
  if (it == periods_.end() || *it != time) return std::nullopt;
  return static_cast<std::size_t>(it - periods_.begin());
}

std::optional<std::size_t> PanelDataset::find(std::size_t unit_index, std::size_t period_index) const {
  const auto [first, last] = unit_rows(unit_index);
  const auto begin = obs_period_.begin() + static_cast<std::ptrdiff_t>(first);
  const auto end = obs_period_.begin() + static_cast<std::ptrdiff_t>(last);
  const auto it = std::lower_bound(begin, end, period_index);
  if (it == end || *it != period_index) return std::nullopt;
  return static_cast<std::size_t>(it - obs_period_.begin());
}

Eigen::VectorXd PanelDataset::outcomes() const {
  Eigen::VectorXd y(static_cast<Eigen::Index>(n_obs()));
  for (std::size_t k = 0; k < n_obs(); ++k) y(static_cast<Eigen::Index>(k)) = observations_[k].outcome;
  return y;
}

Eigen::VectorXd PanelDataset::treatments() const {
  Eigen::VectorXd d(static_cast<Eigen::Index>(n_obs()));
  for (std::size_t k = 0; k < n_obs(); ++k) d(static_cast<Eigen::Index>(k)) = observations_[k].treatment;
  return d;
}

PanelDataset build_panel(const std::vector<RawRecord>& records, std::vector<std::string> covariate_names) {
  const std::size_t p = covariate_names.size();
  std::vector<PanelObservation> observations;
  observations.reserve(records.size());
  for (std::size_t row = 0; row < records.size(); ++row) {
    const RawRecord& r = records[row];
    PanelObservation obs;
    obs.unit = require(r.unit, row, "unit");
    obs.time = require(r.time, row, "time");
    obs.outcome = require_finite(r.outcome, row, "outcome");
    const double d = require_finite(r.treatment, row, "treatment");
    if (d != 0.0 && d != 1.0) throw Error(ErrorCode::InvalidValue, row_field(row, "treatment") + " must be 0 or 1");
    obs.treatment = static_cast<int>(d);
    if (r.covariates.size() != p)
      throw Error(ErrorCode::MissingField, row_field(row, "covariates") + ": expected " + std::to_string(p) +
                                               " values, got " + std::to_string(r.covariates.size()));
    obs.covariates.reserve(p);
    for (std::size_t j = 0; j < p; ++j) obs.covariates.push_back(require_finite(r.covariates[j], row, covariate_names[j]));
    observations.push_back(std::move(obs));
  }
  return build_panel(std::move(observations), std::move(covariate_names));
}

PanelDataset build_panel(std::vector<PanelObservation> observations, std::vector<std::string> covariate_names) {
  const std::size_t p = covariate_names.size();
  for (std::size_t row = 0; row < observations.size(); ++row) {
    const auto& obs = observations[row];
    if (obs.covariates.size() != p)
      throw Error(ErrorCode::MissingField, row_field(row, "covariates") + ": expected " + std::to_string(p) + " values");
    if (!std::isfinite(obs.outcome)) throw Error(ErrorCode::NonFiniteValue, row_field(row, "outcome"));
    if (obs.treatment != 0 && obs.treatment != 1)
      throw Error(ErrorCode::InvalidValue, row_field(row, "treatment") + " must be 0 or 1");
    for (std::size_t j = 0; j < p; ++j)
      if (!std::isfinite(obs.covariates[j])) throw Error(ErrorCode::NonFiniteValue, row_field(row, covariate_names[j]));
  }
  if (observations.empty()) throw Error(ErrorCode::EmptyControlPool, "panel has no observations");

  std::stable_sort(observations.begin(), observations.end(), [](const PanelObservation& a, const PanelObservation& b) {
    return a.unit != b.unit ? a.unit < b.unit : a.time < b.time;
  });

  PanelDataset panel;
  std::set<int> periods;
  for (std::size_t k = 0; k < observations.size(); ++k) {
    const auto& obs = observations[k];
    if (k > 0 && observations[k - 1].unit == obs.unit && observations[k - 1].time == obs.time)
      throw Error(ErrorCode::DuplicateIndex, "unit '" + obs.unit + "', time " + std::to_string(obs.time));
    if (panel.units_.empty() || panel.units_.back() != obs.unit) {
      panel.units_.push_back(obs.unit);
      panel.unit_begin_.push_back(k);
    }
    periods.insert(obs.time);
  }
  panel.unit_begin_.push_back(observations.size());
  panel.periods_.assign(periods.begin(), periods.end());

  std::set<int> cohort_times;
  panel.cohorts_.reserve(panel.units_.size());
  for (std::size_t i = 0; i < panel.units_.size(); ++i) {
    Cohort cohort = Cohort::never_treated();
    for (std::size_t k = panel.unit_begin_[i]; k < panel.unit_begin_[i + 1]; ++k) {
      const auto& obs = observations[k];
      if (obs.treatment == 1 && cohort.is_never_treated()) {
        cohort = Cohort::first_treated_at(obs.time);
        cohort_times.insert(obs.time);
      } else if (obs.treatment == 0 && !cohort.is_never_treated()) {
        throw Error(ErrorCode::NonAbsorbingTreatment,
                    "unit '" + obs.unit + "' reverts to untreated at time " + std::to_string(obs.time));
      }
    }
    panel.cohorts_.push_back(cohort);
  }
  panel.cohort_times_.assign(cohort_times.begin(), cohort_times.end());

  // A contrast needs either never-treated units or two distinct adoption times.
  if (panel.n_never_treated() == 0 && panel.cohort_times_.size() < 2)
    throw Error(ErrorCode::EmptyControlPool, "no never-treated or not-yet-treated units");

  panel.obs_unit_.resize(observations.size());
  panel.obs_period_.resize(observations.size());
  for (std::size_t i = 0; i < panel.units_.size(); ++i)
    for (std::size_t k = panel.unit_begin_[i]; k < panel.unit_begin_[i + 1]; ++k) {
      panel.obs_unit_[k] = i;
      panel.obs_period_[k] = *panel.period_index(observations[k].time);
    }
  panel.observations_ = std::move(observations);
  panel.covariate_names_ = std::move(covariate_names);
  return panel;
}

std::optional<int> event_time(const PanelDataset& panel, const UnitId& unit, int t) {
  const auto idx = panel.unit_index(unit);
  if (!idx) throw Error(ErrorCode::UnknownUnit, unit);
  if (!panel.period_index(t)) throw Error(ErrorCode::UnknownPeriod, std::to_string(t));
  const Cohort& c = panel.cohort_of_unit(*idx);
  if (c.is_never_treated()) return std::nullopt;
  return t - c.time();
}

FeatureMatrix feature_matrix(const PanelDataset& panel, bool standardize) {
  const auto n = static_cast<Eigen::Index>(panel.n_obs());
  const auto p = static_cast<Eigen::Index>(panel.n_covariates());
  FeatureMatrix out;
  out.values.resize(n, p);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto& cov = panel.observation(static_cast<std::size_t>(k)).covariates;
    for (Eigen::Index j = 0; j < p; ++j) out.values(k, j) = cov[static_cast<std::size_t>(j)];
  }
  out.means = Eigen::VectorXd::Zero(p);
  out.scales = Eigen::VectorXd::Ones(p);
  if (!standardize) return out;

  for (Eigen::Index j = 0; j < p; ++j) {
    auto col = out.values.col(j);
    const double mean = col.mean();
    col.array() -= mean;
    const double sd = std::sqrt(col.squaredNorm() / static_cast<double>(n));
    out.means(j) = mean;
    if (sd > 1e-12 * std::max(1.0, std::abs(mean))) {
      col /= sd;
      out.scales(j) = sd;
    } else {
      col.setZero();
    }
  }
  return out;
}

}  // namespace sdidml
