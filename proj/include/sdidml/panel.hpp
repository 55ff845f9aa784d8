#pragma once

#include <Eigen/Dense>

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace sdidml {

using UnitId = std::string;

/// First treatment period of a unit, or the never-treated sentinel.
class Cohort {
 public:
  static Cohort never_treated() { return Cohort{}; }
  static Cohort first_treated_at(int time) { return Cohort{time}; }

  bool is_never_treated() const { return !first_.has_value(); }
  /// Precondition: !is_never_treated().
  int time() const { return *first_; }

  /// Never-treated compares greater than every adoption time.
  bool adopts_after(int t) const { return is_never_treated() || *first_ > t; }

  friend bool operator==(const Cohort&, const Cohort&) = default;

 private:
  Cohort() = default;
  explicit Cohort(int time) : first_(time) {}
  std::optional<int> first_;
};

struct PanelObservation {
  UnitId unit;
  int time = 0;
  double outcome = 0.0;
  int treatment = 0;
  std::vector<double> covariates;

  friend bool operator==(const PanelObservation&, const PanelObservation&) = default;
};

/// One unvalidated input row. Absent optionals are missing fields.
struct RawRecord {
  std::optional<UnitId> unit;
  std::optional<int> time;
  std::optional<double> outcome;
  std::optional<double> treatment;
  std::vector<std::optional<double>> covariates;
};

/// Validated, immutable panel. Observations are stored sorted by
/// (unit, time); units and periods are sorted ascending.
class PanelDataset {
 public:
  std::size_t n_obs() const { return observations_.size(); }
  std::size_t n_units() const { return units_.size(); }
  std::size_t n_periods() const { return periods_.size(); }
  std::size_t n_covariates() const { return covariate_names_.size(); }

  const std::vector<PanelObservation>& observations() const { return observations_; }
  const PanelObservation& observation(std::size_t k) const { return observations_[k]; }
  const std::vector<UnitId>& units() const { return units_; }
  const std::vector<int>& periods() const { return periods_; }
  const std::vector<std::string>& covariate_names() const { return covariate_names_; }

  const Cohort& cohort(const UnitId& unit) const;
  const Cohort& cohort_of_unit(std::size_t unit_index) const { return cohorts_[unit_index]; }
  std::map<UnitId, Cohort> cohort_map() const;

  /// Sorted distinct adoption times of ever-treated units.
  const std::vector<int>& cohort_times() const { return cohort_times_; }
  std::size_t n_never_treated() const;

  std::optional<std::size_t> unit_index(const UnitId& unit) const;
  std::optional<std::size_t> period_index(int time) const;

  std::size_t unit_index_of_obs(std::size_t k) const { return obs_unit_[k]; }
  std::size_t period_index_of_obs(std::size_t k) const { return obs_period_[k]; }

  /// Observations of a unit occupy [first, last) in canonical order.
  std::pair<std::size_t, std::size_t> unit_rows(std::size_t unit_index) const {
    return {unit_begin_[unit_index], unit_begin_[unit_index + 1]};
  }

  /// Observation index of (unit, period), if observed.
  std::optional<std::size_t> find(std::size_t unit_index, std::size_t period_index) const;

  Eigen::VectorXd outcomes() const;
  Eigen::VectorXd treatments() const;

  friend bool operator==(const PanelDataset& a, const PanelDataset& b) {
    return a.observations_ == b.observations_ && a.covariate_names_ == b.covariate_names_;
  }

 private:
  friend PanelDataset build_panel(const std::vector<RawRecord>&, std::vector<std::string>);
  friend PanelDataset build_panel(std::vector<PanelObservation>, std::vector<std::string>);

  std::vector<PanelObservation> observations_;
  std::vector<UnitId> units_;
  std::vector<int> periods_;
  std::vector<Cohort> cohorts_;
  std::vector<int> cohort_times_;
  std::vector<std::string> covariate_names_;
  std::vector<std::size_t> obs_unit_;
  std::vector<std::size_t> obs_period_;
  std::vector<std::size_t> unit_begin_;
};

/// Validates raw rows and derives cohorts. Throws sdidml::Error with
/// MissingField, NonFiniteValue, InvalidValue, DuplicateIndex,
/// NonAbsorbingTreatment or EmptyControlPool.
PanelDataset build_panel(const std::vector<RawRecord>& records,
                         std::vector<std::string> covariate_names);

/// Same validation for already-typed observations.
PanelDataset build_panel(std::vector<PanelObservation> observations,
                         std::vector<std::string> covariate_names);

/// e = t - g(i) for ever-treated units, nullopt for never-treated units.
std::optional<int> event_time(const PanelDataset& panel, const UnitId& unit, int t);

struct FeatureMatrix {
  Eigen::MatrixXd values;  // n_obs x p, canonical row order
  Eigen::VectorXd means;
  Eigen::VectorXd scales;
};

/// Covariate matrix, optionally standardized with the population SD.
/// Zero-variance columns are centered and keep scale 1.
FeatureMatrix feature_matrix(const PanelDataset& panel, bool standardize);

}  // namespace sdidml
