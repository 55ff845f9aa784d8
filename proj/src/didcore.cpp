#include "sdidml/didcore.hpp"

#include "sdidml/error.hpp"

#include <algorithm>
#include <cmath>

namespace sdidml {

std::string to_string(ControlRule rule) {
  return rule == ControlRule::NeverTreated ? "never_treated" : "not_yet_treated";
}

ControlRule control_rule_from_string(const std::string& name) {
  if (name == "never_treated" || name == "NeverTreated") return ControlRule::NeverTreated;
  if (name == "not_yet_treated" || name == "NotYetTreated") return ControlRule::NotYetTreated;
  throw Error(ErrorCode::InvalidConfig, "unknown control rule '" + name + "'");
}

namespace {

struct FoldSums {
  std::vector<double> sum;
  std::vector<int> count;
  explicit FoldSums(int k) : sum(static_cast<std::size_t>(k)), count(static_cast<std::size_t>(k)) {}
  void add(int fold, double v) {
    sum[static_cast<std::size_t>(fold)] += v;
    ++count[static_cast<std::size_t>(fold)];
  }
  int total_count() const {
    int c = 0;
    for (int x : count) c += x;
    return c;
  }
  double total_sum() const {
    double s = 0.0;
    for (double x : sum) s += x;
    return s;
  }
};

double combine(const FoldSums& treated, const FoldSums& control, FoldPooling pooling) {
  const int n_treated = treated.total_count();
  const double pooled_control = control.total_sum() / control.total_count();
  if (pooling == FoldPooling::Pooled) return treated.total_sum() / n_treated - pooled_control;
  double tau = 0.0;
  for (std::size_t k = 0; k < treated.count.size(); ++k) {
    if (treated.count[k] == 0) continue;
    const double control_mean = control.count[k] > 0 ? control.sum[k] / control.count[k] : pooled_control;
    tau += static_cast<double>(treated.count[k]) / n_treated * (treated.sum[k] / treated.count[k] - control_mean);
  }
  return tau;
}

}  // namespace

GroupTimeEffects estimate_group_time(const ResidualPanel& resid, const ContrastOptions& options,
                                     const std::vector<char>* include_unit) {
  if (options.anticipation < 0) throw Error(ErrorCode::InvalidConfig, "anticipation must be >= 0");
  const PanelDataset& panel = *resid.panel;
  const FoldAssignment& folds = resid.fits->folds;
  if (resid.y_tilde.size() != static_cast<Eigen::Index>(panel.n_obs()))
    throw Error(ErrorCode::AlignmentMismatch, "residuals are not aligned with the panel");

  GroupTimeEffects out;
  out.control_rule = options.control_rule;
  out.anticipation = options.anticipation;

  auto included = [&](std::size_t i) { return include_unit == nullptr || (*include_unit)[i] != 0; };

  for (int g : panel.cohort_times()) {
    const int base = g - 1 - options.anticipation;
    const auto base_idx = panel.period_index(base);
    for (int t : panel.periods()) {
      if (t == base) continue;
      const CellKey key{g, t};
      if (!base_idx) {
        out.omitted.push_back({key, "MissingBasePeriod"});
        continue;
      }
      const std::size_t t_idx = *panel.period_index(t);
      FoldSums treated(folds.k), control(folds.k);
      for (std::size_t i = 0; i < panel.n_units(); ++i) {
        if (!included(i)) continue;
        const Cohort& c = panel.cohort_of_unit(i);
        const bool is_treated = !c.is_never_treated() && c.time() == g;
        const bool is_control = options.control_rule == ControlRule::NeverTreated ? c.is_never_treated()
                                                                                  : c.adopts_after(std::max(t, g));
        if (!is_treated && !is_control) continue;
        const auto at_t = panel.find(i, t_idx);
        const auto at_b = panel.find(i, *base_idx);
        if (!at_t || !at_b) continue;
        const double diff = resid.y_tilde(static_cast<Eigen::Index>(*at_t)) - resid.y_tilde(static_cast<Eigen::Index>(*at_b));
        (is_treated ? treated : control).add(folds.fold_of_unit[i], diff);
      }
      if (treated.total_count() == 0) {
        out.omitted.push_back({key, "NoTreatedUnits"});
        continue;
      }
      if (control.total_count() == 0) {
        out.omitted.push_back({key, "NoControlPool"});
        continue;
      }
      out.cells[key] = CellEstimate{combine(treated, control, options.pooling), treated.total_count(),
                                    control.total_count(), std::nullopt};
    }
  }
  if (out.cells.empty()) throw Error(ErrorCode::EmptyResult, "no estimable (g,t) cell");
  return out;
}

GroupTimeEffects estimate_interacted_regression(const ResidualPanel& resid, const DemeanOptions& demean) {
  const PanelDataset& panel = *resid.panel;
  const auto n = static_cast<Eigen::Index>(panel.n_obs());
  if (resid.y_tilde.size() != n || resid.d_tilde.size() != n)
    throw Error(ErrorCode::AlignmentMismatch, "residuals are not aligned with the panel");

  // cohort fixed-effect ids: adoption cohorts in order, never-treated last
  const auto& cohort_times = panel.cohort_times();
  std::vector<int> cohort_id(static_cast<std::size_t>(n)), period_id(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) {
    const Cohort& c = panel.cohort_of_unit(panel.unit_index_of_obs(static_cast<std::size_t>(k)));
    cohort_id[static_cast<std::size_t>(k)] =
        c.is_never_treated()
            ? static_cast<int>(cohort_times.size())
            : static_cast<int>(std::lower_bound(cohort_times.begin(), cohort_times.end(), c.time()) - cohort_times.begin());
    period_id[static_cast<std::size_t>(k)] = static_cast<int>(panel.period_index_of_obs(static_cast<std::size_t>(k)));
  }

  GroupTimeEffects out;
  out.control_rule = ControlRule::NeverTreated;
  out.anticipation = 0;

  struct Column {
    CellKey key;
    int n_treated = 0;
    int n_control = 0;
  };
  std::vector<Column> columns;
  std::vector<Eigen::VectorXd> data;
  for (std::size_t gi = 0; gi < cohort_times.size(); ++gi) {
    const int g = cohort_times[gi];
    const int base = g - 1;
    for (int t : panel.periods()) {
      if (t == base) continue;
      if (!panel.period_index(base)) {
        out.omitted.push_back({{g, t}, "MissingBasePeriod"});
        continue;
      }
      const auto t_idx = static_cast<int>(*panel.period_index(t));
      Eigen::VectorXd col = Eigen::VectorXd::Zero(n);
      Column meta{{g, t}};
      for (Eigen::Index k = 0; k < n; ++k) {
        if (period_id[static_cast<std::size_t>(k)] != t_idx) continue;
        if (cohort_id[static_cast<std::size_t>(k)] == static_cast<int>(gi)) {
          col(k) = t >= g ? resid.d_tilde(k) : 1.0;
          ++meta.n_treated;
        } else if (panel.observation(static_cast<std::size_t>(k)).treatment == 0) {
          ++meta.n_control;
        }
      }
      if (meta.n_treated == 0) continue;
      columns.push_back(meta);
      data.push_back(std::move(col));
    }
  }
  if (columns.empty()) throw Error(ErrorCode::EmptyResult, "no estimable (g,t) cell");

  Eigen::MatrixXd stacked(n, static_cast<Eigen::Index>(columns.size()) + 1);
  stacked.col(0) = resid.y_tilde;
  for (std::size_t c = 0; c < columns.size(); ++c) stacked.col(static_cast<Eigen::Index>(c) + 1) = data[c];
  const DemeanResult demeaned = demean_two_way(stacked, cohort_id, period_id, demean);

  // drop interaction columns that the fixed effects absorb entirely
  std::vector<std::size_t> kept;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    const double before = data[c].norm();
    const double after = demeaned.values.col(static_cast<Eigen::Index>(c) + 1).norm();
    if (before > 0.0 && after > 1e-8 * before)
      kept.push_back(c);
    else
      out.omitted.push_back({columns[c].key, "CollinearCell"});
  }

  Eigen::VectorXd coef;
  while (!kept.empty()) {
    Eigen::MatrixXd z(n, static_cast<Eigen::Index>(kept.size()));
    for (std::size_t j = 0; j < kept.size(); ++j)
      z.col(static_cast<Eigen::Index>(j)) = demeaned.values.col(static_cast<Eigen::Index>(kept[j]) + 1);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(z);
    qr.setThreshold(1e-10);
    if (qr.rank() == z.cols()) {
      coef = qr.solve(demeaned.values.col(0));
      break;
    }
    // drop the last pivoted (least independent) column and refit
    const auto drop = static_cast<std::size_t>(qr.colsPermutation().indices()(z.cols() - 1));
    out.omitted.push_back({columns[kept[drop]].key, "CollinearCell"});
    kept.erase(kept.begin() + static_cast<std::ptrdiff_t>(drop));
  }
  if (kept.empty()) throw Error(ErrorCode::EmptyResult, "every interaction column is collinear with the fixed effects");

  FixedEffectsSolution solution;
  solution.demeaning_iterations = demeaned.sweeps;
  solution.demeaning_residual = demeaned.residual;
  const auto n_fe = static_cast<int>(cohort_times.size() + 1 + panel.n_periods() - 1);
  solution.dof = static_cast<int>(n) - static_cast<int>(kept.size()) - n_fe;
  for (std::size_t j = 0; j < kept.size(); ++j) {
    const Column& meta = columns[kept[j]];
    const double tau = coef(static_cast<Eigen::Index>(j));
    out.cells[meta.key] = CellEstimate{tau, meta.n_treated, meta.n_control, std::nullopt};
    solution.coefficients["tau[g=" + std::to_string(meta.key.g) + ",t=" + std::to_string(meta.key.t) + "]"] = tau;
  }
  out.solver = std::move(solution);
  std::sort(out.omitted.begin(), out.omitted.end(),
            [](const CellOmission& a, const CellOmission& b) { return a.cell < b.cell; });
  return out;
}

TwfeResult twfe_baseline(const PanelDataset& panel, const DemeanOptions& demean) {
  if (panel.n_units() < 2) throw Error(ErrorCode::DegenerateDesign, "TWFE needs at least two units");
  const auto n = static_cast<Eigen::Index>(panel.n_obs());
  std::vector<int> unit_id(static_cast<std::size_t>(n)), period_id(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) {
    unit_id[static_cast<std::size_t>(k)] = static_cast<int>(panel.unit_index_of_obs(static_cast<std::size_t>(k)));
    period_id[static_cast<std::size_t>(k)] = static_cast<int>(panel.period_index_of_obs(static_cast<std::size_t>(k)));
  }
  Eigen::MatrixXd yd(n, 2);
  yd.col(0) = panel.outcomes();
  yd.col(1) = panel.treatments();
  const DemeanResult dm = demean_two_way(yd, unit_id, period_id, demean);
  const auto y = dm.values.col(0);
  const auto d = dm.values.col(1);
  const double sxx = d.squaredNorm();
  if (sxx < 1e-12) throw Error(ErrorCode::DegenerateDesign, "treatment has no variation within units and periods");

  TwfeResult out;
  out.tau = d.dot(y) / sxx;
  out.sweeps = dm.sweeps;
  const Eigen::VectorXd e = y - out.tau * d;
  double meat = 0.0;
  for (std::size_t i = 0; i < panel.n_units(); ++i) {
    const auto [first, last] = panel.unit_rows(i);
    double score = 0.0;
    for (std::size_t k = first; k < last; ++k)
      score += d(static_cast<Eigen::Index>(k)) * e(static_cast<Eigen::Index>(k));
    meat += score * score;
  }
  const double clusters = static_cast<double>(panel.n_units());
  out.se = std::sqrt(meat * clusters / (clusters - 1.0)) / sxx;
  return out;
}

std::map<std::string, SubgroupResult> subgroup_effects(const ResidualPanel& resid,
                                                       const std::map<UnitId, std::string>& subgroup_of_unit,
                                                       const ContrastOptions& options) {
  const PanelDataset& panel = *resid.panel;
  std::vector<std::string> label_of(panel.n_units());
  for (std::size_t i = 0; i < panel.n_units(); ++i) {
    const auto it = subgroup_of_unit.find(panel.units()[i]);
    if (it == subgroup_of_unit.end()) throw Error(ErrorCode::MissingSubgroupLabel, "unit '" + panel.units()[i] + "'");
    label_of[i] = it->second;
  }
  std::map<std::string, SubgroupResult> out;
  for (const auto& label : label_of) out.try_emplace(label);
  for (auto& [label, result] : out) {
    std::vector<char> mask(panel.n_units());
    for (std::size_t i = 0; i < panel.n_units(); ++i) mask[i] = label_of[i] == label;
    try {
      result.effects = estimate_group_time(resid, options, &mask);
    } catch (const Error& e) {
      result.error = e.what();
    }
  }
  return out;
}

}  // namespace sdidml
