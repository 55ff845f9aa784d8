#include "sdidml/crossfit.hpp"

#include "sdidml/error.hpp"
#include "sdidml/parallel.hpp"
#include "sdidml/rng.hpp"

#include <numeric>
#include <optional>

namespace sdidml {

FoldAssignment assign_folds(const PanelDataset& panel, int k, std::uint64_t seed) {
  if (k < 1) throw Error(ErrorCode::InvalidConfig, "K must be >= 1");
  if (static_cast<std::size_t>(k) > panel.n_units())
    throw Error(ErrorCode::TooManyFolds,
                "K=" + std::to_string(k) + " exceeds the number of units (" + std::to_string(panel.n_units()) + ")");
  std::vector<std::size_t> order(panel.n_units());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order);
  FoldAssignment out;
  out.k = k;
  out.fold_of_unit.resize(panel.n_units());
  for (std::size_t pos = 0; pos < order.size(); ++pos) out.fold_of_unit[order[pos]] = static_cast<int>(pos % k);
  return out;
}

Eigen::MatrixXd nuisance_features(const PanelDataset& panel) {
  const FeatureMatrix cov = feature_matrix(panel, true);
  const auto n = static_cast<Eigen::Index>(panel.n_obs());
  const auto p = cov.values.cols();
  const auto n_dummies = static_cast<Eigen::Index>(panel.n_periods()) - 1;
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, p + n_dummies);
  x.leftCols(p) = cov.values;
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto period = static_cast<Eigen::Index>(panel.period_index_of_obs(static_cast<std::size_t>(k)));
    if (period > 0) x(k, p + period - 1) = 1.0;
  }
  return x;
}

int clip_propensities(Eigen::VectorXd& m_hat, double eps) {
  int moved = 0;
  if (eps == 0.0) return moved;  // clipping disabled: keeps linear-probability fits exact
  for (Eigen::Index i = 0; i < m_hat.size(); ++i) {
    const double v = m_hat(i);
    const double c = std::clamp(v, eps, 1.0 - eps);
    if (c != v) {
      m_hat(i) = c;
      ++moved;
    }
  }
  return moved;
}

NuisanceFits crossfit_nuisance(const PanelDataset& panel, const LearnerSpec& g_spec, const LearnerSpec& m_spec,
                               const FoldAssignment& folds, double clip_eps, std::uint64_t seed, int threads) {
  if (!(clip_eps >= 0.0 && clip_eps < 0.5)) throw Error(ErrorCode::InvalidConfig, "clip_eps must be in [0, 0.5)");
  if (folds.fold_of_unit.size() != panel.n_units())
    throw Error(ErrorCode::AlignmentMismatch, "fold assignment does not match the panel's units");
  validate(g_spec);
  validate(m_spec);

  const Eigen::MatrixXd x = nuisance_features(panel);
  const Eigen::VectorXd y = panel.outcomes();
  const Eigen::VectorXd d = panel.treatments();
  const auto n = static_cast<Eigen::Index>(panel.n_obs());

  std::vector<int> fold_of_obs(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k)
    fold_of_obs[static_cast<std::size_t>(k)] = folds.fold_of_unit[panel.unit_index_of_obs(static_cast<std::size_t>(k))];

  struct FoldResult {
    std::vector<Eigen::Index> rows;
    Eigen::VectorXd g, m;
    std::vector<std::string> warnings;
  };
  std::vector<FoldResult> results(static_cast<std::size_t>(folds.k));

  parallel_for(static_cast<std::size_t>(folds.k), threads, [&](std::size_t fold) {
    const int f = static_cast<int>(fold);
    std::vector<Eigen::Index> train, test;
    for (Eigen::Index k = 0; k < n; ++k) {
      const bool in_fold = fold_of_obs[static_cast<std::size_t>(k)] == f;
      if (in_fold) test.push_back(k);
      if (!in_fold || folds.k == 1) train.push_back(k);
    }
    FoldResult& out = results[fold];
    out.rows = test;
    if (test.empty()) return;
    const Eigen::MatrixXd x_train = x(train, Eigen::all);
    const Eigen::MatrixXd x_test = x(test, Eigen::all);
    try {
      const auto fold_seed = derive_seed(seed, fold);
      const FittedModel g_model = fit(g_spec, x_train, y(train), fold_seed);
      const FittedModel m_model = fit(m_spec, x_train, d(train), fold_seed);
      out.g = predict(g_model, x_test);
      out.m = predict(m_model, x_test);
      for (const auto* model : {&g_model, &m_model})
        if (model->diagnostics().warning)
          out.warnings.push_back("fold " + std::to_string(f) + ": " + *model->diagnostics().warning);
    } catch (const Error& e) {
      rethrow_with_context(e, "fold " + std::to_string(f));
    }
  });

  NuisanceFits fits;
  fits.g_hat.resize(n);
  fits.m_hat.resize(n);
  for (const auto& r : results) {
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
      fits.g_hat(r.rows[i]) = r.g(static_cast<Eigen::Index>(i));
      fits.m_hat(r.rows[i]) = r.m(static_cast<Eigen::Index>(i));
    }
    fits.warnings.insert(fits.warnings.end(), r.warnings.begin(), r.warnings.end());
  }
  fits.n_clipped = clip_propensities(fits.m_hat, clip_eps);
  fits.folds = folds;
  fits.g_spec = g_spec;
  fits.m_spec = m_spec;
  fits.clip_eps = clip_eps;
  return fits;
}

ResidualPanel residualize(std::shared_ptr<const PanelDataset> panel, std::shared_ptr<const NuisanceFits> fits) {
  const auto n = static_cast<Eigen::Index>(panel->n_obs());
  if (fits->g_hat.size() != n || fits->m_hat.size() != n || fits->folds.fold_of_unit.size() != panel->n_units())
    throw Error(ErrorCode::AlignmentMismatch, "nuisance fits are not aligned with the panel");
  ResidualPanel out;
  out.y_tilde = panel->outcomes() - fits->g_hat;
  out.d_tilde = panel->treatments() - fits->m_hat;
  out.panel = std::move(panel);
  out.fits = std::move(fits);
  return out;
}

}  // namespace sdidml
