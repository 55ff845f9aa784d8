#pragma once

#include "sdidml/panel.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

// Deterministic inputs shared with tests/oracle/oracle.py.
namespace fixture {

inline Eigen::MatrixXd features(int n, int p) {
  Eigen::MatrixXd x(n, p);
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= p; ++j) x(i - 1, j - 1) = std::sin(0.37 * i * j + 0.11 * j * j) + 0.5 * std::cos(1.3 * i + (j - 1));
  return x;
}

inline Eigen::VectorXd target(const Eigen::MatrixXd& x) {
  Eigen::VectorXd y(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    y(i) = 1 + 2 * x(i, 0) - x(i, 2) + 0.5 * x(i, 4) + 0.3 * std::sin(2.1 * static_cast<double>(i + 1));
  return y;
}

inline Eigen::VectorXd treatment(const Eigen::MatrixXd& x) {
  Eigen::VectorXd d(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    d(i) = std::sin(1.7 * static_cast<double>(i + 1)) + 0.6 * x(i, 0) > 0 ? 1.0 : 0.0;
  return d;
}

inline std::vector<double> vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

/// Balanced panel where unit u has adoption time cohorts[u] (0 = never) and
/// outcome outcome(u, t); one covariate equal to the unit index.
template <class F>
sdidml::PanelDataset toy_panel(const std::vector<int>& cohorts, int periods, F outcome) {
  std::vector<sdidml::PanelObservation> rows;
  for (std::size_t u = 0; u < cohorts.size(); ++u) {
    const std::string id = "u" + std::string(u < 10 ? "0" : "") + std::to_string(u);
    for (int t = 1; t <= periods; ++t) {
      const int d = cohorts[u] != 0 && t >= cohorts[u] ? 1 : 0;
      rows.push_back({id, t, static_cast<double>(outcome(static_cast<int>(u), t)), d, {static_cast<double>(u)}});
    }
  }
  return sdidml::build_panel(std::move(rows), {"x1"});
}

}  // namespace fixture

#include "sdidml/crossfit.hpp"

#include <memory>

namespace fixture {

/// Residual panel with zero nuisances: y_tilde = Y and d_tilde = D.
inline sdidml::ResidualPanel zero_nuisance(const sdidml::PanelDataset& panel, int k = 1) {
  auto shared = std::make_shared<const sdidml::PanelDataset>(panel);
  auto fits = std::make_shared<sdidml::NuisanceFits>();
  fits->g_hat = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(panel.n_obs()));
  fits->m_hat = fits->g_hat;
  fits->folds.k = k;
  fits->folds.fold_of_unit.assign(panel.n_units(), 0);
  for (std::size_t u = 0; u < panel.n_units(); ++u) fits->folds.fold_of_unit[u] = static_cast<int>(u) % k;
  fits->g_spec = sdidml::MeanSpec{};
  fits->m_spec = sdidml::MeanSpec{};
  return sdidml::residualize(shared, fits);
}

}  // namespace fixture
