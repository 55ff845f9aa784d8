#pragma once

#include "sdidml/learners.hpp"
#include "sdidml/panel.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <vector>

namespace sdidml {

/// Unit-level fold assignment. fold_of_unit is indexed like panel.units().
struct FoldAssignment {
  int k = 1;
  std::vector<int> fold_of_unit;

  friend bool operator==(const FoldAssignment&, const FoldAssignment&) = default;
};

/// Shuffles the sorted unit list with `seed` and deals units round-robin
/// into K folds. Throws TooManyFolds when K exceeds the number of units.
FoldAssignment assign_folds(const PanelDataset& panel, int k, std::uint64_t seed);

/// Standardized covariates followed by one-hot indicators for every period
/// except the first. Cohort indicators are never included.
Eigen::MatrixXd nuisance_features(const PanelDataset& panel);

struct NuisanceFits {
  Eigen::VectorXd g_hat;  // outcome model, canonical observation order
  Eigen::VectorXd m_hat;  // treatment model after clipping
  FoldAssignment folds;
  LearnerSpec g_spec;
  LearnerSpec m_spec;
  double clip_eps = 0.0;
  int n_clipped = 0;
  std::vector<std::string> warnings;
};

/// Out-of-fold predictions: for each fold, models trained on every other
/// fold's observations predict this fold's observations. K = 1 trains and
/// predicts on the full sample.
NuisanceFits crossfit_nuisance(const PanelDataset& panel, const LearnerSpec& g_spec, const LearnerSpec& m_spec,
                               const FoldAssignment& folds, double clip_eps, std::uint64_t seed, int threads = 1);

/// Clips into [eps, 1 - eps] in place and returns how many entries moved.
/// eps = 0 disables clipping, so a linear probability model's residuals stay
/// exactly orthogonal to the features.
int clip_propensities(Eigen::VectorXd& m_hat, double eps);

struct ResidualPanel {
  Eigen::VectorXd y_tilde;
  Eigen::VectorXd d_tilde;
  std::shared_ptr<const PanelDataset> panel;
  std::shared_ptr<const NuisanceFits> fits;
};

/// y_tilde = Y - g_hat and d_tilde = D - m_hat, entrywise.
ResidualPanel residualize(std::shared_ptr<const PanelDataset> panel, std::shared_ptr<const NuisanceFits> fits);

}  // namespace sdidml
