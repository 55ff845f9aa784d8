#pragma once

#include <Eigen/Dense>

#include <vector>

namespace sdidml {

struct DemeanOptions {
  double tol = 1e-10;
  int max_sweeps = 10000;
};

struct DemeanResult {
  Eigen::MatrixXd values;
  int sweeps = 0;
  /// Largest |group mean| over both dimensions after the last sweep.
  double residual = 0.0;
};

/// Within transformation for two crossed fixed effects by alternating
/// projections: repeatedly subtract group means over `first`, then over
/// `second`, until every group mean of every column is below tol (scaled by
/// max(1, largest |value| of the input)). Throws NonConvergence.
DemeanResult demean_two_way(const Eigen::MatrixXd& values, const std::vector<int>& first,
                            const std::vector<int>& second, const DemeanOptions& options = {});

}  // namespace sdidml
