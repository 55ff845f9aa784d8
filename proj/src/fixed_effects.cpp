#include "sdidml/fixed_effects.hpp"

#include "sdidml/error.hpp"

#include <algorithm>
#include <cmath>

namespace sdidml {

namespace {

// Subtracts group means in place; returns the largest |mean| removed.
double sweep(Eigen::MatrixXd& values, const std::vector<int>& group, int n_groups, const std::vector<double>& count) {
  double largest = 0.0;
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(n_groups, values.cols());
  for (Eigen::Index i = 0; i < values.rows(); ++i) sums.row(group[static_cast<std::size_t>(i)]) += values.row(i);
  for (int g = 0; g < n_groups; ++g)
    if (count[static_cast<std::size_t>(g)] > 0) sums.row(g) /= count[static_cast<std::size_t>(g)];
  for (Eigen::Index i = 0; i < values.rows(); ++i) values.row(i) -= sums.row(group[static_cast<std::size_t>(i)]);
  if (sums.size() > 0) largest = sums.cwiseAbs().maxCoeff();
  return largest;
}

}  // namespace

DemeanResult demean_two_way(const Eigen::MatrixXd& values, const std::vector<int>& first,
                            const std::vector<int>& second, const DemeanOptions& options) {
  const auto n = static_cast<std::size_t>(values.rows());
  if (first.size() != n || second.size() != n)
    throw Error(ErrorCode::DimensionMismatch, "fixed-effect ids do not match the number of rows");

  const int n_first = first.empty() ? 0 : *std::max_element(first.begin(), first.end()) + 1;
  const int n_second = second.empty() ? 0 : *std::max_element(second.begin(), second.end()) + 1;
  std::vector<double> count_first(static_cast<std::size_t>(n_first)), count_second(static_cast<std::size_t>(n_second));
  for (std::size_t i = 0; i < n; ++i) {
    count_first[static_cast<std::size_t>(first[i])] += 1;
    count_second[static_cast<std::size_t>(second[i])] += 1;
  }

  DemeanResult out;
  out.values = values;
  const double scale = std::max(1.0, values.size() > 0 ? values.cwiseAbs().maxCoeff() : 0.0);
  const double tol = options.tol * scale;
  for (int s = 1; s <= options.max_sweeps; ++s) {
    sweep(out.values, first, n_first, count_first);
    sweep(out.values, second, n_second, count_second);
    out.sweeps = s;
    // after the second sweep its own group means are ~0; the first
    // dimension's means measure how far from the joint projection we are
    Eigen::MatrixXd check = out.values;
    const double first_means = sweep(check, first, n_first, count_first);
    Eigen::MatrixXd check2 = out.values;
    const double second_means = sweep(check2, second, n_second, count_second);
    out.residual = std::max(first_means, second_means);
    if (out.residual < tol) return out;
  }
  throw Error(ErrorCode::NonConvergence, "two-way demeaning did not converge in " +
                                             std::to_string(options.max_sweeps) + " sweeps (residual " +
                                             std::to_string(out.residual) + ")");
}

}  // namespace sdidml
