#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace sdidml {

struct MeanSpec {
  friend bool operator==(const MeanSpec&, const MeanSpec&) = default;
};

struct RidgeSpec {
  double lambda = 1.0;
  friend bool operator==(const RidgeSpec&, const RidgeSpec&) = default;
};

/// Objective: (1/2n)||y - a - Xb||^2 + lambda * ||b||_1.
struct LassoSpec {
  double lambda = 0.1;
  int max_iter = 10000;
  double tol = 1e-8;
  friend bool operator==(const LassoSpec&, const LassoSpec&) = default;
};

struct GradientBoostedTreesSpec {
  int n_trees = 100;
  int max_depth = 3;
  double learning_rate = 0.1;
  int min_leaf = 20;
  /// Row fraction drawn (without replacement, seeded) per tree; 1 = all rows.
  double subsample = 1.0;
  friend bool operator==(const GradientBoostedTreesSpec&, const GradientBoostedTreesSpec&) = default;
};

/// Objective: mean log-loss + (lambda/2)||b||^2, intercept unpenalized.
struct LogisticSpec {
  double lambda = 0.0;
  int max_iter = 100;
  double tol = 1e-10;
  friend bool operator==(const LogisticSpec&, const LogisticSpec&) = default;
};

using LearnerSpec = std::variant<MeanSpec, RidgeSpec, LassoSpec, GradientBoostedTreesSpec, LogisticSpec>;

std::string learner_name(const LearnerSpec& spec);

/// Throws InvalidHyperparameter when a field is outside its domain.
void validate(const LearnerSpec& spec);

struct LinearParameters {
  double intercept = 0.0;
  Eigen::VectorXd coefficients;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;  // rows with x <= threshold go left
  int left = -1;
  int right = -1;
  double value = 0.0;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  double predict(const double* row, Eigen::Index stride) const;
};

struct TreeEnsemble {
  double base_score = 0.0;
  double learning_rate = 0.1;
  std::vector<RegressionTree> trees;
};

struct TrainingDiagnostics {
  int iterations = 0;
  double objective = 0.0;
  bool converged = true;
  std::optional<std::string> warning;
  /// Boosting: training loss (mean squared error) after each stage, starting
  /// with the base score.
  std::vector<double> loss_path;
};

class FittedModel {
 public:
  FittedModel(LearnerSpec spec, Eigen::Index n_features, std::variant<LinearParameters, TreeEnsemble> params,
              TrainingDiagnostics diagnostics)
      : spec_(std::move(spec)),
        n_features_(n_features),
        params_(std::move(params)),
        diagnostics_(std::move(diagnostics)) {}

  const LearnerSpec& spec() const { return spec_; }
  Eigen::Index n_features() const { return n_features_; }
  const TrainingDiagnostics& diagnostics() const { return diagnostics_; }

  const LinearParameters* linear() const { return std::get_if<LinearParameters>(&params_); }
  const TreeEnsemble* ensemble() const { return std::get_if<TreeEnsemble>(&params_); }

 private:
  LearnerSpec spec_;
  Eigen::Index n_features_;
  std::variant<LinearParameters, TreeEnsemble> params_;
  TrainingDiagnostics diagnostics_;
};

/// Deterministic given (spec, data, seed). Non-convergence is reported in
/// diagnostics().warning rather than thrown.
FittedModel fit(const LearnerSpec& spec, const Eigen::MatrixXd& features, const Eigen::VectorXd& targets,
                std::uint64_t seed = 0);

/// Logistic models return probabilities in (0, 1).
Eigen::VectorXd predict(const FittedModel& model, const Eigen::MatrixXd& features);

// Used by fit(); exposed for tests.
FittedModel fit_boosted_trees(const GradientBoostedTreesSpec& spec, const Eigen::MatrixXd& features,
                              const Eigen::VectorXd& targets, std::uint64_t seed);

}  // namespace sdidml
