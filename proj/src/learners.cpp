#include "sdidml/learners.hpp"

#include "sdidml/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sdidml {

namespace {

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

void check_inputs(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.rows() != y.size())
    throw Error(ErrorCode::DimensionMismatch,
                std::to_string(x.rows()) + " feature rows vs " + std::to_string(y.size()) + " targets");
  if (x.rows() < 1) throw Error(ErrorCode::DimensionMismatch, "no training rows");
  if (!x.allFinite() || !y.allFinite()) throw Error(ErrorCode::NonFiniteInput, "features or targets contain NaN/Inf");
}

double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

FittedModel fit_mean(const MeanSpec& spec, const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  LinearParameters params{y.mean(), Eigen::VectorXd::Zero(x.cols())};
  TrainingDiagnostics diag;
  diag.objective = (y.array() - params.intercept).square().mean();
  return FittedModel(spec, x.cols(), std::move(params), std::move(diag));
}

FittedModel fit_ridge(const RidgeSpec& spec, const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  const Eigen::RowVectorXd x_mean = x.colwise().mean();
  const double y_mean = y.mean();
  const Eigen::MatrixXd xc = x.rowwise() - x_mean;
  const Eigen::VectorXd yc = y.array() - y_mean;

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(x.cols());
  if (x.cols() > 0) {
    if (spec.lambda == 0.0) {
      // solve the least-squares problem directly for accuracy
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xc);
      if (qr.rank() < x.cols())
        throw Error(ErrorCode::SingularSystem,
                    "ridge with lambda=0 on rank-deficient features (rank " + std::to_string(qr.rank()) + " < " +
                        std::to_string(x.cols()) + ")");
      beta = qr.solve(yc);
    } else {
      Eigen::MatrixXd gram = xc.transpose() * xc;
      gram.diagonal().array() += spec.lambda;
      Eigen::LLT<Eigen::MatrixXd> llt(gram);
      if (llt.info() != Eigen::Success) throw Error(ErrorCode::SingularSystem, "ridge normal equations");
      beta = llt.solve(xc.transpose() * yc);
    }
  }
  TrainingDiagnostics diag;
  diag.objective = (yc - xc * beta).squaredNorm() + spec.lambda * beta.squaredNorm();
  const double intercept = y_mean - x_mean.dot(beta);
  return FittedModel(spec, x.cols(), LinearParameters{intercept, std::move(beta)}, std::move(diag));
}

FittedModel fit_lasso(const LassoSpec& spec, const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  const auto n = static_cast<double>(x.rows());
  const Eigen::RowVectorXd x_mean = x.colwise().mean();
  const double y_mean = y.mean();
  const Eigen::MatrixXd xc = x.rowwise() - x_mean;
  const Eigen::VectorXd col_sq = xc.colwise().squaredNorm().transpose() / n;

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(x.cols());
  Eigen::VectorXd resid = y.array() - y_mean;
  TrainingDiagnostics diag;
  diag.converged = false;
  for (int iter = 1; iter <= spec.max_iter; ++iter) {
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (col_sq(j) == 0.0) continue;
      const double rho = xc.col(j).dot(resid) / n + col_sq(j) * beta(j);
      double updated = 0.0;
      if (rho > spec.lambda)
        updated = (rho - spec.lambda) / col_sq(j);
      else if (rho < -spec.lambda)
        updated = (rho + spec.lambda) / col_sq(j);
      const double change = updated - beta(j);
      if (change != 0.0) {
        resid.noalias() -= change * xc.col(j);
        beta(j) = updated;
        max_change = std::max(max_change, std::abs(change));
      }
    }
    diag.iterations = iter;
    if (max_change < spec.tol) {
      diag.converged = true;
      break;
    }
  }
  if (!diag.converged)
    diag.warning = "NonConvergence: lasso reached max_iter=" + std::to_string(spec.max_iter);
  diag.objective = resid.squaredNorm() / (2.0 * n) + spec.lambda * beta.lpNorm<1>();
  const double intercept = y_mean - x_mean.dot(beta);
  return FittedModel(spec, x.cols(), LinearParameters{intercept, std::move(beta)}, std::move(diag));
}

FittedModel fit_logistic(const LogisticSpec& spec, const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  for (Eigen::Index i = 0; i < y.size(); ++i)
    if (y(i) != 0.0 && y(i) != 1.0) throw Error(ErrorCode::InvalidValue, "logistic targets must be 0 or 1");

  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  const double nd = static_cast<double>(n);
  // column 0 is the intercept
  Eigen::MatrixXd design(n, p + 1);
  design.col(0).setOnes();
  design.rightCols(p) = x;

  Eigen::VectorXd penalty = Eigen::VectorXd::Constant(p + 1, spec.lambda);
  penalty(0) = 0.0;

  auto objective = [&](const Eigen::VectorXd& w) {
    const Eigen::VectorXd eta = design * w;
    double loss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) loss += softplus(eta(i)) - y(i) * eta(i);
    return loss / nd + 0.5 * (penalty.array() * w.array().square()).sum();
  };

  Eigen::VectorXd w = Eigen::VectorXd::Zero(p + 1);
  const double ybar = y.mean();
  if (ybar > 0.0 && ybar < 1.0) w(0) = std::log(ybar / (1.0 - ybar));
  double current = objective(w);

  TrainingDiagnostics diag;
  diag.converged = false;
  for (int iter = 1; iter <= spec.max_iter; ++iter) {
    const Eigen::VectorXd eta = design * w;
    Eigen::VectorXd prob(n), weight(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      prob(i) = sigmoid(eta(i));
      weight(i) = prob(i) * (1.0 - prob(i));
    }
    const Eigen::VectorXd grad = design.transpose() * (prob - y) / nd + (penalty.array() * w.array()).matrix();
    Eigen::MatrixXd hess = design.transpose() * weight.asDiagonal() * design / nd;
    hess.diagonal() += penalty;
    hess.diagonal().array() += 1e-12;
    const Eigen::VectorXd step = hess.ldlt().solve(grad);

    // damped Newton: halve the step until the objective does not increase
    double scale = 1.0;
    Eigen::VectorXd candidate = w - step;
    double value = objective(candidate);
    for (int halvings = 0; halvings < 40 && !(value <= current); ++halvings) {
      scale *= 0.5;
      candidate = w - scale * step;
      value = objective(candidate);
    }
    diag.iterations = iter;
    if (!(value <= current)) {
      diag.converged = true;  // no descent direction left at machine precision
      break;
    }
    const double change = (scale * step).cwiseAbs().maxCoeff();
    w = std::move(candidate);
    current = value;
    if (change < spec.tol) {
      diag.converged = true;
      break;
    }
  }
  if (!diag.converged)
    diag.warning = "NonConvergence: logistic reached max_iter=" + std::to_string(spec.max_iter);
  diag.objective = current;
  LinearParameters params{w(0), w.tail(p)};
  return FittedModel(spec, p, std::move(params), std::move(diag));
}

}  // namespace

std::string learner_name(const LearnerSpec& spec) {
  return std::visit(Overloaded{[](const MeanSpec&) { return std::string("mean"); },
                               [](const RidgeSpec&) { return std::string("ridge"); },
                               [](const LassoSpec&) { return std::string("lasso"); },
                               [](const GradientBoostedTreesSpec&) { return std::string("gbt"); },
                               [](const LogisticSpec&) { return std::string("logistic"); }},
                    spec);
}

void validate(const LearnerSpec& spec) {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::InvalidHyperparameter, what); };
  std::visit(Overloaded{[](const MeanSpec&) {},
                        [&](const RidgeSpec& s) {
                          if (!(s.lambda >= 0.0) || !std::isfinite(s.lambda)) bad("ridge lambda must be >= 0");
                        },
                        [&](const LassoSpec& s) {
                          if (!(s.lambda >= 0.0) || !std::isfinite(s.lambda)) bad("lasso lambda must be >= 0");
                          if (s.max_iter < 1) bad("lasso max_iter must be >= 1");
                          if (!(s.tol > 0.0)) bad("lasso tol must be > 0");
                        },
                        [&](const GradientBoostedTreesSpec& s) {
                          if (s.n_trees < 1) bad("gbt n_trees must be >= 1");
                          if (s.max_depth < 1) bad("gbt max_depth must be >= 1");
                          if (!(s.learning_rate > 0.0 && s.learning_rate <= 1.0)) bad("gbt learning_rate must be in (0,1]");
                          if (s.min_leaf < 1) bad("gbt min_leaf must be >= 1");
                          if (!(s.subsample > 0.0 && s.subsample <= 1.0)) bad("gbt subsample must be in (0,1]");
                        },
                        [&](const LogisticSpec& s) {
                          if (!(s.lambda >= 0.0) || !std::isfinite(s.lambda)) bad("logistic lambda must be >= 0");
                          if (s.max_iter < 1) bad("logistic max_iter must be >= 1");
                          if (!(s.tol > 0.0)) bad("logistic tol must be > 0");
                        }},
             spec);
}

FittedModel fit(const LearnerSpec& spec, const Eigen::MatrixXd& features, const Eigen::VectorXd& targets,
                std::uint64_t seed) {
  validate(spec);
  check_inputs(features, targets);
  return std::visit(Overloaded{[&](const MeanSpec& s) { return fit_mean(s, features, targets); },
                               [&](const RidgeSpec& s) { return fit_ridge(s, features, targets); },
                               [&](const LassoSpec& s) { return fit_lasso(s, features, targets); },
                               [&](const GradientBoostedTreesSpec& s) {
                                 return fit_boosted_trees(s, features, targets, seed);
                               },
                               [&](const LogisticSpec& s) { return fit_logistic(s, features, targets); }},
                    spec);
}

Eigen::VectorXd predict(const FittedModel& model, const Eigen::MatrixXd& features) {
  if (features.cols() != model.n_features())
    throw Error(ErrorCode::DimensionMismatch, "model trained on " + std::to_string(model.n_features()) +
                                                  " features, got " + std::to_string(features.cols()));
  if (const auto* lin = model.linear()) {
    Eigen::VectorXd eta = (features * lin->coefficients).array() + lin->intercept;
    if (std::holds_alternative<LogisticSpec>(model.spec()))
      for (Eigen::Index i = 0; i < eta.size(); ++i)
        eta(i) = std::clamp(sigmoid(eta(i)), std::numeric_limits<double>::min(), 1.0 - 0x1p-53);
    return eta;
  }
  const TreeEnsemble& ens = *model.ensemble();
  // row-major copy so each row is contiguous during traversal
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows = features;
  Eigen::VectorXd out(features.rows());
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    double value = ens.base_score;
    for (const auto& tree : ens.trees) value += ens.learning_rate * tree.predict(rows.row(i).data(), 1);
    out(i) = value;
  }
  return out;
}

}  // namespace sdidml
