// Acceptance suite: one PASS/FAIL line per criterion.
// Usage: acceptance [criterion numbers...]   (default: all)

#include "sdidml/bootstrap.hpp"
#include "sdidml/crossfit.hpp"
#include "sdidml/diagnostics.hpp"
#include "sdidml/monte_carlo.hpp"
#include "sdidml/pipeline.hpp"
#include "sdidml/serialization.hpp"
#include "sdidml/simulate.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace sdidml;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

// Criterion 8 collects weights from every Monte Carlo run in this process.
double g_min_weight = 1.0;
double g_max_sum_error = 0.0;
int g_weight_runs = 0;

void record_weights(const MonteCarloResult& r) {
  g_min_weight = std::min(g_min_weight, r.min_weight);
  g_max_sum_error = std::max(g_max_sum_error, r.max_weight_sum_error);
  ++g_weight_runs;
}

int threads() {
  const char* env = std::getenv("SDIDML_THREADS");
  return env ? std::atoi(env) : 0;
}

// A single-period cross-section stored as a one-period panel.
PanelDataset cross_section(int n, int p, std::uint64_t seed, Eigen::MatrixXd& x, Eigen::VectorXd& y,
                           Eigen::VectorXd& d) {
  Rng rng(seed);
  x.resize(n, p);
  y.resize(n);
  d.resize(n);
  std::vector<PanelObservation> rows;
  for (int i = 0; i < n; ++i) {
    std::vector<double> cov(static_cast<std::size_t>(p));
    double index = 0.0;
    for (int j = 0; j < p; ++j) {
      cov[static_cast<std::size_t>(j)] = rng.normal();
      x(i, j) = cov[static_cast<std::size_t>(j)];
      index += cov[static_cast<std::size_t>(j)] / (j + 1);
    }
    d(i) = rng.uniform() < 1.0 / (1.0 + std::exp(-index)) ? 1.0 : 0.0;
    y(i) = 1.5 * d(i) + 2.0 * index + rng.normal();
    char id[16];
    std::snprintf(id, sizeof id, "c%03d", i);
    rows.push_back({id, 1, y(i), static_cast<int>(d(i)), cov});
  }
  std::vector<std::string> names;
  for (int j = 0; j < p; ++j) names.push_back("x" + std::to_string(j + 1));
  return build_panel(std::move(rows), names);
}

Outcome criterion1() {
  Eigen::MatrixXd x;
  Eigen::VectorXd y, d;
  auto panel = std::make_shared<const PanelDataset>(cross_section(300, 10, 11, x, y, d));
  const FoldAssignment folds = assign_folds(*panel, 1, 0);
  auto fits = std::make_shared<const NuisanceFits>(crossfit_nuisance(*panel, RidgeSpec{0.0}, RidgeSpec{0.0}, folds, 0.0, 0));
  const ResidualPanel r = residualize(panel, fits);
  const double slope = r.d_tilde.dot(r.y_tilde) / r.d_tilde.squaredNorm();

  Eigen::MatrixXd design(300, 12);
  design.col(0).setOnes();
  design.col(1) = d;
  design.rightCols(10) = x;
  const Eigen::VectorXd beta = design.colPivHouseholderQr().solve(y);
  const double rel = std::abs(slope - beta(1)) / std::abs(beta(1));
  return {rel < 1e-8, "second-stage slope " + num(slope, 12) + " vs joint OLS " + num(beta(1), 12) +
                          ", relative error " + num(rel, 3)};
}

Outcome criterion2() {
  DGPConfig c = scenario("S1");
  c.seed = 21;
  auto panel = std::make_shared<const PanelDataset>(generate(c).panel);
  const Eigen::MatrixXd features = nuisance_features(*panel);
  const double n = static_cast<double>(panel->n_obs());

  // in-sample OLS residuals are orthogonal to every feature column
  const FoldAssignment one = assign_folds(*panel, 1, 0);
  auto fits = std::make_shared<const NuisanceFits>(crossfit_nuisance(*panel, RidgeSpec{0.0}, RidgeSpec{0.0}, one, 0.0, 0));
  const ResidualPanel r = residualize(panel, fits);
  double worst = 0.0;
  for (const Eigen::VectorXd* res : {&r.y_tilde, &r.d_tilde}) {
    const Eigen::VectorXd centered = res->array() - res->mean();
    for (Eigen::Index j = 0; j < features.cols(); ++j) {
      const Eigen::VectorXd col = features.col(j).array() - features.col(j).mean();
      worst = std::max(worst, std::abs(centered.dot(col)) / n);
    }
  }

  // out-of-fold purity: perturbing fold k's outcomes leaves fold k's
  // predictions unchanged and moves every other fold's predictions
  bool pure = true;
  const FoldAssignment five = assign_folds(*panel, 5, 3);
  const std::vector<LearnerSpec> learners{RidgeSpec{1.0}, GradientBoostedTreesSpec{30, 3, 0.1, 20, 1.0}};
  for (const LearnerSpec& spec : learners) {
    const NuisanceFits base = crossfit_nuisance(*panel, spec, LogisticSpec{1e-3}, five, 0.01, 5);
    for (int k = 0; k < five.k && pure; ++k) {
      std::vector<PanelObservation> rows = panel->observations();
      for (std::size_t i = 0; i < rows.size(); ++i)
        if (five.fold_of_unit[panel->unit_index_of_obs(i)] == k) rows[i].outcome += 10.0 + rows[i].time;
      const PanelDataset perturbed = build_panel(std::move(rows), panel->covariate_names());
      const NuisanceFits moved = crossfit_nuisance(perturbed, spec, LogisticSpec{1e-3}, five, 0.01, 5);
      bool others_moved = false;
      for (Eigen::Index i = 0; i < base.g_hat.size(); ++i) {
        const bool own = five.fold_of_unit[panel->unit_index_of_obs(static_cast<std::size_t>(i))] == k;
        if (own && moved.g_hat(i) != base.g_hat(i)) pure = false;
        if (!own && moved.g_hat(i) != base.g_hat(i)) others_moved = true;
      }
      pure = pure && others_moved;
    }
  }
  return {worst < 1e-8 && pure,
          "max |cov(residual, feature)|/n = " + num(worst, 3) + "; out-of-fold purity " + (pure ? "holds" : "violated")};
}

Outcome criterion3() {
  DGPConfig c = scenario("S1");
  c.noise_sd = 0.0;
  c.effect = HomogeneousEffect{2.0};
  c.seed = 31;
  auto panel = std::make_shared<const PanelDataset>(generate(c).panel);
  PipelineConfig pc;
  pc.g_learner = RidgeSpec{1e-8};
  pc.m_learner = RidgeSpec{1e-8};
  pc.seed = 31;
  const PipelineResult res = run_pipeline(panel, pc);
  const double err = std::abs(res.aggregated.overall.att - 2.0);
  return {err < 1e-4, "overall ATT " + num(res.aggregated.overall.att, 12) + ", |error| " + num(err, 3)};
}

MonteCarloOptions s1_options() {
  MonteCarloOptions mc;
  mc.methods = {Method::SDidml};
  mc.bootstrap = BootstrapOptions{199, BootstrapMode::FixedNuisance, 0, 1};
  mc.threads = threads();
  return mc;
}

std::optional<MonteCarloResult> g_s1;

Outcome criterion4() {
  const DGPConfig dgp = scenario("S1");
  g_s1 = monte_carlo(dgp, s1_options(), 100, 4000);
  record_weights(*g_s1);
  const MethodSummary& s = g_s1->summary.at(Method::SDidml);
  const bool pass = std::abs(s.bias) < 0.05 * 1.0 && s.coverage && *s.coverage >= 0.88 && *s.coverage <= 0.99;
  return {pass, "bias " + num(s.bias) + " (limit 0.05), RMSE " + num(s.rmse) + ", coverage " +
                    num(s.coverage.value_or(-1)) + " (target [0.88, 0.99])"};
}

Outcome criterion5() {
  MonteCarloOptions mc;
  mc.methods = {Method::SDidml, Method::Twfe};
  mc.threads = threads();
  const MonteCarloResult r = monte_carlo(scenario("S2"), mc, 100, 5000);
  record_weights(r);
  const MethodSummary& a = r.summary.at(Method::SDidml);
  const MethodSummary& b = r.summary.at(Method::Twfe);
  const bool pass = std::abs(a.bias) < std::abs(b.bias) && a.rmse < b.rmse;
  return {pass, "S-DIDML bias " + num(a.bias) + " RMSE " + num(a.rmse) + "; TWFE bias " + num(b.bias) + " RMSE " +
                    num(b.rmse)};
}

Outcome criterion6() {
  MonteCarloOptions mc;
  mc.methods = {Method::SDidml, Method::UnadjustedDid};
  mc.pipeline.g_learner = GradientBoostedTreesSpec{};
  mc.pipeline.m_learner = GradientBoostedTreesSpec{};
  mc.threads = threads();
  const MonteCarloResult r = monte_carlo(scenario("S3"), mc, 25, 6000);
  record_weights(r);
  const double a = r.summary.at(Method::SDidml).bias;
  const double b = r.summary.at(Method::UnadjustedDid).bias;
  return {std::abs(a) < 0.5 * std::abs(b), "S-DIDML bias " + num(a) + ", unadjusted DID bias " + num(b) +
                                               ", ratio " + num(std::abs(a) / std::abs(b))};
}

Outcome criterion7() {
  MonteCarloOptions mc = s1_options();
  mc.pretrend = true;
  mc.placebo_shift = 1;
  const MonteCarloResult r = monte_carlo(scenario("S4"), mc, 200, 7000);
  record_weights(r);
  double mean = 0.0, sq = 0.0;
  int rejected = 0;
  for (const auto& rec : r.records) {
    mean += *rec.placebo_att;
    if (*rec.pretrend_p < 0.05) ++rejected;
  }
  const double n = static_cast<double>(r.records.size());
  mean /= n;
  for (const auto& rec : r.records) sq += (*rec.placebo_att - mean) * (*rec.placebo_att - mean);
  const double mc_se = std::sqrt(sq / (n - 1.0) / n);
  const double size = rejected / n;
  const bool pass = std::abs(mean) <= 3.0 * mc_se && size <= 0.15;
  return {pass, "placebo mean " + num(mean) + " (3 MC SE = " + num(3.0 * mc_se) + "), pretrend size " + num(size) +
                    " (limit 0.15)"};
}

Outcome criterion8() {
  if (g_weight_runs == 0) return {false, "no Monte Carlo run in this invocation (run together with 4-7)"};
  const bool pass = g_min_weight >= 0.0 && g_max_sum_error <= 1e-12;
  return {pass, "over " + std::to_string(g_weight_runs) + " Monte Carlo runs: min weight " + num(g_min_weight) +
                    ", max |sum - 1| " + num(g_max_sum_error, 3)};
}

Outcome criterion9() {
  if (!g_s1) g_s1 = monte_carlo(scenario("S1"), s1_options(), 100, 4000);
  MonteCarloOptions again = s1_options();
  again.threads = 2;  // a different schedule must not change anything
  const MonteCarloResult r = monte_carlo(scenario("S1"), again, 100, 4000);
  record_weights(r);
  const std::string a = to_json(*g_s1).dump();
  const std::string b = to_json(r).dump();
  bool identical = a == b;
  for (std::size_t i = 0; identical && i < r.records.size(); ++i) {
    const auto& x = g_s1->records[i].methods.at(Method::SDidml);
    const auto& y = r.records[i].methods.at(Method::SDidml);
    identical = std::memcmp(&x.estimate, &y.estimate, sizeof(double)) == 0 && x.ci_low == y.ci_low &&
                x.ci_high == y.ci_high && g_s1->records[i].truth == r.records[i].truth;
  }
  return {identical, identical ? "repeat reproduced all " + std::to_string(a.size()) + " bytes of output"
                               : "repeat differs from the first run"};
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    std::string name;
    std::function<Outcome()> run;
    double limit_seconds;
  };
  const double none = 1e30;
  const std::vector<Criterion> criteria{
      {"FWL exact equivalence", criterion1, 1},
      {"orthogonality suite", criterion2, 5},
      {"noiseless exact recovery", criterion3, 10},
      {"S1 Monte Carlo bias and coverage", criterion4, 600},
      {"S2 TWFE-bias demonstration", criterion5, 600},
      {"S3 high-dimensional run", criterion6, 1200},
      {"S4 null calibration", criterion7, 900},
      {"aggregation-weight invariant", criterion8, none},
      {"determinism", criterion9, none},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > criteria[i].limit_seconds) {
      o.pass = false;
      o.detail += "; exceeded the " + num(criteria[i].limit_seconds) + " s runtime limit";
    }
    if (!o.pass) ++failures;
    std::printf("[%s] criterion %d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, criteria[i].name.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
