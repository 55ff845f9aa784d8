#include "sdidml/monte_carlo.hpp"

#include "sdidml/diagnostics.hpp"
#include "sdidml/error.hpp"
#include "sdidml/parallel.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>

namespace sdidml {

std::string to_string(Method m) {
  switch (m) {
    case Method::SDidml: return "sdidml";
    case Method::Twfe: return "twfe";
    case Method::UnadjustedDid: return "unadjusted_did";
  }
  return "sdidml";
}

std::uint64_t estimator_seed(std::uint64_t seed, int rep) {
  return derive_seed(seed ^ 0x9E3779B97F4A7C15ULL, static_cast<std::uint64_t>(rep));
}

namespace {

double unadjusted_did(std::shared_ptr<const PanelDataset> panel, const ContrastOptions& contrast, double ci_level) {
  auto fits = std::make_shared<NuisanceFits>();
  fits->g_hat = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(panel->n_obs()));
  fits->m_hat = fits->g_hat;
  fits->folds.k = 1;
  fits->folds.fold_of_unit.assign(panel->n_units(), 0);
  const ResidualPanel resid = residualize(std::move(panel), std::move(fits));
  return aggregate(estimate_group_time(resid, contrast), ci_level).overall.att;
}

RepRecord run_rep(const DGPConfig& dgp, const MonteCarloOptions& options, int rep, std::uint64_t seed) {
  RepRecord rec;
  rec.rep = rep;
  DGPConfig config = dgp;
  config.seed = derive_seed(seed, static_cast<std::uint64_t>(rep));
  rec.seed = config.seed;
  OraclePanel oracle = generate(config);
  rec.truth = oracle.true_overall_att;
  auto panel = std::make_shared<const PanelDataset>(std::move(oracle.panel));

  PipelineConfig pc = options.pipeline;
  pc.seed = estimator_seed(seed, rep);
  pc.threads = 1;
  for (Method m : options.methods) {
    MethodRecord mr;
    if (m == Method::Twfe) {
      const TwfeResult tw = twfe_baseline(*panel, pc.demean);
      boost::math::normal normal;
      const double z = boost::math::quantile(normal, 0.5 + pc.ci_level / 2.0);
      mr.estimate = tw.tau;
      mr.ci_low = tw.tau - z * tw.se;
      mr.ci_high = tw.tau + z * tw.se;
    } else if (m == Method::UnadjustedDid) {
      mr.estimate = unadjusted_did(panel, pc.contrast, pc.ci_level);
    } else {
      PipelineResult point = run_pipeline(panel, pc);
      mr.estimate = point.aggregated.overall.att;
      rec.min_weight = std::min(rec.min_weight, point.aggregated.min_weight);
      rec.max_weight_sum_error = std::max(rec.max_weight_sum_error, point.aggregated.max_weight_sum_error);
      if (options.bootstrap) {
        BootstrapOptions bo = *options.bootstrap;
        bo.seed = pc.seed << 16;  // replicate streams of neighbouring reps never overlap
        bo.threads = 1;
        const BootstrapResult boot = bootstrap(point, pc, bo);
        rec.min_weight = std::min(rec.min_weight, boot.min_weight);
        rec.max_weight_sum_error = std::max(rec.max_weight_sum_error, boot.max_weight_sum_error);
        if (const auto it = boot.quantities.find("overall"); it != boot.quantities.end()) {
          mr.ci_low = it->second.ci_low;
          mr.ci_high = it->second.ci_high;
        }
        if (options.pretrend) rec.pretrend_p = pretrend_test(point.effects, event_time_ses(boot)).p_value;
      }
      if (options.placebo_shift) {
        const PlaceboReport pl = placebo_test(*panel, pc, *options.placebo_shift);
        rec.placebo_att = pl.pseudo_att;
      }
    }
    rec.methods[m] = mr;
  }
  return rec;
}

}  // namespace

MonteCarloResult monte_carlo(const DGPConfig& dgp, const MonteCarloOptions& options, int reps, std::uint64_t seed) {
  if (reps < 1) throw Error(ErrorCode::InvalidConfig, "reps must be >= 1");
  if (options.pretrend && !options.bootstrap)
    throw Error(ErrorCode::InvalidConfig, "the pretrend test needs bootstrap standard errors");
  validate(dgp);
  MonteCarloResult out;
  out.records.resize(static_cast<std::size_t>(reps));
  parallel_for(static_cast<std::size_t>(reps), options.threads, [&](std::size_t r) {
    try {
      out.records[r] = run_rep(dgp, options, static_cast<int>(r), seed);
    } catch (const Error& e) {
      rethrow_with_context(e, "rep " + std::to_string(r));
    }
  });

  for (Method m : options.methods) {
    MethodSummary s;
    double sq = 0.0;
    int covered = 0;
    for (const auto& rec : out.records) {
      const MethodRecord& mr = rec.methods.at(m);
      const double err = mr.estimate - rec.truth;
      s.mean_estimate += mr.estimate;
      s.bias += err;
      sq += err * err;
      if (mr.ci_low && mr.ci_high) {
        ++s.n_intervals;
        if (*mr.ci_low <= rec.truth && rec.truth <= *mr.ci_high) ++covered;
      }
    }
    s.mean_estimate /= reps;
    s.bias /= reps;
    s.rmse = std::sqrt(sq / reps);
    if (s.n_intervals > 0) s.coverage = static_cast<double>(covered) / s.n_intervals;
    out.summary[m] = s;
  }
  for (const auto& rec : out.records) {
    out.min_weight = std::min(out.min_weight, rec.min_weight);
    out.max_weight_sum_error = std::max(out.max_weight_sum_error, rec.max_weight_sum_error);
  }
  return out;
}

}  // namespace sdidml
