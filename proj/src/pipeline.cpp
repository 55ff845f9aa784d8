#include "sdidml/pipeline.hpp"

#include "sdidml/error.hpp"

namespace sdidml {

std::string to_string(EstimatorForm form) {
  return form == EstimatorForm::Contrast ? "contrast" : "interacted_regression";
}

EstimatorForm estimator_form_from_string(const std::string& name) {
  if (name == "contrast" || name == "Contrast") return EstimatorForm::Contrast;
  if (name == "interacted_regression" || name == "InteractedRegression") return EstimatorForm::InteractedRegression;
  throw Error(ErrorCode::InvalidConfig, "unknown estimator '" + name + "'");
}

GroupTimeEffects estimate_cells(const ResidualPanel& residuals, const PipelineConfig& config) {
  if (config.estimator == EstimatorForm::InteractedRegression)
    return estimate_interacted_regression(residuals, config.demean);
  return estimate_group_time(residuals, config.contrast);
}

PipelineResult run_pipeline(std::shared_ptr<const PanelDataset> panel, const PipelineConfig& config) {
  PipelineResult out;
  const FoldAssignment folds = assign_folds(*panel, config.k, config.seed);
  out.fits = std::make_shared<const NuisanceFits>(crossfit_nuisance(*panel, config.g_learner, config.m_learner, folds,
                                                                    config.clip_eps, config.seed, config.threads));
  out.panel = panel;
  out.residuals = residualize(std::move(panel), out.fits);
  out.effects = estimate_cells(out.residuals, config);
  out.aggregated = aggregate(out.effects, config.ci_level);
  return out;
}

}  // namespace sdidml
