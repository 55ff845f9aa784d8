#pragma once

#include "sdidml/aggregate.hpp"
#include "sdidml/crossfit.hpp"
#include "sdidml/didcore.hpp"
#include "sdidml/learners.hpp"

#include <cstdint>
#include <memory>

namespace sdidml {

enum class EstimatorForm { Contrast, InteractedRegression };

std::string to_string(EstimatorForm form);
EstimatorForm estimator_form_from_string(const std::string& name);

/// Everything needed to go from a panel to aggregated effects.
struct PipelineConfig {
  LearnerSpec g_learner = RidgeSpec{1.0};
  LearnerSpec m_learner = LogisticSpec{1e-3};  // a small penalty keeps Newton finite under separation
  int k = 5;
  double clip_eps = 0.01;
  ContrastOptions contrast;
  EstimatorForm estimator = EstimatorForm::Contrast;
  DemeanOptions demean;
  double ci_level = 0.95;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct PipelineResult {
  std::shared_ptr<const PanelDataset> panel;
  std::shared_ptr<const NuisanceFits> fits;
  ResidualPanel residuals;
  GroupTimeEffects effects;
  AggregatedResults aggregated;
};

/// Folds, cross-fitted nuisances, residualization, cell estimation and
/// aggregation. Folds and learners are both seeded from config.seed.
PipelineResult run_pipeline(std::shared_ptr<const PanelDataset> panel, const PipelineConfig& config);

/// Cell estimation and aggregation on already residualized data.
GroupTimeEffects estimate_cells(const ResidualPanel& residuals, const PipelineConfig& config);

}  // namespace sdidml
