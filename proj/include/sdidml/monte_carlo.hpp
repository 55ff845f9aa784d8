#pragma once

#include "sdidml/bootstrap.hpp"
#include "sdidml/pipeline.hpp"
#include "sdidml/simulate.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sdidml {

enum class Method {
  SDidml,         // the configured pipeline
  Twfe,           // static TWFE on raw Y and D
  UnadjustedDid,  // the same contrast on raw Y, no nuisance adjustment
};

std::string to_string(Method m);

struct MonteCarloOptions {
  PipelineConfig pipeline;
  std::optional<BootstrapOptions> bootstrap;  // CIs and SEs for SDidml
  std::vector<Method> methods{Method::SDidml, Method::Twfe};
  bool pretrend = false;                // needs bootstrap
  std::optional<int> placebo_shift;     // placebo point estimate per rep
  int threads = 0;                      // reps in parallel; 0 = default
};

struct MethodRecord {
  double estimate = 0.0;
  std::optional<double> ci_low;
  std::optional<double> ci_high;
};

struct RepRecord {
  int rep = 0;
  std::uint64_t seed = 0;
  double truth = 0.0;
  std::map<Method, MethodRecord> methods;
  std::optional<double> pretrend_p;
  std::optional<double> placebo_att;
  double min_weight = 1.0;
  double max_weight_sum_error = 0.0;
};

struct MethodSummary {
  double mean_estimate = 0.0;
  double bias = 0.0;
  double rmse = 0.0;
  std::optional<double> coverage;
  int n_intervals = 0;
};

struct MonteCarloResult {
  std::vector<RepRecord> records;
  std::map<Method, MethodSummary> summary;
  double min_weight = 1.0;
  double max_weight_sum_error = 0.0;
};

/// Rep r simulates with dgp.seed = seed + r and estimates with pipeline and
/// bootstrap seeds derived from a separate stream. Reps run concurrently;
/// records are reduced in rep order. A failing rep throws, naming the rep.
MonteCarloResult monte_carlo(const DGPConfig& dgp, const MonteCarloOptions& options, int reps, std::uint64_t seed);

/// Pipeline seed for rep r (separate from the DGP stream).
std::uint64_t estimator_seed(std::uint64_t seed, int rep);

}  // namespace sdidml
