#pragma once

#include "sdidml/aggregate.hpp"
#include "sdidml/bootstrap.hpp"
#include "sdidml/pipeline.hpp"
#include "sdidml/serialization.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace sdidml {

/// Resolved `run` configuration. JSON keys match the field names (K for k).
struct RunConfig {
  std::string input_path;
  std::string output_dir = "sdidml_out";
  std::optional<std::string> subgroups_path;  // CSV with columns unit,label
  PipelineConfig pipeline;
  std::vector<AggregationScheme> aggregation{AggregationScheme::Overall, AggregationScheme::EventTime,
                                             AggregationScheme::ByGroup};
  int bootstrap_b = 199;
  BootstrapMode bootstrap_mode = BootstrapMode::Full;
  int placebo_shift = 1;
  bool allow_no_crossfit = false;
};

/// Applies defaults for absent fields; throws InvalidConfig on unknown keys
/// or out-of-domain values.
RunConfig run_config_from_json(const Json& j);
Json to_json(const RunConfig& config);

/// Throws InvalidConfig, including K = 1 without allow_no_crossfit.
void validate(const RunConfig& config);

/// Steps 1-5 plus diagnostics; writes results.json, group_time.csv,
/// event_curve.csv and diagnostics.json into output_dir.
Json execute_run(const RunConfig& config, int threads, std::ostream& log);

/// Entry point shared by the binary and the tests. Returns the exit code:
/// 0 success, 2 config/usage error, 3 data error, 4 estimation error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sdidml
