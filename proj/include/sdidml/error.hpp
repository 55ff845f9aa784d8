#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sdidml {

// Failure categories map one-to-one onto CLI exit codes.
enum class ErrorCategory { Config, Data, Estimation };

enum class ErrorCode {
  // configuration
  InvalidConfig,
  InvalidHyperparameter,
  TooManyFolds,
  // data / panel validation
  MissingField,
  NonFiniteValue,
  InvalidValue,
  DuplicateIndex,
  NonAbsorbingTreatment,
  EmptyControlPool,
  UnknownUnit,
  UnknownPeriod,
  MissingSubgroupLabel,
  MissingArtifacts,
  // numerical / estimation
  DimensionMismatch,
  NonFiniteInput,
  SingularSystem,
  NonConvergence,
  AlignmentMismatch,
  EmptyResult,
  DegenerateDesign,
  NoPreCells,
  InsufficientPrePeriods,
  BootstrapFailure,
};

std::string_view to_string(ErrorCode code);
ErrorCategory category_of(ErrorCode code);
int exit_code_for(ErrorCategory category);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  ErrorCategory category() const noexcept { return category_of(code_); }

 private:
  ErrorCode code_;
};

// Re-raise with a context prefix, keeping the code.
[[noreturn]] void rethrow_with_context(const Error& e, std::string_view context);

}  // namespace sdidml
