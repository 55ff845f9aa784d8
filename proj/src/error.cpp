#include "sdidml/error.hpp"

namespace sdidml {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidHyperparameter: return "InvalidHyperparameter";
    case ErrorCode::TooManyFolds: return "TooManyFolds";
    case ErrorCode::MissingField: return "MissingField";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::InvalidValue: return "InvalidValue";
    case ErrorCode::DuplicateIndex: return "DuplicateIndex";
    case ErrorCode::NonAbsorbingTreatment: return "NonAbsorbingTreatment";
    case ErrorCode::EmptyControlPool: return "EmptyControlPool";
    case ErrorCode::UnknownUnit: return "UnknownUnit";
    case ErrorCode::UnknownPeriod: return "UnknownPeriod";
    case ErrorCode::MissingSubgroupLabel: return "MissingSubgroupLabel";
    case ErrorCode::MissingArtifacts: return "MissingArtifacts";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::AlignmentMismatch: return "AlignmentMismatch";
    case ErrorCode::EmptyResult: return "EmptyResult";
    case ErrorCode::DegenerateDesign: return "DegenerateDesign";
    case ErrorCode::NoPreCells: return "NoPreCells";
    case ErrorCode::InsufficientPrePeriods: return "InsufficientPrePeriods";
    case ErrorCode::BootstrapFailure: return "BootstrapFailure";
  }
  return "Unknown";
}

ErrorCategory category_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidConfig:
    case ErrorCode::InvalidHyperparameter:
    case ErrorCode::TooManyFolds:
      return ErrorCategory::Config;
    case ErrorCode::MissingField:
    case ErrorCode::NonFiniteValue:
    case ErrorCode::InvalidValue:
    case ErrorCode::DuplicateIndex:
    case ErrorCode::NonAbsorbingTreatment:
    case ErrorCode::EmptyControlPool:
    case ErrorCode::UnknownUnit:
    case ErrorCode::UnknownPeriod:
    case ErrorCode::MissingSubgroupLabel:
    case ErrorCode::MissingArtifacts:
      return ErrorCategory::Data;
    default:
      return ErrorCategory::Estimation;
  }
}

int exit_code_for(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::Config: return 2;
    case ErrorCategory::Data: return 3;
    case ErrorCategory::Estimation: return 4;
  }
  return 1;
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void rethrow_with_context(const Error& e, std::string_view context) {
  std::string what = e.what();
  // strip the "Code: " prefix so it is not repeated
  const auto prefix = std::string(to_string(e.code())) + ": ";
  if (what.rfind(prefix, 0) == 0) what.erase(0, prefix.size());
  throw Error(e.code(), std::string(context) + ": " + what);
}

}  // namespace sdidml
