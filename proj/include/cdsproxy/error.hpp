#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cdsproxy {

enum class ErrorCode {
  FewerThanTwoSamples,
  DimensionMismatch,
  NotSymmetric,
  NoConvergence,
  NotPositiveDefinite,
  BadComponentCount,
  MissingFiveYearRate,
  MissingColumn,
  InsufficientObservedRates,
  SingularDesign,
  ClassTooSmall,
  SingularCovariance,
  EmptySample,
  NonpositiveBandwidth,
  SingleClassInput,
  NotAProbabilityVector,
  PureNode,
  NoValidSplit,
  EmptyTrainingSet,
  BadK,
  EmptyClass,
  FitFailure,
  MissingCell,
  TooFewSamples,
  EmptyBucket,
  RankDeficientDesign,
  UnknownCategoryLevel,
  BadConfig,
  SchemaViolation,
  RangeViolation,
  BadArgument,
  IoError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::FewerThanTwoSamples: return "FewerThanTwoSamples";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::BadComponentCount: return "BadComponentCount";
    case ErrorCode::MissingFiveYearRate: return "MissingFiveYearRate";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::InsufficientObservedRates: return "InsufficientObservedRates";
    case ErrorCode::SingularDesign: return "SingularDesign";
    case ErrorCode::ClassTooSmall: return "ClassTooSmall";
    case ErrorCode::SingularCovariance: return "SingularCovariance";
    case ErrorCode::EmptySample: return "EmptySample";
    case ErrorCode::NonpositiveBandwidth: return "NonpositiveBandwidth";
    case ErrorCode::SingleClassInput: return "SingleClassInput";
    case ErrorCode::NotAProbabilityVector: return "NotAProbabilityVector";
    case ErrorCode::PureNode: return "PureNode";
    case ErrorCode::NoValidSplit: return "NoValidSplit";
    case ErrorCode::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorCode::BadK: return "BadK";
    case ErrorCode::EmptyClass: return "EmptyClass";
    case ErrorCode::FitFailure: return "FitFailure";
    case ErrorCode::MissingCell: return "MissingCell";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::EmptyBucket: return "EmptyBucket";
    case ErrorCode::RankDeficientDesign: return "RankDeficientDesign";
    case ErrorCode::UnknownCategoryLevel: return "UnknownCategoryLevel";
    case ErrorCode::BadConfig: return "BadConfig";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::RangeViolation: return "RangeViolation";
    case ErrorCode::BadArgument: return "BadArgument";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

// Every failure raised by the library. The code is stable and machine readable;
// row/column are set for file diagnostics, fold for cross-validation failures.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  std::optional<std::size_t> row;
  std::optional<std::string> column;
  std::optional<std::size_t> fold;

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace cdsproxy
