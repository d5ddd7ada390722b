#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mcorr {

enum class ErrorKind {
  // input data
  MissingFile,
  MalformedCsv,
  MissingColumn,
  NonNumeric,
  NonFinite,
  ConstantColumn,
  TooFewSamples,
  // numerical preconditions
  LengthMismatch,
  ConstantInput,
  TooFewKnots,
  NotSorted,
  NonPositiveWeight,
  NotMonotone,
  FlatSegment,
  ZeroDenominator,
  OutOfRange,
  // configuration
  InvalidKappa,
  InvalidConfig,
  InvalidParameter,
  UnsupportedArity,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MissingFile: return "MissingFile";
    case ErrorKind::MalformedCsv: return "MalformedCsv";
    case ErrorKind::MissingColumn: return "MissingColumn";
    case ErrorKind::NonNumeric: return "NonNumeric";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::ConstantColumn: return "ConstantColumn";
    case ErrorKind::TooFewSamples: return "TooFewSamples";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::ConstantInput: return "ConstantInput";
    case ErrorKind::TooFewKnots: return "TooFewKnots";
    case ErrorKind::NotSorted: return "NotSorted";
    case ErrorKind::NonPositiveWeight: return "NonPositiveWeight";
    case ErrorKind::NotMonotone: return "NotMonotone";
    case ErrorKind::FlatSegment: return "FlatSegment";
    case ErrorKind::ZeroDenominator: return "ZeroDenominator";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::InvalidKappa: return "InvalidKappa";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::InvalidParameter: return "InvalidParameter";
    case ErrorKind::UnsupportedArity: return "UnsupportedArity";
  }
  return "Unknown";
}

/// Errors raised while reading a dataset, as opposed to errors raised by an
/// estimator on an already validated table.
constexpr bool is_data_error(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MissingFile:
    case ErrorKind::MalformedCsv:
    case ErrorKind::MissingColumn:
    case ErrorKind::NonNumeric:
    case ErrorKind::NonFinite:
    case ErrorKind::ConstantColumn:
    case ErrorKind::TooFewSamples:
      return true;
    default:
      return false;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace mcorr
