#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fdd {

// Numeric values are part of the C ABI (fdd_status); append only.
enum class ErrorCode : int {
  InvalidArgument = 1,
  FileNotFound = 2,
  SchemaMismatch = 3,
  MalformedRow = 4,
  EmptyDataset = 5,
  SingleClass = 6,
  TargetTooLarge = 7,
  DegenerateFraction = 8,
  ClassTooSmall = 9,
  EmptyNode = 10,
  EmptyInput = 11,
  DimensionMismatch = 12,
  NonFiniteInput = 13,
  LengthMismatch = 14,
  LabelOutOfRange = 15,
  EmptyMatrix = 16,
  RankingSchemaMismatch = 17,
  EmptyRanking = 18,
  EmptyVector = 19,
  ZeroSignal = 20,
  UnknownSensor = 21,
  BadProportions = 22,
  UnknownSymbol = 23,
  ParseError = 24,
  InvalidValue = 25,
  UnsupportedVersion = 26,
  IoError = 27,
};

std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace fdd
