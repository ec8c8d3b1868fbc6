#include "fdd/error.hpp"

namespace fdd {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::TargetTooLarge: return "TargetTooLarge";
    case ErrorCode::DegenerateFraction: return "DegenerateFraction";
    case ErrorCode::ClassTooSmall: return "ClassTooSmall";
    case ErrorCode::EmptyNode: return "EmptyNode";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::EmptyMatrix: return "EmptyMatrix";
    case ErrorCode::RankingSchemaMismatch: return "RankingSchemaMismatch";
    case ErrorCode::EmptyRanking: return "EmptyRanking";
    case ErrorCode::EmptyVector: return "EmptyVector";
    case ErrorCode::ZeroSignal: return "ZeroSignal";
    case ErrorCode::UnknownSensor: return "UnknownSensor";
    case ErrorCode::BadProportions: return "BadProportions";
    case ErrorCode::UnknownSymbol: return "UnknownSymbol";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvalidValue: return "InvalidValue";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace fdd
