#include "imputereg/error.hpp"

namespace imputereg {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::SeparationDetected: return "SeparationDetected";
    case ErrorKind::NotConverged: return "NotConverged";
    case ErrorKind::OneClassOnly: return "OneClassOnly";
    case ErrorKind::SingularHessian: return "SingularHessian";
    case ErrorKind::InsufficientPilot: return "InsufficientPilot";
    case ErrorKind::DegenerateWeight: return "DegenerateWeight";
    case ErrorKind::NegativeVariance: return "NegativeVariance";
    case ErrorKind::ZeroVariance: return "ZeroVariance";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::PartialZRow: return "PartialZRow";
    case ErrorKind::EmptyPilot: return "EmptyPilot";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::ReplicationFailed: return "ReplicationFailed";
    case ErrorKind::ReplicationThresholdExceeded: return "ReplicationThresholdExceeded";
  }
  return "Unknown";
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotPositiveDefinite:
    case ErrorKind::RankDeficient:
    case ErrorKind::SeparationDetected:
    case ErrorKind::NotConverged:
    case ErrorKind::SingularHessian:
    case ErrorKind::DegenerateWeight:
    case ErrorKind::NegativeVariance:
    case ErrorKind::ZeroVariance:
      return 3;
    case ErrorKind::ReplicationFailed:
    case ErrorKind::ReplicationThresholdExceeded:
      return 4;
    default:
      return 2;
  }
}

Error::Error(ErrorKind kind, const std::string& message,
             std::optional<long> column, std::optional<long> row)
    : std::runtime_error(message), kind_(kind), column_(column), row_(row) {}

Error Error::with_column(long column) const {
  return Error(kind_, "column " + std::to_string(column) + ": " + what(), column, row_);
}

}  // namespace imputereg
