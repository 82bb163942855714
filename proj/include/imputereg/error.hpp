#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace imputereg {

enum class ErrorKind {
  InvalidArgument,
  DimensionMismatch,
  NotPositiveDefinite,
  RankDeficient,
  SeparationDetected,
  NotConverged,
  OneClassOnly,
  SingularHessian,
  InsufficientPilot,
  DegenerateWeight,
  NegativeVariance,
  ZeroVariance,
  ParseError,
  PartialZRow,
  EmptyPilot,
  IoError,
  ReplicationFailed,
  ReplicationThresholdExceeded,
};

std::string_view to_string(ErrorKind kind);

// Process exit code for a failure of this kind:
// 2 data/contract error, 3 numerical failure, 4 replication-threshold abort.
int exit_code(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message,
        std::optional<long> column = std::nullopt,
        std::optional<long> row = std::nullopt);

  ErrorKind kind() const noexcept { return kind_; }
  std::optional<long> column() const noexcept { return column_; }
  std::optional<long> row() const noexcept { return row_; }

  // Same error re-tagged with a column index (used when fitting per-column models).
  Error with_column(long column) const;

 private:
  ErrorKind kind_;
  std::optional<long> column_;
  std::optional<long> row_;
};

}  // namespace imputereg
