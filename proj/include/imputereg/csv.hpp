#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "imputereg/model.hpp"

namespace imputereg {

/// Which CSV columns play which role.
struct ColumnRoles {
  std::string y;
  std::vector<std::string> x;
  std::vector<std::string> w;
  std::vector<std::string> z;
  bool add_intercept_x = true;
  bool add_intercept_w = true;

  /// Exactly one y, at least one z and w column (or a w intercept), no name
  /// used twice. Throws Error(InvalidArgument).
  void validate() const;
};

struct LoadedData {
  Dataset dataset;
  // row_order[i] is the 0-based data row (header excluded) that became dataset row i.
  std::vector<Index> row_order;
};

/// Reads a header-first CSV (LF or CRLF). z cells must be "0", "1" or empty;
/// a row is pilot iff every z cell is present. Rows are stably reordered
/// pilot-first. Errors carry 1-based file line and column positions.
LoadedData load_csv(const std::string& path, const ColumnRoles& roles);
LoadedData parse_csv(std::istream& in, const ColumnRoles& roles);

/// Writes y, x, w, z columns (intercept columns skipped) with 17 significant
/// digits; missing z is written as an empty cell.
void write_csv(const Dataset& dataset, const std::string& path);
void write_csv(const Dataset& dataset, std::ostream& out);

/// printf("%.17g"): enough digits to round-trip any double.
std::string format_double(double v);

/// Roles matching the column layout produced by write_csv.
ColumnRoles roles_for(const Dataset& dataset);

}  // namespace imputereg
