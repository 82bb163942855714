#include "imputereg/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <unordered_map>

#include "imputereg/error.hpp"

namespace imputereg {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

// Splits one record. Double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_record(const std::string& line, long line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"' && trim(cur).empty()) {
      quoted = true;
      was_quoted = true;
      cur.clear();
    } else if (c == ',') {
      fields.push_back(was_quoted ? cur : std::string(trim(cur)));
      cur.clear();
      was_quoted = false;
    } else {
      cur.push_back(c);
    }
  }
  if (quoted) throw Error(ErrorKind::ParseError, "unterminated quoted field", std::nullopt, line_no);
  fields.push_back(was_quoted ? cur : std::string(trim(cur)));
  return fields;
}

bool read_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

double parse_number(const std::string& cell, long line_no, long col) {
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  if (!cell.empty() && *begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (cell.empty() || ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw Error(ErrorKind::ParseError, "expected a finite number, got '" + cell + "'", col, line_no);
  }
  return value;
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void ColumnRoles::validate() const {
  if (y.empty()) throw Error(ErrorKind::InvalidArgument, "config: exactly one y column is required");
  if (z.empty()) throw Error(ErrorKind::InvalidArgument, "config: at least one z column is required");
  if (w.empty() && !add_intercept_w) throw Error(ErrorKind::InvalidArgument, "config: w has no columns");
  if (x.empty() && !add_intercept_x) throw Error(ErrorKind::InvalidArgument, "config: x has no columns");
  std::set<std::string> seen{y};
  for (const auto* group : {&x, &w, &z}) {
    for (const auto& name : *group) {
      if (name.empty()) throw Error(ErrorKind::InvalidArgument, "config: empty column name");
      if (!seen.insert(name).second) {
        throw Error(ErrorKind::InvalidArgument, "config: column '" + name + "' assigned to more than one role");
      }
    }
  }
}

LoadedData parse_csv(std::istream& in, const ColumnRoles& roles) {
  roles.validate();
  std::string line;
  if (!read_line(in, line)) throw Error(ErrorKind::ParseError, "missing header row", std::nullopt, 1);
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = split_record(line, 1);
  std::unordered_map<std::string, long> position;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (!position.emplace(header[c], static_cast<long>(c)).second) {
      throw Error(ErrorKind::ParseError, "duplicate header '" + header[c] + "'", static_cast<long>(c + 1), 1);
    }
  }
  auto locate = [&](const std::string& name) {
    auto it = position.find(name);
    if (it == position.end()) throw Error(ErrorKind::ParseError, "column '" + name + "' not found in header", std::nullopt, 1);
    return it->second;
  };
  const long y_col = locate(roles.y);
  std::vector<long> x_cols, w_cols, z_cols;
  for (const auto& n : roles.x) x_cols.push_back(locate(n));
  for (const auto& n : roles.w) w_cols.push_back(locate(n));
  for (const auto& n : roles.z) z_cols.push_back(locate(n));

  struct Row {
    double y;
    std::vector<double> x, w, z;
    bool pilot;
  };
  std::vector<Row> rows;
  long line_no = 1;
  while (read_line(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_record(line, line_no);
    if (cells.size() != header.size()) {
      throw Error(ErrorKind::ParseError,
                  "expected " + std::to_string(header.size()) + " fields, found " + std::to_string(cells.size()),
                  std::nullopt, line_no);
    }
    Row row;
    row.y = parse_number(cells[y_col], line_no, y_col + 1);
    for (long c : x_cols) row.x.push_back(parse_number(cells[c], line_no, c + 1));
    for (long c : w_cols) row.w.push_back(parse_number(cells[c], line_no, c + 1));
    std::size_t present = 0;
    for (long c : z_cols) {
      const std::string& cell = cells[c];
      if (cell.empty()) {
        row.z.push_back(kMissing);
      } else if (cell == "0" || cell == "1") {
        row.z.push_back(cell == "1" ? 1.0 : 0.0);
        ++present;
      } else {
        throw Error(ErrorKind::ParseError, "z cells must be 0, 1 or empty, got '" + cell + "'", c + 1, line_no);
      }
    }
    if (present != 0 && present != z_cols.size()) {
      throw Error(ErrorKind::PartialZRow, "row has some but not all z values observed", std::nullopt, line_no);
    }
    row.pilot = present == z_cols.size();
    rows.push_back(std::move(row));
  }

  LoadedData out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].pilot) out.row_order.push_back(static_cast<Index>(i));
  }
  const Index n = static_cast<Index>(out.row_order.size());
  if (n == 0) throw Error(ErrorKind::EmptyPilot, "no row has z observed");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].pilot) out.row_order.push_back(static_cast<Index>(i));
  }

  const Index N = static_cast<Index>(rows.size());
  const Index ix = roles.add_intercept_x ? 1 : 0;
  const Index iw = roles.add_intercept_w ? 1 : 0;
  Dataset& ds = out.dataset;
  ds.y.resize(N);
  ds.x.resize(N, ix + static_cast<Index>(x_cols.size()));
  ds.w.resize(N, iw + static_cast<Index>(w_cols.size()));
  ds.z.resize(N, static_cast<Index>(z_cols.size()));
  for (Index i = 0; i < N; ++i) {
    const Row& row = rows[static_cast<std::size_t>(out.row_order[static_cast<std::size_t>(i)])];
    ds.y(i) = row.y;
    if (ix) ds.x(i, 0) = 1.0;
    for (std::size_t c = 0; c < row.x.size(); ++c) ds.x(i, ix + static_cast<Index>(c)) = row.x[c];
    if (iw) ds.w(i, 0) = 1.0;
    for (std::size_t c = 0; c < row.w.size(); ++c) ds.w(i, iw + static_cast<Index>(c)) = row.w[c];
    for (std::size_t c = 0; c < row.z.size(); ++c) ds.z(i, static_cast<Index>(c)) = row.z[c];
  }
  ds.pilot_size = n;
  ds.y_name = roles.y;
  ds.x_names = roles.x;
  if (ix) ds.x_names.insert(ds.x_names.begin(), std::string(kInterceptName));
  ds.w_names = roles.w;
  if (iw) ds.w_names.insert(ds.w_names.begin(), std::string(kInterceptName));
  ds.z_names = roles.z;
  ds.validate();
  return out;
}

LoadedData load_csv(const std::string& path, const ColumnRoles& roles) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open '" + path + "'");
  return parse_csv(in, roles);
}

ColumnRoles roles_for(const Dataset& dataset) {
  ColumnRoles roles;
  roles.y = dataset.y_name;
  roles.add_intercept_x = false;
  roles.add_intercept_w = false;
  for (const auto& n : dataset.x_names) {
    if (n == kInterceptName) roles.add_intercept_x = true; else roles.x.push_back(n);
  }
  for (const auto& n : dataset.w_names) {
    if (n == kInterceptName) roles.add_intercept_w = true; else roles.w.push_back(n);
  }
  roles.z = dataset.z_names;
  return roles;
}

void write_csv(const Dataset& dataset, std::ostream& out) {
  Dataset ds = dataset;
  ds.validate();
  std::vector<Index> x_keep, w_keep;
  for (Index c = 0; c < ds.q(); ++c) {
    if (ds.x_names[static_cast<std::size_t>(c)] != kInterceptName) x_keep.push_back(c);
  }
  for (Index c = 0; c < ds.r(); ++c) {
    if (ds.w_names[static_cast<std::size_t>(c)] != kInterceptName) w_keep.push_back(c);
  }
  out << quote_if_needed(ds.y_name);
  for (Index c : x_keep) out << ',' << quote_if_needed(ds.x_names[static_cast<std::size_t>(c)]);
  for (Index c : w_keep) out << ',' << quote_if_needed(ds.w_names[static_cast<std::size_t>(c)]);
  for (const auto& n : ds.z_names) out << ',' << quote_if_needed(n);
  out << '\n';
  for (Index i = 0; i < ds.rows(); ++i) {
    out << format_double(ds.y(i));
    for (Index c : x_keep) out << ',' << format_double(ds.x(i, c));
    for (Index c : w_keep) out << ',' << format_double(ds.w(i, c));
    for (Index j = 0; j < ds.p(); ++j) {
      out << ',';
      if (!std::isnan(ds.z(i, j))) out << (ds.z(i, j) == 1.0 ? '1' : '0');
    }
    out << '\n';
  }
}

void write_csv(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write '" + path + "'");
  write_csv(dataset, out);
  if (!out) throw Error(ErrorKind::IoError, "write failed for '" + path + "'");
}

}  // namespace imputereg
