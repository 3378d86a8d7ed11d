#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tcf {

/// Header plus string cells. Fields containing commas, quotes or line
/// breaks are quoted on output (RFC 4180 style).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Throws InputError when the row width differs from the header.
  void add_row(std::vector<std::string> row);
  /// Index of a header column, or -1.
  int column(const std::string& name) const;

  void write(std::ostream& os) const;
  void write(const std::string& path) const;
};

/// Parses a delimited file with a header line. Errors carry 1-based line
/// numbers.
CsvTable read_csv(std::istream& is);
CsvTable read_csv_file(const std::string& path);

/// Shortest text that parses back to the same double; "NA" for NaN.
std::string format_double(double x);
/// Strict full-field parse; "NA" and "nan" give NaN. Throws InputError.
double parse_double(const std::string& s, const std::string& context);
long long parse_integer(const std::string& s, const std::string& context);

}  // namespace tcf
