#include "tcf/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "tcf/error.hpp"

namespace tcf {

void CsvTable::add_row(std::vector<std::string> row) {
  if (row.size() != header.size()) {
    throw InputError("csv: row has " + std::to_string(row.size()) + " fields, header has " +
                     std::to_string(header.size()));
  }
  rows.push_back(std::move(row));
}

int CsvTable::column(const std::string& name) const {
  for (std::size_t c = 0; c < header.size(); ++c)
    if (header[c] == name) return static_cast<int>(c);
  return -1;
}

namespace {

void write_field(std::ostream& os, const std::string& f) {
  if (f.find_first_of(",\"\r\n") == std::string::npos) {
    os << f;
    return;
  }
  os << '"';
  for (char c : f) {
    if (c == '"') os << '"';
    os << c;
  }
  os << '"';
}

void write_line(std::ostream& os, const std::vector<std::string>& fields) {
  for (std::size_t c = 0; c < fields.size(); ++c) {
    if (c) os << ',';
    write_field(os, fields[c]);
  }
  os << '\n';
}

// One logical record; quoted fields may span lines. Returns false at EOF.
bool read_record(std::istream& is, std::vector<std::string>& fields, long& line) {
  fields.clear();
  std::string field;
  bool quoted = false, any = false;
  char c;
  while (is.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (is.peek() == '"') {
          is.get(c);
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      ++line;
      fields.push_back(std::move(field));
      return true;
    } else if (c != '\r') {
      field += c;
    }
  }
  if (quoted) throw InputError("csv: unterminated quoted field near line " + std::to_string(line));
  if (!any) return false;
  fields.push_back(std::move(field));
  return true;
}

}  // namespace

void CsvTable::write(std::ostream& os) const {
  write_line(os, header);
  for (const auto& r : rows) write_line(os, r);
}

void CsvTable::write(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot open '" + path + "' for writing");
  write(os);
  if (!os) throw InputError("failed writing '" + path + "'");
}

CsvTable read_csv(std::istream& is) {
  CsvTable t;
  long line = 1;
  std::vector<std::string> fields;
  if (!read_record(is, t.header, line) || (t.header.size() == 1 && t.header[0].empty())) {
    throw InputError("csv: missing header line");
  }
  long record_line = line;
  while (read_record(is, fields, line)) {
    if (fields.size() == 1 && fields[0].empty()) {  // blank line
      record_line = line;
      continue;
    }
    if (fields.size() != t.header.size()) {
      throw InputError("csv line " + std::to_string(record_line) + ": expected " + std::to_string(t.header.size()) +
                       " fields, found " + std::to_string(fields.size()));
    }
    t.rows.push_back(fields);
    record_line = line;
  }
  return t;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot open '" + path + "'");
  return read_csv(is);
}

std::string format_double(double x) {
  if (std::isnan(x)) return "NA";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s, const std::string& context) {
  if (s == "NA" || s == "nan" || s == "NaN") return std::numeric_limits<double>::quiet_NaN();
  double x = 0.0;
  const char* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, x);
  if (s.empty() || res.ec != std::errc() || res.ptr != end) {
    throw InputError(context + ": '" + s + "' is not a number");
  }
  return x;
}

long long parse_integer(const std::string& s, const std::string& context) {
  long long x = 0;
  const char* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, x);
  if (s.empty() || res.ec != std::errc() || res.ptr != end) {
    throw InputError(context + ": '" + s + "' is not an integer");
  }
  return x;
}

}  // namespace tcf
