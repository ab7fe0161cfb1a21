#pragma once

#include "error.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <string>
#include <vector>

namespace entest {

//! Numeric table read from CSV. Blank lines and lines starting with '#' are
//! skipped; a first line that does not parse as numbers is taken as a header.
struct NumericTable
{
  std::vector<double> values; // row-major
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::vector<std::string> header;
};

//! Thrown for unreadable or malformed input.
class CsvError : public Error
{
public:
  using Error::Error;
};

namespace detail {

inline std::string trim(const std::string& s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_fields(const std::string& line)
{
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos)
      break;
    start = comma + 1;
  }
  return out;
}

inline bool parse_double(const std::string& s, double& out)
{
  if (s.empty())
    return false;
  errno = 0;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && errno != ERANGE;
}

} // namespace detail

inline NumericTable read_csv(std::istream& in)
{
  NumericTable t;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string s = detail::trim(line);
    if (s.empty() || s[0] == '#')
      continue;
    const auto fields = detail::split_fields(s);
    std::vector<double> row(fields.size());
    bool numeric = true;
    for (std::size_t j = 0; j < fields.size() && numeric; ++j)
      numeric = detail::parse_double(fields[j], row[j]);
    if (!numeric) {
      if (first) {
        t.header = fields;
        t.cols = fields.size();
        first = false;
        continue;
      }
      throw CsvError("line " + std::to_string(line_no) + ": non-numeric field");
    }
    if (t.cols == 0)
      t.cols = row.size();
    else if (row.size() != t.cols)
      throw CsvError("line " + std::to_string(line_no) + ": expected " + std::to_string(t.cols) + " fields");
    t.values.insert(t.values.end(), row.begin(), row.end());
    ++t.rows;
    first = false;
  }
  if (t.rows == 0)
    throw CsvError("no data rows");
  return t;
}

inline NumericTable read_csv_file(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw CsvError("cannot open '" + path + "'");
  return read_csv(in);
}

} // namespace entest
