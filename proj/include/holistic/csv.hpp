#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace holistic::csv {

/// Raised on malformed input files (missing header, bad numbers, NaN/Inf).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Position of a named header column; throws ParseError if absent.
  std::size_t column(const std::string& name) const;
};

/// Comma-separated, header row required, no quoting. Blank lines are skipped
/// and every row must have as many fields as the header.
Table read(std::istream& in);

/// Strict decimal parse: rejects trailing garbage, NaN and infinities.
double parse_number(const std::string& field);

}  // namespace holistic::csv
