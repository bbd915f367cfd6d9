#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "grouplin/binning.hpp"
#include "grouplin/types.hpp"

#include "json.hpp"

namespace grouplin {

// Malformed or missing input data; the CLI maps this to exit code 3.
struct data_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Fields of one CSV line, trimmed of surrounding whitespace and a trailing CR.
std::vector<std::string> split_csv_line(const std::string& line);

// Reads CSV with header `x,v`. Errors carry the source name and a 1-based
// line number; an input without data rows is an error.
Dataset read_xv_csv(std::istream& in, const std::string& source);

// Decimal representation with the given number of significant digits.
std::string format_number(double value, int significant);

nlohmann::ordered_json partition_json(const BinPartition& partition);

}  // namespace grouplin
