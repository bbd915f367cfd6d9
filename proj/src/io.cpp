#include "grouplin/io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>

namespace grouplin {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

double parse_double(const std::string& field, const std::string& where) {
  const std::string t = trim(field);
  char* end = nullptr;
  const double value = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size()) {
    throw data_error(where + ": not a number: '" + field + "'");
  }
  return value;
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(trim(current));
      current.clear();
    } else {
      current.push_back(ch);
    }
  }
  fields.push_back(trim(current));
  return fields;
}

Dataset read_xv_csv(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) {
    throw data_error(source + ": empty input");
  }
  ++lineno;
  {
    const auto header = split_csv_line(line);
    if (header.size() != 2 || header[0] != "x" || header[1] != "v") {
      throw data_error(source + ":1: expected header 'x,v'");
    }
  }
  Dataset data;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    const std::string where = source + ":" + std::to_string(lineno);
    if (fields.size() != 2) {
      throw data_error(where + ": expected 2 comma-separated values, got " +
                       std::to_string(fields.size()));
    }
    Observation o;
    o.x = parse_double(fields[0], where);
    o.v = parse_double(fields[1], where);
    if (!std::isfinite(o.x)) {
      throw data_error(where + ": x must be finite");
    }
    if (!(o.v > 0.0) || !std::isfinite(o.v)) {
      throw data_error(where + ": v must be > 0");
    }
    data.observations.push_back(o);
  }
  if (data.empty()) {
    throw data_error(source + ": no data rows");
  }
  return data;
}

std::string format_number(double value, int significant) {
  if (value == 0.0) value = 0.0;  // normalize -0
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", significant, value);
  return buf;
}

nlohmann::ordered_json partition_json(const BinPartition& partition) {
  nlohmann::ordered_json j;
  j["intervals"] = nlohmann::ordered_json::array();
  for (const auto& iv : partition.intervals) {
    j["intervals"].push_back({{"lo", iv.lo}, {"hi", iv.hi}});
  }
  j["members"] = partition.members;
  return j;
}

}  // namespace grouplin
