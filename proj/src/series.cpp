#include "dendroflow/series.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "dendroflow/tree.hpp"  // format_double

namespace dendroflow {

void Series::validate() const {
  if (values.empty()) throw std::invalid_argument("series: empty");
  for (std::size_t i = 0; i < values.size(); ++i)
    if (!std::isfinite(values[i]))
      throw std::invalid_argument("series: non-finite value at index " + std::to_string(i));
}

std::vector<Extremum> local_extrema(const Series& s) {
  s.validate();
  const auto& x = s.values;
  // compress constant-level plateaus to their leftmost sample
  std::vector<std::size_t> run_start;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (i == 0 || x[i] != x[i - 1]) run_start.push_back(i);

  std::vector<Extremum> out;
  for (std::size_t r = 1; r + 1 < run_start.size(); ++r) {
    double prev = x[run_start[r - 1]];
    double here = x[run_start[r]];
    double next = x[run_start[r + 1]];
    if (here > prev && here > next)
      out.push_back({run_start[r], here, ExtremumKind::kMax});
    else if (here < prev && here < next)
      out.push_back({run_start[r], here, ExtremumKind::kMin});
  }
  return out;
}

namespace {

bool parse_field(const std::string& field, double& value) {
  if (field.empty()) return false;
  std::size_t pos = 0;
  try {
    value = std::stod(field, &pos);
  } catch (const std::exception&) {
    return false;
  }
  while (pos < field.size() && (field[pos] == ' ' || field[pos] == '\r' || field[pos] == '\t')) ++pos;
  return pos == field.size();
}

}  // namespace

Series parse_series_csv(std::istream& in) {
  Series s;
  std::string line;
  long line_no = 0;
  int columns = 0;  // decided on the first data line
  double prev_t = 0.0;
  bool have_prev_t = false;
  while (std::getline(in, line)) {
    ++line_no;
    // strip trailing CR and surrounding spaces
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t'))
      line.pop_back();
    std::size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos) continue;
    line = line.substr(start);
    if (line.empty() || line[0] == '#') continue;

    std::vector<std::string> fields;
    std::size_t from = 0;
    while (true) {
      std::size_t comma = line.find(',', from);
      fields.push_back(line.substr(from, comma == std::string::npos ? comma : comma - from));
      if (comma == std::string::npos) break;
      from = comma + 1;
    }

    double v0 = 0.0, v1 = 0.0;
    bool numeric = parse_field(fields[0], v0) && (fields.size() < 2 || parse_field(fields[1], v1));
    if (!numeric) {
      if (line_no == 1) continue;  // header row (e.g. "value" or "t,value")
      throw std::runtime_error("csv parse error at line " + std::to_string(line_no) + ": '" + line +
                               "'");
    }
    if (fields.size() > 2)
      throw std::runtime_error("csv parse error at line " + std::to_string(line_no) +
                               ": expected 1 or 2 columns");
    if (columns == 0) columns = static_cast<int>(fields.size());
    if (static_cast<int>(fields.size()) != columns)
      throw std::runtime_error("csv parse error at line " + std::to_string(line_no) +
                               ": inconsistent column count");
    if (columns == 2) {
      if (have_prev_t && !(v0 > prev_t))
        throw std::runtime_error("csv parse error at line " + std::to_string(line_no) +
                                 ": t column not strictly increasing");
      prev_t = v0;
      have_prev_t = true;
      s.values.push_back(v1);
    } else {
      s.values.push_back(v0);
    }
  }
  if (s.values.empty()) throw std::runtime_error("csv parse error: no data rows");
  s.validate();
  return s;
}

Series parse_series_csv(const std::string& text) {
  std::istringstream is(text);
  return parse_series_csv(is);
}

void write_series_csv(std::ostream& out, const Series& s) {
  out << "value\n";
  for (double v : s.values) out << format_double(v) << "\n";
}

}  // namespace dendroflow
