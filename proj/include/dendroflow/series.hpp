#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace dendroflow {

/// Finite real time series; between integer sample indexes the function is
/// linearly interpolated. NaN and infinities are rejected.
struct Series {
  std::vector<double> values;

  Series() = default;
  explicit Series(std::vector<double> v) : values(std::move(v)) {}

  std::size_t size() const { return values.size(); }
  bool empty() const { return values.empty(); }
  double operator[](std::size_t i) const { return values[i]; }
  double front() const { return values.front(); }
  double back() const { return values.back(); }

  /// Throws std::invalid_argument on empty input or non-finite values.
  void validate() const;
};

enum class ExtremumKind { kMin, kMax };

struct Extremum {
  std::size_t index;  // leftmost sample of a constant-level plateau
  double value;
  ExtremumKind kind;
};

/// Internal local extrema, strictly alternating min/max. Plateaus report
/// only their leftmost point; boundary values are not included (boundary
/// behavior is read off the series ends directly).
std::vector<Extremum> local_extrema(const Series& s);

/// Reads a single-column CSV (optional "value" header) or a two-column
/// "t,value" CSV whose t column must be strictly increasing and is then
/// ignored. Throws std::runtime_error naming the offending line.
Series parse_series_csv(std::istream& in);
Series parse_series_csv(const std::string& text);

/// One value per line with a "value" header, 12 significant digits, LF.
void write_series_csv(std::ostream& out, const Series& s);

}  // namespace dendroflow
