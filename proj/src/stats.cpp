#include "dendroflow/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

namespace dendroflow::stats {

double mean(std::span<const double> xs) {
  if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double variance(std::span<const double> xs) {
  if (xs.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

double standard_error(std::span<const double> xs) {
  return std::sqrt(variance(xs) / static_cast<double>(xs.size()));
}

double skewness(std::span<const double> xs) {
  if (xs.size() < 3) return std::numeric_limits<double>::quiet_NaN();
  double m = mean(xs);
  double m2 = 0.0, m3 = 0.0;
  for (double x : xs) {
    double d = x - m;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= static_cast<double>(xs.size());
  m3 /= static_cast<double>(xs.size());
  return m3 / std::pow(m2, 1.5);
}

LinearFit linear_fit(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw std::invalid_argument("linear_fit: need two or more paired points");
  double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  LinearFit f;
  f.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  f.intercept = (sy - f.slope * sx) / n;
  return f;
}

double ks_q(double lambda) {
  if (lambda <= 0.0) return 1.0;
  double sum = 0.0;
  for (int j = 1; j <= 100; ++j) {
    double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += (j % 2 == 1 ? term : -term);
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_test(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw std::invalid_argument("ks_test: empty sample");
  std::sort(sample.begin(), sample.end());
  double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    double f = cdf(sample[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  KsResult r;
  r.statistic = d;
  r.p_value = ks_q(std::sqrt(n) * d);
  return r;
}

double chi_squared_sf(double x, double dof) {
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(dof / 2.0, x / 2.0);
}

ChiSquared chi_squared_test(std::span<const double> observed, std::span<const double> expected) {
  if (observed.size() != expected.size() || observed.empty())
    throw std::invalid_argument("chi_squared_test: mismatched cells");
  ChiSquared out;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (!(expected[i] > 0.0)) throw std::invalid_argument("chi_squared_test: nonpositive expected count");
    double d = observed[i] - expected[i];
    out.statistic += d * d / expected[i];
  }
  out.dof = observed.size() - 1;
  out.p_value = chi_squared_sf(out.statistic, static_cast<double>(out.dof));
  return out;
}

double BatchRatio::value() const {
  double n = 0, d = 0;
  for (double x : num) n += x;
  for (double x : den) d += x;
  return d > 0 ? n / d : std::numeric_limits<double>::quiet_NaN();
}

double BatchRatio::se() const {
  std::vector<double> ratios;
  for (std::size_t i = 0; i < num.size(); ++i)
    if (den[i] > 0) ratios.push_back(num[i] / den[i]);
  if (ratios.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  return standard_error(ratios);
}

long long BatchRatio::denominator() const {
  double d = 0;
  for (double x : den) d += x;
  return static_cast<long long>(d);
}

}  // namespace dendroflow::stats
