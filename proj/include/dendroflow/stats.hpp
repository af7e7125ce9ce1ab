#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace dendroflow::stats {

double mean(std::span<const double> xs);
double variance(std::span<const double> xs);      // unbiased
double standard_error(std::span<const double> xs);
double skewness(std::span<const double> xs);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
};
LinearFit linear_fit(std::span<const double> xs, std::span<const double> ys);

/// Two-sided Kolmogorov-Smirnov test of a sample against a continuous CDF.
struct KsResult {
  double statistic = 0.0;
  double p_value = 0.0;
};
KsResult ks_test(std::vector<double> sample, const std::function<double(double)>& cdf);

/// Asymptotic Kolmogorov distribution Q(lambda) = 2 sum (-1)^{j-1} e^{-2 j^2 lambda^2}.
double ks_q(double lambda);

/// Pearson chi-squared test; expected counts must be positive.
struct ChiSquared {
  double statistic = 0.0;
  std::size_t dof = 0;
  double p_value = 0.0;
};
ChiSquared chi_squared_test(std::span<const double> observed, std::span<const double> expected);

/// Upper tail of the chi-squared distribution (regularized incomplete gamma).
double chi_squared_sf(double x, double dof);

/// Pooled ratio estimator with batch-based standard error: the point value
/// is sum(num)/sum(den); the SE comes from the spread of per-batch ratios.
struct BatchRatio {
  std::vector<double> num;
  std::vector<double> den;

  explicit BatchRatio(std::size_t batches = 1)
      : num(batches == 0 ? 1 : batches, 0.0), den(batches == 0 ? 1 : batches, 0.0) {}
  void add(std::size_t batch, double n, double d) {
    num[batch % num.size()] += n;
    den[batch % den.size()] += d;
  }
  double value() const;
  double se() const;
  long long denominator() const;
};

}  // namespace dendroflow::stats
