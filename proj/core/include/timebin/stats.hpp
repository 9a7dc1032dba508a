#pragma once

#include <cstddef>
#include <vector>

namespace timebin {

/// Upper regularized incomplete gamma function Q(a, x) for a > 0, x >= 0.
double gamma_q(double a, double x);

/// Survival function of the chi-squared distribution with dof degrees of
/// freedom: P(X >= x).
double chi2_sf(double x, double dof);

/// Standard normal cumulative distribution function.
double normal_cdf(double x);

/// Binary entropy in bits; h2(0) = h2(1) = 0.  p must lie in [0, 1].
double binary_entropy(double p);

/// Result of a Pearson chi-squared goodness-of-fit comparison.
struct Chi2Result {
  double statistic = 0.0;
  std::size_t dof = 0;
  double p_value = 1.0;
};

/// Pearson chi-squared test of observed counts against expected counts.
/// Cells with zero expectation are skipped (the corresponding observed
/// count must also be zero, otherwise the test reports p = 0).  dof is the
/// number of contributing cells minus constraints_absorbed.
Chi2Result chi2_test(const std::vector<double>& observed,
                     const std::vector<double>& expected,
                     std::size_t constraints_absorbed = 0);

/// Chi-squared test of counts against the hypothesis that all cells share
/// the same mean (estimated from the data, absorbing one constraint).
Chi2Result chi2_test_constant(const std::vector<double>& observed);

/// Ordinary least-squares straight-line fit y = intercept + slope * x.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_sigma = 0.0;
  double intercept_sigma = 0.0;
  double r_squared = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// Mean of a sample (0 for the empty sample).
double mean(const std::vector<double>& values);

/// Unbiased sample standard deviation (0 for samples of size < 2).
double sample_stddev(const std::vector<double>& values);

}  // namespace timebin
