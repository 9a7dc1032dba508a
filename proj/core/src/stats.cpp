#include "timebin/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace timebin {

namespace {

/// Lower regularized incomplete gamma P(a, x) by series expansion.
/// Converges quickly for x < a + 1.
double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  double ap = a;
  for (int i = 0; i < 500; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * 1e-15) {
      break;
    }
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

/// Upper regularized incomplete gamma Q(a, x) by Lentz continued fraction.
/// Converges quickly for x >= a + 1.
double gamma_q_cf(double a, double x) {
  constexpr double kTiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) {
      d = kTiny;
    }
    c = b + an / c;
    if (std::fabs(c) < kTiny) {
      c = kTiny;
    }
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-15) {
      break;
    }
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double gamma_q(double a, double x) {
  if (!(a > 0.0) || x < 0.0) {
    throw std::invalid_argument("gamma_q requires a > 0 and x >= 0");
  }
  if (x == 0.0) {
    return 1.0;
  }
  if (x < a + 1.0) {
    return 1.0 - gamma_p_series(a, x);
  }
  return gamma_q_cf(a, x);
}

double chi2_sf(double x, double dof) {
  if (!(dof > 0.0)) {
    throw std::invalid_argument("chi2_sf requires dof > 0");
  }
  if (x <= 0.0) {
    return 1.0;
  }
  return gamma_q(dof / 2.0, x / 2.0);
}

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

double binary_entropy(double p) {
  if (p < 0.0 || p > 1.0) {
    throw std::invalid_argument("binary_entropy requires p in [0, 1]");
  }
  if (p == 0.0 || p == 1.0) {
    return 0.0;
  }
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

Chi2Result chi2_test(const std::vector<double>& observed,
                     const std::vector<double>& expected,
                     std::size_t constraints_absorbed) {
  if (observed.size() != expected.size()) {
    throw std::invalid_argument("chi2_test requires matching vector sizes");
  }
  Chi2Result result;
  std::size_t cells = 0;
  bool impossible = false;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (expected[i] < 0.0) {
      throw std::invalid_argument("chi2_test expected counts must be >= 0");
    }
    if (expected[i] == 0.0) {
      if (observed[i] != 0.0) {
        impossible = true;
      }
      continue;
    }
    const double diff = observed[i] - expected[i];
    result.statistic += diff * diff / expected[i];
    ++cells;
  }
  result.dof = cells > constraints_absorbed ? cells - constraints_absorbed : 0;
  if (impossible) {
    result.p_value = 0.0;
  } else if (result.dof == 0) {
    result.p_value = 1.0;
  } else {
    result.p_value = chi2_sf(result.statistic, static_cast<double>(result.dof));
  }
  return result;
}

Chi2Result chi2_test_constant(const std::vector<double>& observed) {
  if (observed.empty()) {
    throw std::invalid_argument("chi2_test_constant requires at least one cell");
  }
  const double avg = mean(observed);
  std::vector<double> expected(observed.size(), avg);
  return chi2_test(observed, expected, 1);
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("fit_line requires >= 2 matched points");
  }
  const auto n = static_cast<double>(x.size());
  double sx = 0.0;
  double sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n;
  const double my = sy / n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) {
    throw std::invalid_argument("fit_line requires non-degenerate x values");
  }
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  if (x.size() > 2) {
    const double variance = ss_res / (n - 2.0);
    fit.slope_sigma = std::sqrt(variance / sxx);
    fit.intercept_sigma = std::sqrt(variance * (1.0 / n + mx * mx / sxx));
  }
  return fit;
}

double mean(const std::vector<double>& values) {
  if (values.empty()) {
    return 0.0;
  }
  double sum = 0.0;
  for (const double v : values) {
    sum += v;
  }
  return sum / static_cast<double>(values.size());
}

double sample_stddev(const std::vector<double>& values) {
  if (values.size() < 2) {
    return 0.0;
  }
  const double m = mean(values);
  double ss = 0.0;
  for (const double v : values) {
    ss += (v - m) * (v - m);
  }
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

}  // namespace timebin
