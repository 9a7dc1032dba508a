#include "timebin/fit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace timebin {

namespace {

struct LinearSolution {
  bool ok = false;
  double coeff[3] = {0.0, 0.0, 0.0};  // offset, cos, sin
  double cov[3][3] = {};
  double ssr = 0.0;   // weighted sum of squared residuals
};

/// Solves the weighted normal equations for
/// y = c0 + c1 * cos(w x) + c2 * sin(w x).
LinearSolution solve_at_frequency(const std::vector<double>& x,
                                  const std::vector<double>& y,
                                  const std::vector<double>& w,
                                  double frequency) {
  double ata[3][3] = {};
  double atb[3] = {};
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double basis[3] = {1.0, std::cos(frequency * x[i]),
                             std::sin(frequency * x[i])};
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        ata[r][c] += w[i] * basis[r] * basis[c];
      }
      atb[r] += w[i] * basis[r] * y[i];
    }
  }

  // Invert the 3x3 normal matrix by Gauss-Jordan with partial pivoting.
  double aug[3][6] = {};
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      aug[r][c] = ata[r][c];
    }
    aug[r][3 + r] = 1.0;
  }
  LinearSolution sol;
  for (int col = 0; col < 3; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 3; ++r) {
      if (std::fabs(aug[r][col]) > std::fabs(aug[pivot][col])) {
        pivot = r;
      }
    }
    if (std::fabs(aug[pivot][col]) < 1e-12) {
      return sol;  // singular: not enough independent basis support
    }
    if (pivot != col) {
      for (int c = 0; c < 6; ++c) {
        std::swap(aug[pivot][c], aug[col][c]);
      }
    }
    const double inv_pivot = 1.0 / aug[col][col];
    for (int c = 0; c < 6; ++c) {
      aug[col][c] *= inv_pivot;
    }
    for (int r = 0; r < 3; ++r) {
      if (r == col) {
        continue;
      }
      const double factor = aug[r][col];
      for (int c = 0; c < 6; ++c) {
        aug[r][c] -= factor * aug[col][c];
      }
    }
  }
  double inv[3][3];
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      inv[r][c] = aug[r][3 + c];
    }
  }
  for (int r = 0; r < 3; ++r) {
    sol.coeff[r] = 0.0;
    for (int c = 0; c < 3; ++c) {
      sol.coeff[r] += inv[r][c] * atb[c];
    }
    for (int c = 0; c < 3; ++c) {
      sol.cov[r][c] = inv[r][c];
    }
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double model = sol.coeff[0] +
                         sol.coeff[1] * std::cos(frequency * x[i]) +
                         sol.coeff[2] * std::sin(frequency * x[i]);
    const double r = y[i] - model;
    sol.ssr += w[i] * r * r;
  }
  sol.ok = true;
  return sol;
}

}  // namespace

FringeFit fit_cosine(const std::vector<double>& x,
                     const std::vector<double>& y,
                     const std::vector<double>& sigma_y,
                     std::optional<double> fixed_frequency) {
  FringeFit fit;
  if (x.size() != y.size()) {
    throw std::invalid_argument("fit_cosine requires matching x/y sizes");
  }
  if (!sigma_y.empty() && sigma_y.size() != y.size()) {
    throw std::invalid_argument("sigma_y must be empty or match y in size");
  }
  if (x.size() < 5) {
    throw std::invalid_argument("fit_cosine requires at least 5 points");
  }
  const bool increasing = x[1] > x[0];
  for (std::size_t i = 1; i < x.size(); ++i) {
    const bool step_up = x[i] > x[i - 1];
    if (step_up != increasing || x[i] == x[i - 1]) {
      throw std::invalid_argument("fit_cosine requires strictly monotone x");
    }
  }

  std::vector<double> weights(x.size(), 1.0);
  const bool weighted = !sigma_y.empty();
  if (weighted) {
    for (std::size_t i = 0; i < sigma_y.size(); ++i) {
      if (!(sigma_y[i] > 0.0)) {
        throw std::invalid_argument("sigma_y values must be positive");
      }
      weights[i] = 1.0 / (sigma_y[i] * sigma_y[i]);
    }
  }

  double frequency = 0.0;
  LinearSolution best;
  if (fixed_frequency) {
    if (!(*fixed_frequency > 0.0)) {
      throw std::invalid_argument("fixed_frequency must be positive");
    }
    frequency = *fixed_frequency;
    best = solve_at_frequency(x, y, weights, frequency);
    if (!best.ok) {
      fit.diagnostics =
          "normal equations singular at the fixed frequency (x values do "
          "not resolve the fringe)";
      return fit;
    }
  } else {
    const auto [min_it, max_it] = std::minmax_element(x.begin(), x.end());
    const double span = *max_it - *min_it;
    if (!(span > 0.0)) {
      throw std::invalid_argument("fit_cosine requires spread in x");
    }
    // Coarse scan between half a cycle and points/2 cycles over the span.
    const double lo = M_PI / span;
    const double hi = M_PI * static_cast<double>(x.size()) / span;
    constexpr int kScan = 400;
    double best_freq = lo;
    double best_ssr = 0.0;
    bool have_best = false;
    for (int i = 0; i <= kScan; ++i) {
      const double f =
          lo * std::pow(hi / lo, static_cast<double>(i) / kScan);
      const LinearSolution sol = solve_at_frequency(x, y, weights, f);
      if (sol.ok && (!have_best || sol.ssr < best_ssr)) {
        best_ssr = sol.ssr;
        best_freq = f;
        have_best = true;
      }
    }
    if (!have_best) {
      fit.diagnostics = "frequency scan found no solvable frequency";
      fit.frequency_fixed = false;
      return fit;
    }
    // Golden-section refinement around the scan minimum.
    const double ratio = std::pow(hi / lo, 1.0 / kScan);
    double a = best_freq / ratio;
    double b = best_freq * ratio;
    constexpr double kGolden = 0.6180339887498949;
    double c = b - kGolden * (b - a);
    double d = a + kGolden * (b - a);
    double fc = solve_at_frequency(x, y, weights, c).ssr;
    double fd = solve_at_frequency(x, y, weights, d).ssr;
    for (int iter = 0; iter < 200 && (b - a) > 1e-12 * best_freq; ++iter) {
      if (fc < fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - kGolden * (b - a);
        fc = solve_at_frequency(x, y, weights, c).ssr;
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + kGolden * (b - a);
        fd = solve_at_frequency(x, y, weights, d).ssr;
      }
    }
    frequency = (a + b) / 2.0;
    best = solve_at_frequency(x, y, weights, frequency);
    if (!best.ok) {
      fit.diagnostics = "refined frequency left the solvable region";
      fit.frequency_fixed = false;
      return fit;
    }
    fit.frequency_fixed = false;
  }

  const double c0 = best.coeff[0];
  const double a = best.coeff[1];
  const double b = best.coeff[2];
  const double amplitude = std::hypot(a, b);

  fit.converged = true;
  fit.frequency = frequency;
  fit.offset = c0;
  fit.amplitude = amplitude;
  fit.phase = std::atan2(-b, a);

  const std::size_t params = fixed_frequency ? 3 : 4;
  fit.dof = x.size() > params ? x.size() - params : 0;
  fit.chi2 = best.ssr;

  // Unweighted fits estimate the noise scale from the residuals.
  double cov_scale = 1.0;
  if (!weighted && fit.dof > 0) {
    cov_scale = best.ssr / static_cast<double>(fit.dof);
  }
  const auto cov = [&](int r, int c) { return cov_scale * best.cov[r][c]; };

  fit.offset_sigma = std::sqrt(std::max(0.0, cov(0, 0)));
  if (amplitude > 0.0) {
    const double da = a / amplitude;
    const double db = b / amplitude;
    fit.amplitude_sigma = std::sqrt(std::max(
        0.0, da * da * cov(1, 1) + db * db * cov(2, 2) +
                 2.0 * da * db * cov(1, 2)));
    const double pa = b / (amplitude * amplitude);
    const double pb = -a / (amplitude * amplitude);
    fit.phase_sigma = std::sqrt(std::max(
        0.0, pa * pa * cov(1, 1) + pb * pb * cov(2, 2) +
                 2.0 * pa * pb * cov(1, 2)));
  }

  if (c0 > 0.0) {
    fit.visibility = amplitude / c0;
    if (amplitude > 0.0) {
      const double g0 = -amplitude / (c0 * c0);
      const double g1 = a / (amplitude * c0);
      const double g2 = b / (amplitude * c0);
      double var = g0 * g0 * cov(0, 0) + g1 * g1 * cov(1, 1) +
                   g2 * g2 * cov(2, 2) + 2.0 * g0 * g1 * cov(0, 1) +
                   2.0 * g0 * g2 * cov(0, 2) + 2.0 * g1 * g2 * cov(1, 2);
      fit.visibility_sigma = std::sqrt(std::max(0.0, var));
    }
    if (fit.visibility > 1.0) {
      fit.visibility_overflow = true;
      fit.diagnostics =
          "fitted contrast exceeds 1; offset estimate is unreliable";
    }
  } else {
    fit.visibility_overflow = true;
    fit.diagnostics = "fitted offset is non-positive; contrast undefined";
  }
  return fit;
}

}  // namespace timebin
