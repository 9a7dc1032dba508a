#pragma once

#include <optional>
#include <string>
#include <vector>

namespace timebin {

/// Result of fitting y = offset + amplitude * cos(frequency * x + phase).
struct FringeFit {
  bool converged = false;
  double amplitude = 0.0;
  double offset = 0.0;
  double phase = 0.0;
  double frequency = 0.0;
  bool frequency_fixed = true;
  double visibility = 0.0;
  double amplitude_sigma = 0.0;
  double offset_sigma = 0.0;
  double phase_sigma = 0.0;
  double visibility_sigma = 0.0;
  double chi2 = 0.0;
  std::size_t dof = 0;
  /// Set when amplitude / offset exceeds 1: the fitted contrast is
  /// unphysical for a fringe, usually a symptom of a bad offset estimate.
  bool visibility_overflow = false;
  std::string diagnostics;
};

/// Least-squares cosine fit.
///
/// Requires at least 5 points with strictly monotone x (throws
/// std::invalid_argument otherwise).
///
/// With fixed_frequency set, the model is linear in (offset, cos, sin)
/// coefficients and is solved exactly via the normal equations.  Without
/// it, the frequency is located by a coarse scan of the fixed-frequency
/// residual followed by golden-section refinement; failure to bracket a
/// minimum is reported through converged = false and diagnostics.
///
/// sigma_y, when non-empty, must match y in size; points are then weighted
/// by 1/sigma^2 and chi2 is meaningful.  Otherwise unit weights are used
/// and parameter uncertainties are scaled by the residual variance.
FringeFit fit_cosine(const std::vector<double>& x,
                     const std::vector<double>& y,
                     const std::vector<double>& sigma_y = {},
                     std::optional<double> fixed_frequency = std::nullopt);

}  // namespace timebin
