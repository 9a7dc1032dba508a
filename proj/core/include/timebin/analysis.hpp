#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "timebin/histogram.hpp"
#include "timebin/types.hpp"

namespace timebin {

/// Coincidence-to-accidental ratio measured from a delay histogram.
struct CarResult {
  double window_ps = 0.0;
  double peak_counts = 0.0;
  double accidental_mean = 0.0;
  double car = 0.0;
  /// True when no accidentals were observed; car then holds a lower bound
  /// (peak counts against a one-count accidental floor).
  bool infinite = false;
};

/// Integrates the coincidence peak at peak_delay_ps over window_ps and
/// compares it with the mean of equal windows at each accidental offset.
/// Offsets must be provided and must not overlap the peak window.
CarResult compute_car(const DelayHistogram& hist, double window_ps,
                      double peak_delay_ps,
                      const std::vector<double>& accidental_offsets_ps);

/// Interference visibility from fringe extrema, with the accidental floor
/// subtracted from both: (cmax - cmin) / (cmax + cmin - 2 * accidentals).
double visibility_corrected(double c_max, double c_min, double accidentals);

/// Raw visibility (no background subtraction).
double visibility_raw(double c_max, double c_min);

/// Singles and coincidence rates with Poisson uncertainties.
struct RateReport {
  double duration_s = 0.0;
  double singles_a_hz = 0.0;
  double singles_a_sigma_hz = 0.0;
  double singles_b_hz = 0.0;
  double singles_b_sigma_hz = 0.0;
  double coincidences_hz = 0.0;
  double coincidences_sigma_hz = 0.0;
  double accidentals_hz = 0.0;
  std::uint64_t coincidence_counts = 0;
};

/// Counts singles on both channels and coincidences inside window_ps
/// around center_delay_ps, with accidentals estimated from the offset
/// windows (pass the same offsets used for CAR).
RateReport rate_report(const std::vector<TimeTag>& a,
                       const std::vector<TimeTag>& b, double duration_s,
                       double center_delay_ps, double window_ps,
                       const std::vector<double>& accidental_offsets_ps,
                       double tick_resolution_ps);

/// CSV rendering of a delay histogram: `delay_ps,count`, one row per bin.
std::string histogram_csv(const DelayHistogram& hist);

}  // namespace timebin
