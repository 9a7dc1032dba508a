#pragma once

#include <cstdint>
#include <vector>

#include "timebin/types.hpp"

namespace timebin {

/// Symmetric start-stop delay histogram.  Bin i covers delays around
/// center (i - half_bins) * bin_width_ps; delay is defined as
/// (t_b - t_a), so a positive delay means the second stream's tag arrived
/// later.
struct DelayHistogram {
  double bin_width_ps = 0.0;
  double max_delay_ps = 0.0;
  std::vector<std::uint64_t> counts;
  std::uint64_t total_pairs = 0;

  std::size_t half_bins() const { return (counts.size() - 1) / 2; }
  double bin_center_ps(std::size_t index) const;
};

/// Correlates two sorted tag streams: every (a, b) pair with
/// |t_a - t_b| <= max_delay_ps contributes one count to the bin nearest
/// its delay.  Runs in O(matches) beyond a linear merge.
DelayHistogram build_delay_histogram(const std::vector<TimeTag>& a,
                                     const std::vector<TimeTag>& b,
                                     double bin_width_ps, double max_delay_ps,
                                     double tick_resolution_ps);

struct PeakMetrics {
  bool found = false;
  double position_ps = 0.0;
  std::uint64_t peak_count = 0;
  double area = 0.0;
  double fwhm_ps = 0.0;
};

/// Characterizes the peak near center_guess_ps: position is the
/// count-weighted centroid of the bins within search_radius_ps, area the
/// integrated counts within window_ps around that position, and fwhm the
/// full width at half maximum obtained by linear interpolation of the
/// half-height crossings (a single-bin peak reports one bin width).
/// found is false when the search region holds no counts.
PeakMetrics peak_metrics(const DelayHistogram& hist, double center_guess_ps,
                         double search_radius_ps, double window_ps);

/// Integrated histogram counts within |delay - center_ps| <= window_ps / 2.
double window_counts(const DelayHistogram& hist, double center_ps,
                     double window_ps);

/// Exact pair count between two sorted tag streams with
/// |(t_b - t_a) - offset_ps| <= window_ps / 2, without histogram binning.
std::uint64_t count_pairs_near(const std::vector<TimeTag>& a,
                               const std::vector<TimeTag>& b, double offset_ps,
                               double window_ps, double tick_resolution_ps);

}  // namespace timebin
