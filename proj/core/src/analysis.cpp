#include "timebin/analysis.hpp"

#include <cmath>
#include <stdexcept>

#include "timebin/text.hpp"

namespace timebin {

CarResult compute_car(const DelayHistogram& hist, double window_ps,
                      double peak_delay_ps,
                      const std::vector<double>& accidental_offsets_ps) {
  if (!(window_ps > 0.0)) {
    throw std::invalid_argument("compute_car requires a positive window");
  }
  if (accidental_offsets_ps.empty()) {
    throw std::invalid_argument(
        "compute_car requires at least one accidental offset");
  }
  for (const double offset : accidental_offsets_ps) {
    if (std::fabs(offset) < window_ps) {
      throw std::invalid_argument(
          "accidental offsets must clear the coincidence window");
    }
  }

  CarResult result;
  result.window_ps = window_ps;
  result.peak_counts = window_counts(hist, peak_delay_ps, window_ps);
  double total = 0.0;
  for (const double offset : accidental_offsets_ps) {
    total += window_counts(hist, peak_delay_ps + offset, window_ps);
  }
  result.accidental_mean =
      total / static_cast<double>(accidental_offsets_ps.size());
  if (result.accidental_mean > 0.0) {
    result.car = result.peak_counts / result.accidental_mean;
  } else {
    result.infinite = true;
    result.car = result.peak_counts;  // lower bound against a 1-count floor
  }
  return result;
}

double visibility_corrected(double c_max, double c_min, double accidentals) {
  if (c_max < c_min) {
    throw std::invalid_argument("visibility requires c_max >= c_min");
  }
  const double denom = c_max + c_min - 2.0 * accidentals;
  if (!(denom > 0.0)) {
    throw std::invalid_argument(
        "corrected visibility undefined: accidentals exceed the fringe mean");
  }
  return (c_max - c_min) / denom;
}

double visibility_raw(double c_max, double c_min) {
  if (c_max < c_min) {
    throw std::invalid_argument("visibility requires c_max >= c_min");
  }
  const double denom = c_max + c_min;
  if (!(denom > 0.0)) {
    throw std::invalid_argument("visibility undefined for empty fringe");
  }
  return (c_max - c_min) / denom;
}

RateReport rate_report(const std::vector<TimeTag>& a,
                       const std::vector<TimeTag>& b, double duration_s,
                       double center_delay_ps, double window_ps,
                       const std::vector<double>& accidental_offsets_ps,
                       double tick_resolution_ps) {
  if (!(duration_s > 0.0)) {
    throw std::invalid_argument("rate_report requires positive duration");
  }
  RateReport report;
  report.duration_s = duration_s;
  report.singles_a_hz = static_cast<double>(a.size()) / duration_s;
  report.singles_a_sigma_hz = std::sqrt(static_cast<double>(a.size())) / duration_s;
  report.singles_b_hz = static_cast<double>(b.size()) / duration_s;
  report.singles_b_sigma_hz = std::sqrt(static_cast<double>(b.size())) / duration_s;

  report.coincidence_counts =
      count_pairs_near(a, b, center_delay_ps, window_ps, tick_resolution_ps);
  report.coincidences_hz =
      static_cast<double>(report.coincidence_counts) / duration_s;
  report.coincidences_sigma_hz =
      std::sqrt(static_cast<double>(report.coincidence_counts)) / duration_s;

  if (!accidental_offsets_ps.empty()) {
    double total = 0.0;
    for (const double offset : accidental_offsets_ps) {
      total += static_cast<double>(count_pairs_near(
          a, b, center_delay_ps + offset, window_ps, tick_resolution_ps));
    }
    report.accidentals_hz =
        total / static_cast<double>(accidental_offsets_ps.size()) / duration_s;
  }
  return report;
}

std::string histogram_csv(const DelayHistogram& hist) {
  std::string csv = "delay_ps,count\n";
  for (std::size_t i = 0; i < hist.counts.size(); ++i) {
    csv += format_double(hist.bin_center_ps(i));
    csv += ',';
    csv += std::to_string(hist.counts[i]);
    csv += '\n';
  }
  return csv;
}

}  // namespace timebin
