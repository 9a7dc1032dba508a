#include "timebin/histogram.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace timebin {

namespace {

void check_sorted(const std::vector<TimeTag>& tags, const char* name) {
  if (!std::is_sorted(tags.begin(), tags.end(),
                      [](const TimeTag& x, const TimeTag& y) {
                        return x.ticks < y.ticks;
                      })) {
    throw std::invalid_argument(std::string(name) +
                                " tag stream must be sorted by ticks");
  }
}

}  // namespace

double DelayHistogram::bin_center_ps(std::size_t index) const {
  const auto half = static_cast<std::int64_t>(half_bins());
  return static_cast<double>(static_cast<std::int64_t>(index) - half) *
         bin_width_ps;
}

DelayHistogram build_delay_histogram(const std::vector<TimeTag>& a,
                                     const std::vector<TimeTag>& b,
                                     double bin_width_ps, double max_delay_ps,
                                     double tick_resolution_ps) {
  if (!(bin_width_ps > 0.0) || !(max_delay_ps >= bin_width_ps)) {
    throw std::invalid_argument(
        "build_delay_histogram requires bin_width_ps > 0 and max_delay_ps >= "
        "bin_width_ps");
  }
  if (!(tick_resolution_ps > 0.0)) {
    throw std::invalid_argument("tick_resolution_ps must be positive");
  }
  check_sorted(a, "first");
  check_sorted(b, "second");

  DelayHistogram hist;
  hist.bin_width_ps = bin_width_ps;
  hist.max_delay_ps = max_delay_ps;
  const auto half = static_cast<std::int64_t>(
      std::floor(max_delay_ps / bin_width_ps + 0.5));
  hist.counts.assign(static_cast<std::size_t>(2 * half + 1), 0);

  std::size_t lo = 0;
  for (const TimeTag& tag_a : a) {
    const double t_a = static_cast<double>(tag_a.ticks) * tick_resolution_ps;
    while (lo < b.size() &&
           static_cast<double>(b[lo].ticks) * tick_resolution_ps <
               t_a - max_delay_ps) {
      ++lo;
    }
    for (std::size_t j = lo; j < b.size(); ++j) {
      const double t_b = static_cast<double>(b[j].ticks) * tick_resolution_ps;
      if (t_b > t_a + max_delay_ps) {
        break;
      }
      const double delay = t_b - t_a;
      const auto rel = std::llround(delay / bin_width_ps);
      if (rel < -half || rel > half) {
        continue;
      }
      ++hist.counts[static_cast<std::size_t>(rel + half)];
      ++hist.total_pairs;
    }
  }
  return hist;
}

PeakMetrics peak_metrics(const DelayHistogram& hist, double center_guess_ps,
                         double search_radius_ps, double window_ps) {
  PeakMetrics metrics;
  if (hist.counts.empty()) {
    return metrics;
  }
  std::size_t best = 0;
  bool any = false;
  double weighted_sum = 0.0;
  double weight_total = 0.0;
  for (std::size_t i = 0; i < hist.counts.size(); ++i) {
    if (std::fabs(hist.bin_center_ps(i) - center_guess_ps) >
        search_radius_ps) {
      continue;
    }
    weighted_sum +=
        hist.bin_center_ps(i) * static_cast<double>(hist.counts[i]);
    weight_total += static_cast<double>(hist.counts[i]);
    if (!any || hist.counts[i] > hist.counts[best]) {
      best = i;
      any = true;
    }
  }
  if (!any || hist.counts[best] == 0) {
    return metrics;
  }
  metrics.found = true;
  metrics.peak_count = hist.counts[best];
  metrics.position_ps = weighted_sum / weight_total;
  metrics.area = window_counts(hist, metrics.position_ps, window_ps);

  // FWHM from linearly interpolated half-maximum crossings around the peak.
  const double half_max = static_cast<double>(hist.counts[best]) / 2.0;
  double left = metrics.position_ps - hist.bin_width_ps / 2.0;
  for (std::size_t i = best; i > 0; --i) {
    const double lower = static_cast<double>(hist.counts[i - 1]);
    const double upper = static_cast<double>(hist.counts[i]);
    if (lower <= half_max) {
      const double frac =
          upper > lower ? (upper - half_max) / (upper - lower) : 0.5;
      left = hist.bin_center_ps(i) - frac * hist.bin_width_ps;
      break;
    }
  }
  double right = metrics.position_ps + hist.bin_width_ps / 2.0;
  for (std::size_t i = best; i + 1 < hist.counts.size(); ++i) {
    const double lower = static_cast<double>(hist.counts[i + 1]);
    const double upper = static_cast<double>(hist.counts[i]);
    if (lower <= half_max) {
      const double frac =
          upper > lower ? (upper - half_max) / (upper - lower) : 0.5;
      right = hist.bin_center_ps(i) + frac * hist.bin_width_ps;
      break;
    }
  }
  metrics.fwhm_ps = std::max(right - left, hist.bin_width_ps);
  return metrics;
}

double window_counts(const DelayHistogram& hist, double center_ps,
                     double window_ps) {
  double total = 0.0;
  const double half_window = window_ps / 2.0;
  for (std::size_t i = 0; i < hist.counts.size(); ++i) {
    if (std::fabs(hist.bin_center_ps(i) - center_ps) <=
        half_window + 1e-9) {
      total += static_cast<double>(hist.counts[i]);
    }
  }
  return total;
}

std::uint64_t count_pairs_near(const std::vector<TimeTag>& a,
                               const std::vector<TimeTag>& b, double offset_ps,
                               double window_ps, double tick_resolution_ps) {
  if (!(window_ps > 0.0) || !(tick_resolution_ps > 0.0)) {
    throw std::invalid_argument(
        "count_pairs_near requires positive window and tick resolution");
  }
  check_sorted(a, "first");
  check_sorted(b, "second");
  const double half_window = window_ps / 2.0;
  std::uint64_t count = 0;
  std::size_t lo = 0;
  for (const TimeTag& tag_a : a) {
    const double t_a = static_cast<double>(tag_a.ticks) * tick_resolution_ps;
    const double lo_edge = t_a + offset_ps - half_window;
    const double hi_edge = t_a + offset_ps + half_window;
    while (lo < b.size() &&
           static_cast<double>(b[lo].ticks) * tick_resolution_ps < lo_edge) {
      ++lo;
    }
    for (std::size_t j = lo; j < b.size(); ++j) {
      const double t_b = static_cast<double>(b[j].ticks) * tick_resolution_ps;
      if (t_b > hi_edge) {
        break;
      }
      ++count;
    }
  }
  return count;
}

}  // namespace timebin
