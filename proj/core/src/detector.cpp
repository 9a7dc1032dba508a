#include "timebin/detector.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace timebin {

namespace {
constexpr double kFwhmPerSigma = 2.3548200450309493;
}

std::vector<TimeTag> detect(const std::vector<double>& arrival_times_ps,
                            const DetectorConfig& cfg, const Units& units,
                            double duration_s, Rng& rng,
                            std::uint8_t channel) {
  if (!std::is_sorted(arrival_times_ps.begin(), arrival_times_ps.end())) {
    throw std::invalid_argument("detect requires sorted arrival times");
  }
  if (duration_s < 0.0) {
    throw std::invalid_argument("duration_s must be >= 0");
  }

  std::vector<double> registered;
  registered.reserve(arrival_times_ps.size());
  for (const double t : arrival_times_ps) {
    if (rng.bernoulli(cfg.efficiency)) {
      registered.push_back(t);
    }
  }

  if (cfg.dark_rate_hz > 0.0 && duration_s > 0.0) {
    const std::uint64_t darks = rng.poisson(cfg.dark_rate_hz * duration_s);
    const double duration_ps = duration_s * 1e12;
    for (std::uint64_t i = 0; i < darks; ++i) {
      registered.push_back(rng.uniform() * duration_ps);
    }
  }

  const double jitter_sigma = cfg.jitter_fwhm_ps / kFwhmPerSigma;
  if (jitter_sigma > 0.0) {
    for (double& t : registered) {
      t += rng.normal(0.0, jitter_sigma);
    }
  }

  std::vector<std::uint64_t> ticks;
  ticks.reserve(registered.size());
  for (const double t : registered) {
    if (t < 0.0) {
      continue;
    }
    ticks.push_back(
        static_cast<std::uint64_t>(std::llround(t / units.tick_resolution_ps)));
  }
  std::sort(ticks.begin(), ticks.end());

  const auto dead_ticks = static_cast<std::uint64_t>(
      std::llround(cfg.dead_time_ns * 1000.0 / units.tick_resolution_ps));

  std::vector<TimeTag> tags;
  tags.reserve(ticks.size());
  bool have_last = false;
  std::uint64_t last = 0;
  for (const std::uint64_t tick : ticks) {
    if (have_last && dead_ticks > 0 && tick < last + dead_ticks) {
      continue;
    }
    tags.push_back(TimeTag{tick, channel});
    last = tick;
    have_last = true;
  }
  return tags;
}

std::vector<SaturationPoint> saturation_curve(
    const std::vector<double>& input_rates_hz, const DetectorConfig& cfg,
    const Units& units, double duration_s, Rng& rng) {
  if (!(duration_s > 0.0)) {
    throw std::invalid_argument("duration_s must be positive");
  }
  std::vector<SaturationPoint> points;
  points.reserve(input_rates_hz.size());
  for (const double rate : input_rates_hz) {
    if (rate < 0.0) {
      throw std::invalid_argument("input rates must be >= 0");
    }
    std::vector<double> arrivals;
    arrivals.reserve(static_cast<std::size_t>(rate * duration_s * 1.1) + 16);
    if (rate > 0.0) {
      const double rate_per_ps = rate * 1e-12;
      const double duration_ps = duration_s * 1e12;
      double t = rng.exponential(rate_per_ps);
      while (t < duration_ps) {
        arrivals.push_back(t);
        t += rng.exponential(rate_per_ps);
      }
    }
    const auto tags = detect(arrivals, cfg, units, duration_s, rng);
    SaturationPoint point;
    point.input_rate_hz = rate;
    point.observed_rate_hz = static_cast<double>(tags.size()) / duration_s;
    point.expected_linear_hz = cfg.efficiency * rate + cfg.dark_rate_hz;
    points.push_back(point);
  }
  return points;
}

}  // namespace timebin
