#pragma once

#include <cstdint>
#include <vector>

#include "timebin/config.hpp"
#include "timebin/rng.hpp"
#include "timebin/types.hpp"

namespace timebin {

/// Converts photon arrival times (ps, sorted ascending) on one detector
/// into registered time tags.
///
/// Stages, in order: quantum-efficiency thinning of the photons, addition
/// of dark counts (Poisson at the observed dark rate over duration_s,
/// unaffected by efficiency), Gaussian timing jitter on every event,
/// quantization to ticks, and a non-paralyzable dead time that keeps an
/// event only if it falls at or after the previous kept event plus the
/// dead time.  Events jittered to negative times are dropped.
///
/// Throws std::invalid_argument if the input is not sorted.
std::vector<TimeTag> detect(const std::vector<double>& arrival_times_ps,
                            const DetectorConfig& cfg, const Units& units,
                            double duration_s, Rng& rng,
                            std::uint8_t channel = 0);

struct SaturationPoint {
  double input_rate_hz = 0.0;
  double observed_rate_hz = 0.0;
  double expected_linear_hz = 0.0;
};

/// Measures the detector count-rate response to Poissonian illumination at
/// each input rate.  expected_linear is what a dead-time-free detector
/// would report (efficiency * input + dark rate); observed saturates
/// toward 1 / dead_time as the input grows.
std::vector<SaturationPoint> saturation_curve(
    const std::vector<double>& input_rates_hz, const DetectorConfig& cfg,
    const Units& units, double duration_s, Rng& rng);

}  // namespace timebin
