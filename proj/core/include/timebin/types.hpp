#pragma once

#include <cstdint>

namespace timebin {

/// A detected event: integer timestamp in tick units plus channel index.
struct TimeTag {
  std::uint64_t ticks = 0;
  std::uint8_t channel = 0;

  friend bool operator==(const TimeTag&, const TimeTag&) = default;
};

/// Global timing constants shared across a simulation run.  The
/// interferometer path imbalance must equal the emission bin period; the
/// protocol is meaningless otherwise, so validate() rejects mismatches.
struct Units {
  double tick_resolution_ps = 1.0;
  double bin_period_ps = 1000.0;
  double mzi_delay_ps = 1000.0;

  void validate() const;
};

/// Decibel attenuation to linear survival probability (3 dB -> ~0.501).
double db_to_survival(double db);

/// Linear survival probability to decibel attenuation.
double survival_to_db(double survival);

/// One emitted photon pair before any optics: which pump pulse created it,
/// the emission time, the spectral detunings of both photons relative to
/// the spectrum center, and the pump phase imprinted on the pair.
struct PairEvent {
  std::int64_t origin_pulse = 0;
  double emission_time_ps = 0.0;
  double dlambda_signal_nm = 0.0;
  double dlambda_idler_nm = 0.0;
  double pump_phase_rad = 0.0;
};

enum class PhotonRole : std::uint8_t { signal, idler };

/// A single photon in flight.
struct Photon {
  double time_ps = 0.0;
  double dlambda_nm = 0.0;
  PhotonRole role = PhotonRole::signal;
  bool background = false;
};

/// Joint interferometer outcome classes for one pair.  side_minus is the
/// distinguishable outcome at relative delay (signal - idler) of -1 bin
/// (signal short, idler long), side_plus at +1 bin; center collects the
/// two indistinguishable same-path outcomes; discarded means the pair
/// interfered destructively and left through the unmonitored port.
enum class OutcomeKind : std::uint8_t { side_minus, side_plus, center, discarded };

struct PathOutcome {
  OutcomeKind kind = OutcomeKind::discarded;
  std::int64_t signal_bin = 0;
  std::int64_t idler_bin = 0;
};

/// Probabilities of the four outcome classes; sums to 1.
struct OutcomeDistribution {
  double side_minus = 0.0;
  double side_plus = 0.0;
  double center = 0.0;
  double discarded = 0.0;
};

}  // namespace timebin
