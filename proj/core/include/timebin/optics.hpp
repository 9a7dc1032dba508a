#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "timebin/config.hpp"
#include "timebin/rng.hpp"
#include "timebin/types.hpp"

namespace timebin {

/// Outcome-class probabilities for a pair emitted by an interior pump
/// pulse traversing matched unbalanced interferometers with relative
/// phase delta, pump phase advancing by pump_phase_step per pulse, and
/// interference contrast v0 in [0, 1].
///
/// The two distinguishable path combinations are kept unconditionally
/// (1/4 each); the two indistinguishable same-path combinations interfere
/// with combined survival (1 + v0 * cos(2*delta + pump_phase_step)) / 2,
/// the complement exiting the unmonitored port.
OutcomeDistribution pair_outcome_distribution(double pump_phase_step,
                                              double delta, double v0 = 1.0);

/// Result of propagating one pair through the receiver interferometer.
struct TransformResult {
  PathOutcome outcome;
  bool signal_alive = false;
  bool idler_alive = false;
  double signal_time_ps = 0.0;
  double idler_time_ps = 0.0;
};

/// Samples interferometer paths for both photons of a pair, applies the
/// interference acceptance rule for same-path outcomes, and applies
/// per-photon insertion loss to the survivors.
///
/// Same-path outcomes with no interference partner - the short-short
/// combination of the first pulse and the long-long combination of the
/// last - are kept unconditionally, so the outermost arrival bins carry
/// the full 1/4 weight at every phase setting.
TransformResult transform_pair(const PairEvent& event, const MziConfig& mzi,
                               double pump_phase_step,
                               std::uint64_t pulse_count, Rng& rng);

enum class RoutedTo : std::uint8_t { det_a, det_b, absorbed };

/// Routes one photon through the pair-separation element.  A polarizing
/// splitter separates deterministically by role.  A balanced splitter
/// sends each photon to its matching output only half the time; the other
/// half exits the port that is not monitored for that photon, so the
/// photon is lost (a 3 dB penalty per photon, 6 dB per pair).
RoutedTo splitter_route(PhotonRole role, SplitterKind kind, Rng& rng);

/// One joint arrival cell of the analytic amplitude table.
struct AmplitudeEntry {
  std::int64_t signal_bin = 0;
  std::int64_t idler_bin = 0;
  std::complex<double> amplitude;
  double probability = 0.0;
};

/// Analytic prediction of the joint arrival-bin distribution for a short
/// phase-coherent pulse train.
struct AmplitudeTable {
  std::vector<AmplitudeEntry> entries;
  double discarded_probability = 0.0;

  double probability_for(std::int64_t signal_bin, std::int64_t idler_bin) const;
};

/// Builds the exact joint-bin distribution for n_pulses pump pulses with
/// per-pulse phases pump_phases (empty means all zero), interferometer
/// phase delta, and interference contrast v0.
///
/// Per pulse, each of the four path combinations carries amplitude
/// magnitude 1/2 (weight 1/4); long arms multiply by exp(i*delta) per
/// photon and the pair inherits exp(-i*phase_j) from its pump pulse.
/// Same-path combinations of adjacent pulses land in the same joint cell
/// and interfere: the cell probability is |a|^2 * (1 + v0 * cos(theta))
/// with theta the phase difference of the two contributions.  Cells with
/// a single contribution (the train boundaries) keep probability |a|^2;
/// pass include_boundary = false to drop them from the table.
///
/// n_pulses is capped at 20 (the table is meant for oracle-sized checks).
AmplitudeTable amplitude_oracle(std::uint64_t n_pulses, double delta,
                                const std::vector<double>& pump_phases,
                                bool include_boundary = true, double v0 = 1.0);

/// Classical (bright-light) fringe of the same interferometer:
/// I(delta) = peak_intensity * (1 + visibility * cos(delta)) / 2.
/// xs are heater powers when xs_are_heater_mw is true (mapped through the
/// interferometer heater calibration), otherwise phases in radians.
/// Note the classical fringe advances at half the rate of the two-photon
/// fringe, which oscillates in 2*delta.
std::vector<double> classical_interference(const std::vector<double>& xs,
                                           bool xs_are_heater_mw,
                                           const MziConfig& mzi,
                                           double classical_visibility,
                                           double peak_intensity = 1.0);

}  // namespace timebin
