#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "timebin/config.hpp"
#include "timebin/types.hpp"

namespace timebin {

enum class Basis : std::uint8_t { time, phase };

/// Sifted key material for one basis.  alice_bits and bob_bits have equal
/// length pair_count; qber is the fraction of positions where they
/// disagree (0 when empty).
struct SiftedBlock {
  Basis basis = Basis::time;
  std::vector<std::uint8_t> alice_bits;
  std::vector<std::uint8_t> bob_bits;
  double qber = 0.0;
  std::uint64_t pair_count = 0;
};

/// Detected tag streams of a two-receiver run: one stream per output port
/// of each receiver's interferometer (port index = phase-basis bit).
struct TwoReceiverOutput {
  std::array<std::vector<TimeTag>, 2> alice_ports;
  std::array<std::vector<TimeTag>, 2> bob_ports;
  double duration_s = 0.0;
};

/// Runs the full two-receiver pipeline: pairs are split deterministically
/// at the source (signal to Alice, idler to Bob), each photon traverses
/// its receiver's link, interferometer, and one of two detectors.
///
/// Same-bin (center) coincidences interfere with the Franson-type sum
/// phase delta_A + delta_B + pump_phase_step: the two photons exit equal
/// ports with probability (1 + V_eff cos Theta) / 2 and opposite ports
/// otherwise, where V_eff folds both interferometers' intrinsic contrast
/// and the dispersion washout of the two links.  Distinguishable events
/// (adjacent-bin outcomes, pairs at the first/last pulse with no
/// interference partner, and photons whose partner was lost) route to
/// ports uniformly.
///
/// Deterministic per run.seed.  Throws ConfigError if a receiver's
/// interferometer delay differs from the source bin period.
TwoReceiverOutput distribute_and_detect(const RunConfig& run,
                                        const ReceiverConfig& alice,
                                        const ReceiverConfig& bob);

/// Merges the two port streams of one receiver into a single
/// time-ordered stream (ties broken by channel).  Channel indices must
/// already identify the ports.
std::vector<TimeTag> merge_ports(const std::vector<TimeTag>& port0,
                                 const std::vector<TimeTag>& port1);

/// Sifts raw detection streams into key material.
///
/// Coincidences are matched greedily, earliest tag first, one-to-one
/// (each tag used at most once), taking the candidate with the smallest
/// time difference within bin_period + window/2.  A matched pair with
/// arrival difference within window/2 of zero is a phase-basis event (bit
/// = detector port, equal ports meaning equal bits); within window/2 of
/// +-bin_period it is a time-basis event (bit = arrival-bin parity on
/// Alice's side, inverted parity on Bob's, so genuine pairs agree).
/// Anything else is discarded.
///
/// Returns exactly two blocks: index 0 time basis, index 1 phase basis.
/// Throws std::invalid_argument if coincidence_window_ps >=
/// bin_period_ps / 2 (the bases become ambiguous) or if a stream is
/// unsorted.
std::vector<SiftedBlock> sift(const std::vector<TimeTag>& alice_tags,
                              const std::vector<TimeTag>& bob_tags,
                              double coincidence_window_ps,
                              double bin_period_ps,
                              double tick_resolution_ps = 1.0);

/// Asymptotic entanglement-based key fraction
/// max(0, 1 - h2(qber_time) - h2(qber_phase)).  Throws
/// std::invalid_argument when a QBER lies outside [0, 0.5].
double key_fraction(double qber_time, double qber_phase);

struct ThresholdCheck {
  bool entangled = false;
  bool key_positive = false;
};

/// entangled: visibility exceeds the 1/sqrt(2) two-photon interference
/// bound; key_positive: key_fraction at QBER (1 - V) / 2 in both bases is
/// positive.  Visibility must lie in [0, 1].
ThresholdCheck visibility_threshold_check(double visibility);

}  // namespace timebin
