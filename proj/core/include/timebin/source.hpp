#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "timebin/config.hpp"
#include "timebin/rng.hpp"
#include "timebin/types.hpp"

namespace timebin {

/// Draws every pair emitted over a run of run.pulse_count pump pulses.
///
/// The number of pairs per pulse is Poisson with mean run.mu; rather than
/// looping over pulses (almost all of which emit nothing at the operating
/// points of interest), the total count is drawn once and origin pulses
/// are assigned uniformly, which is distributionally identical and costs
/// O(pairs log pairs).
///
/// Each pair carries: the origin pulse index, an emission time offset
/// uniformly within [pulse * bin_period, pulse * bin_period + pulse_width]
/// (identical for both photons of the pair), correlated spectral detunings
/// drawn from the joint Gaussian spectrum, and the pump phase
/// run.pump_phase_step * origin_pulse.
///
/// The result is sorted by origin pulse.
std::vector<PairEvent> emit_pairs(const RunConfig& run, Rng& rng);

/// Same sampling model as emit_pairs, restricted to the pulse index range
/// [first_pulse, first_pulse + block_pulses). Long runs can be generated in
/// bounded memory by concatenating consecutive blocks; pump phase and
/// emission times still reference the absolute pulse index.
std::vector<PairEvent> emit_pairs_block(const RunConfig& run,
                                        std::uint64_t first_pulse,
                                        std::uint64_t block_pulses, Rng& rng);

/// Expected pair count for the run (mu * pulse_count).
double expected_pairs(const RunConfig& run);

/// Draws one pair's spectral detunings in place: signal and idler offsets
/// from the joint Gaussian with marginal FWHM cfg.fwhm_nm and correlation
/// cfg.correlation (-1 gives exact anti-correlation, the energy-matched
/// limit).
void sample_spectrum(PairEvent& event, const SpectrumConfig& cfg, Rng& rng);

/// Histogram of absolute signal wavelengths (center + detuning), keyed by
/// the lower edge of each bin of width bin_width_nm. Suitable for writing
/// as `lambda_nm,count` rows.
std::map<double, std::uint64_t> spectrum_histogram(
    const std::vector<PairEvent>& events, double center_nm,
    double bin_width_nm);

/// CSV rendering of a spectrum histogram: `lambda_nm,count`, one row per
/// occupied bin (keyed by lower bin edge), ascending in wavelength.
std::string spectrum_csv(const std::map<double, std::uint64_t>& hist);

}  // namespace timebin
