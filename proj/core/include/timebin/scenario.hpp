#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "timebin/analysis.hpp"
#include "timebin/config.hpp"
#include "timebin/fit.hpp"
#include "timebin/stats.hpp"
#include "timebin/types.hpp"

namespace timebin {

/// Detected tag streams of one simulation run, one entry per detector
/// channel, with the channel names used in files and reports.
struct SimulationOutput {
  std::vector<std::string> channel_names;
  std::vector<std::vector<TimeTag>> channels;
  double duration_s = 0.0;
};

/// Runs the configured scenario end to end: pair emission, link loss and
/// dispersion, interferometer transit, routing, background injection, and
/// detection.  Single-receiver topologies yield two channels (signal-side
/// and idler-side detectors); two_receiver yields four (alice port 0/1,
/// bob port 0/1).  Deterministic per (scenario, run.seed); emission is
/// chunked so memory stays bounded for arbitrarily long runs.
SimulationOutput run_scenario(const Scenario& scenario);

/// JSON manifest fully describing one simulation: resolved configuration,
/// channel names, file names, and duration.  Byte-deterministic.
std::string simulation_manifest(const Scenario& scenario,
                                const SimulationOutput& output,
                                const std::vector<std::string>& file_names);

/// One sample of the two-photon fringe.
struct FringePoint {
  double heater_mw = 0.0;
  double phase_rad = 0.0;
  std::uint64_t center_counts = 0;
  /// Arithmetic mean of the two side-peak window counts.
  double side_counts = 0.0;
  /// Mean count over the accidental-offset windows (same width).
  double accidental_counts = 0.0;
};

struct PhaseSweepResult {
  std::vector<FringePoint> points;
  /// Cosine fit of center counts against phase (frequency fixed at 2:
  /// the two-photon fringe advances at twice the interferometer phase).
  FringeFit raw_fit;
  /// Same fit after subtracting the accidental estimate per point.
  FringeFit corrected_fit;
};

/// Simulates one run per heater point (phase through the heater map),
/// counts center-window and side-window coincidences, and fits the
/// fringe.  Two-receiver scenarios sweep Alice's phase and count
/// equal-port coincidences, where the Franson fringe lives.  Each point
/// runs sweep.per_point_duration_s of emission with a seed derived from
/// (run.seed, point index).
PhaseSweepResult sweep_phase(const Scenario& scenario, unsigned threads = 1);

/// CSV rendering of fringe points: `heater_mW,phase_rad,center_counts,
/// side_counts` (one header line, \n separators).
std::string fringe_csv(const std::vector<FringePoint>& points);

struct PowerPoint {
  double power_mw = 0.0;
  double mu = 0.0;
  RateReport rates;
  CarResult car;
};

/// Pump-power sweep: per power, mu is derived from the laser/source
/// calibration, the full pipeline runs for sweep.per_point_duration_s,
/// and singles/coincidence rates plus the coincidence-to-accidental
/// ratio are measured.  Powers must be positive.
std::vector<PowerPoint> sweep_power(const Scenario& scenario,
                                    const std::vector<double>& powers_mw,
                                    double rep_rate_hz,
                                    double brightness_hz_per_mw,
                                    double calibration,
                                    unsigned threads = 1);

/// CSV rendering of power points: `power_mw,mu,singles_a_hz,singles_b_hz,
/// coincidences_hz,accidentals_hz,car`.
std::string power_csv(const std::vector<PowerPoint>& points);

/// Named configuration presets.
std::vector<std::string> preset_names();

/// Returns the preset with the given name; throws ConfigError whose
/// message lists the available presets otherwise.
Scenario preset_scenario(const std::string& name);

/// Bench configuration: source and receiver co-located, balanced
/// splitter, no link.
Scenario back_to_back_scenario();

/// Deployed-fiber configuration: 28.6 km / 9.5 dB metropolitan link with
/// a dispersion-compensation module and broadband background light.
Scenario vienna_link_scenario();

struct OracleCheckRow {
  double delta_rad = 0.0;
  Chi2Result chi2;
  std::uint64_t samples = 0;
};

struct OracleCheckResult {
  std::uint64_t pulse_count = 0;
  std::vector<OracleCheckRow> rows;
  /// True when every row has chi-squared p-value > 0.01.
  bool pass = false;
};

/// Monte Carlo versus analytic joint-bin distribution: samples pairs
/// (uniform origin pulse, full interferometer transit at unit contrast
/// and zero insertion loss) and chi-squared-tests the observed cell
/// frequencies, including the discarded class, against the amplitude
/// table.  n_pulses is capped at 20 by the oracle.
OracleCheckResult oracle_check(std::uint64_t n_pulses,
                               const std::vector<double>& deltas_rad,
                               std::uint64_t samples, std::uint64_t seed,
                               double pump_phase_step = 0.0);

}  // namespace timebin
