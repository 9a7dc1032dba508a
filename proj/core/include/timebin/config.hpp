#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "timebin/types.hpp"

namespace timebin {

/// Configuration validation failure carrying the dotted key path of the
/// offending field (e.g. "run.mzi.insertion_loss_db").
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, std::string key_path)
      : std::runtime_error(key_path.empty() ? message
                                            : key_path + ": " + message),
        key_path_(std::move(key_path)) {}

  const std::string& key_path() const { return key_path_; }

 private:
  std::string key_path_;
};

/// Joint spectral model of the emitted pair: Gaussian marginals around
/// center_nm with the given intensity FWHM, and a correlation coefficient
/// between the signal and idler detunings.  Energy conservation in the
/// generation process corresponds to correlation = -1 (anti-correlated
/// detunings), the default.
struct SpectrumConfig {
  double center_nm = 1554.0;
  double fwhm_nm = 3.4;
  double correlation = -1.0;

  double sigma_nm() const;
  void validate(const std::string& prefix) const;
};

struct SourceConfig {
  SpectrumConfig spectrum;
  double pulse_width_ps = 150.0;

  void validate(const std::string& prefix) const;
};

/// Unbalanced Mach-Zehnder interferometer.  phase_delta_rad is the
/// relative phase applied in the long arm; the heater mapping converts a
/// drive power to that phase for sweep scenarios.
struct MziConfig {
  double delay_ps = 1000.0;
  double phase_delta_rad = 0.0;
  double insertion_loss_db = 1.6;
  double intrinsic_visibility = 1.0;
  double phase_per_heater_mw = 0.0;
  double phase_offset_rad = 0.0;

  double phase_for_heater(double heater_mw) const;
  void validate(const std::string& prefix) const;
};

/// Dispersion-compensation module placed at the receiver end of a link.
struct DcmConfig {
  bool enabled = false;
  double compensated_km = 0.0;
  double insertion_loss_db = 2.9;

  void validate(const std::string& prefix) const;
};

/// Deployed-fiber link: length, total attenuation, chromatic dispersion
/// coefficient, optional compensation module, and a rate of uncorrelated
/// background photons entering the receiver with the signal.
struct LinkConfig {
  double length_km = 0.0;
  double loss_db = 0.0;
  double dispersion_ps_per_nm_km = 18.0;
  DcmConfig dcm;
  double background_rate_hz = 0.0;

  void validate(const std::string& prefix) const;
};

struct DetectorConfig {
  std::string id = "det";
  double efficiency = 0.8;
  double jitter_fwhm_ps = 175.0;
  double dead_time_ns = 25.0;
  double dark_rate_hz = 0.0;

  void validate(const std::string& prefix) const;
};

/// How the two photons of a pair are separated onto the two detector
/// channels.  balanced_50_50 models a passive splitter where each photon
/// exits the wrong port half the time (those pairs are lost, a 3 dB
/// penalty per photon); polarizing models deterministic separation.
enum class SplitterKind : std::uint8_t { balanced_50_50, polarizing };

enum class Topology : std::uint8_t {
  single_receiver_bs,
  single_receiver_pbs,
  two_receiver,
};

/// One receiver of a two-receiver deployment: its own interferometer,
/// link, and detector pair.
struct ReceiverConfig {
  MziConfig mzi;
  LinkConfig link;
  std::array<DetectorConfig, 2> detectors;

  void validate(const std::string& prefix) const;
};

/// Top-level emission / timing parameters of a simulation run.
struct RunConfig {
  std::uint64_t pulse_count = 1000000;
  std::uint64_t seed = 1;
  double mu = 0.0018;
  double pump_phase_step = 0.0;
  Units units;
  SourceConfig source;
  MziConfig mzi;
  LinkConfig link;
  std::array<DetectorConfig, 2> detectors;

  double duration_s() const;
  void validate(const std::string& prefix) const;
  void collect_warnings(const std::string& prefix,
                        std::vector<std::string>& out) const;
};

struct AnalysisConfig {
  double bin_width_ps = 50.0;
  double max_delay_ps = 5000.0;
  double coincidence_window_ps = 400.0;
  std::vector<double> accidental_offsets_ps = {-3500.0, -2500.0, 2500.0,
                                               3500.0};

  void validate(const std::string& prefix) const;
};

struct SweepRange {
  double start = 0.0;
  double stop = 0.0;
  std::size_t points = 0;

  std::vector<double> values() const;
  void validate(const std::string& prefix) const;
};

struct SweepConfig {
  SweepRange heater_mw;
  double per_point_duration_s = 1.0;

  void validate(const std::string& prefix) const;
};

/// A complete named simulation scenario.  receivers is only used (and only
/// validated) for the two_receiver topology.
struct Scenario {
  std::string name = "scenario";
  Topology topology = Topology::single_receiver_bs;
  /// Splitter separating the pair at the source in two_receiver mode;
  /// ignored for single-receiver topologies (implied by the topology).
  SplitterKind source_splitter = SplitterKind::polarizing;
  RunConfig run;
  std::optional<std::array<ReceiverConfig, 2>> receivers;
  AnalysisConfig analysis;
  SweepConfig sweep;

  SplitterKind splitter() const;
  void validate() const;
  std::vector<std::string> warnings() const;
};

/// Mean pairs per pulse from pump power, repetition rate, source
/// brightness, and the calibration factor relating the brightness figure
/// to in-band collected pairs.
double mu_from_power(double power_mw, double rep_rate_hz,
                     double brightness_hz_per_mw, double calibration);

}  // namespace timebin
