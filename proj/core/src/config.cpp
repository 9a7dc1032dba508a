#include "timebin/config.hpp"

#include <cmath>

namespace timebin {

namespace {

constexpr double kFwhmPerSigma = 2.3548200450309493;  // 2*sqrt(2*ln 2)

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

void require(bool ok, const std::string& message, const std::string& path) {
  if (!ok) {
    throw ConfigError(message, path);
  }
}

}  // namespace

double SpectrumConfig::sigma_nm() const { return fwhm_nm / kFwhmPerSigma; }

void SpectrumConfig::validate(const std::string& prefix) const {
  require(center_nm > 0.0, "center_nm must be positive", join(prefix, "center_nm"));
  require(fwhm_nm > 0.0, "fwhm_nm must be positive", join(prefix, "fwhm_nm"));
  require(correlation >= -1.0 && correlation <= 0.0,
          "correlation must lie in [-1, 0]", join(prefix, "correlation"));
}

void SourceConfig::validate(const std::string& prefix) const {
  spectrum.validate(join(prefix, "spectrum"));
  require(pulse_width_ps >= 0.0, "pulse_width_ps must be >= 0",
          join(prefix, "pulse_width_ps"));
}

double MziConfig::phase_for_heater(double heater_mw) const {
  return phase_offset_rad + phase_per_heater_mw * heater_mw;
}

void MziConfig::validate(const std::string& prefix) const {
  require(delay_ps > 0.0, "delay_ps must be positive", join(prefix, "delay_ps"));
  require(insertion_loss_db >= 0.0, "insertion_loss_db must be >= 0",
          join(prefix, "insertion_loss_db"));
  require(intrinsic_visibility >= 0.0 && intrinsic_visibility <= 1.0,
          "intrinsic_visibility must lie in [0, 1]",
          join(prefix, "intrinsic_visibility"));
  require(std::isfinite(phase_delta_rad), "phase_delta_rad must be finite",
          join(prefix, "phase_delta_rad"));
}

void DcmConfig::validate(const std::string& prefix) const {
  require(compensated_km >= 0.0, "compensated_km must be >= 0",
          join(prefix, "compensated_km"));
  require(insertion_loss_db >= 0.0, "insertion_loss_db must be >= 0",
          join(prefix, "insertion_loss_db"));
}

void LinkConfig::validate(const std::string& prefix) const {
  require(length_km >= 0.0, "length_km must be >= 0", join(prefix, "length_km"));
  require(loss_db >= 0.0, "loss_db must be >= 0", join(prefix, "loss_db"));
  require(dispersion_ps_per_nm_km >= 0.0,
          "dispersion_ps_per_nm_km must be >= 0",
          join(prefix, "dispersion_ps_per_nm_km"));
  require(background_rate_hz >= 0.0, "background_rate_hz must be >= 0",
          join(prefix, "background_rate_hz"));
  dcm.validate(join(prefix, "dcm"));
}

void DetectorConfig::validate(const std::string& prefix) const {
  require(!id.empty(), "id must be non-empty", join(prefix, "id"));
  require(efficiency > 0.0 && efficiency <= 1.0,
          "efficiency must lie in (0, 1]", join(prefix, "efficiency"));
  require(jitter_fwhm_ps >= 0.0, "jitter_fwhm_ps must be >= 0",
          join(prefix, "jitter_fwhm_ps"));
  require(dead_time_ns >= 0.0, "dead_time_ns must be >= 0",
          join(prefix, "dead_time_ns"));
  require(dark_rate_hz >= 0.0, "dark_rate_hz must be >= 0",
          join(prefix, "dark_rate_hz"));
}

void ReceiverConfig::validate(const std::string& prefix) const {
  mzi.validate(join(prefix, "mzi"));
  link.validate(join(prefix, "link"));
  detectors[0].validate(join(prefix, "detectors[0]"));
  detectors[1].validate(join(prefix, "detectors[1]"));
}

double RunConfig::duration_s() const {
  return static_cast<double>(pulse_count) * units.bin_period_ps * 1e-12;
}

void RunConfig::validate(const std::string& prefix) const {
  require(pulse_count > 0, "pulse_count must be positive",
          join(prefix, "pulse_count"));
  require(mu >= 0.0, "mu must be >= 0", join(prefix, "mu"));
  require(mu < 1.0,
          "mu must be < 1: the mean pairs per pulse is far outside the "
          "single-pair regime this model covers",
          join(prefix, "mu"));
  require(std::isfinite(pump_phase_step), "pump_phase_step must be finite",
          join(prefix, "pump_phase_step"));
  try {
    units.validate();
  } catch (const std::invalid_argument& err) {
    throw ConfigError(err.what(), join(prefix, "units"));
  }
  source.validate(join(prefix, "source"));
  mzi.validate(join(prefix, "mzi"));
  link.validate(join(prefix, "link"));
  detectors[0].validate(join(prefix, "detectors[0]"));
  detectors[1].validate(join(prefix, "detectors[1]"));
  require(std::fabs(mzi.delay_ps - units.bin_period_ps) <=
              1e-9 * units.bin_period_ps,
          "mzi.delay_ps must equal units.bin_period_ps",
          join(prefix, "mzi.delay_ps"));
}

void RunConfig::collect_warnings(const std::string& prefix,
                                 std::vector<std::string>& out) const {
  if (mu >= 0.1) {
    out.push_back(join(prefix, "mu") +
                  ": mu >= 0.1 leaves the low multi-pair regime; coincidence "
                  "statistics will be dominated by multi-pair accidentals");
  }
}

void AnalysisConfig::validate(const std::string& prefix) const {
  require(bin_width_ps > 0.0, "bin_width_ps must be positive",
          join(prefix, "bin_width_ps"));
  require(max_delay_ps >= bin_width_ps,
          "max_delay_ps must be >= bin_width_ps", join(prefix, "max_delay_ps"));
  require(coincidence_window_ps > 0.0, "coincidence_window_ps must be positive",
          join(prefix, "coincidence_window_ps"));
  for (const double offset : accidental_offsets_ps) {
    require(offset != 0.0,
            "accidental offsets must be away from the coincidence peak",
            join(prefix, "accidental_offsets_ps"));
  }
}

std::vector<double> SweepRange::values() const {
  std::vector<double> out;
  out.reserve(points);
  if (points == 1) {
    out.push_back(start);
    return out;
  }
  for (std::size_t i = 0; i < points; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(points - 1);
    out.push_back(start + (stop - start) * t);
  }
  return out;
}

void SweepRange::validate(const std::string& prefix) const {
  require(std::isfinite(start) && std::isfinite(stop),
          "range bounds must be finite", prefix);
}

void SweepConfig::validate(const std::string& prefix) const {
  heater_mw.validate(join(prefix, "heater_mw"));
  require(per_point_duration_s > 0.0, "per_point_duration_s must be positive",
          join(prefix, "per_point_duration_s"));
}

SplitterKind Scenario::splitter() const {
  switch (topology) {
    case Topology::single_receiver_bs:
      return SplitterKind::balanced_50_50;
    case Topology::single_receiver_pbs:
      return SplitterKind::polarizing;
    case Topology::two_receiver:
      return source_splitter;
  }
  return SplitterKind::polarizing;
}

void Scenario::validate() const {
  if (name.empty()) {
    throw ConfigError("name must be non-empty", "name");
  }
  run.validate("run");
  analysis.validate("analysis");
  sweep.validate("sweep");
  if (topology == Topology::two_receiver) {
    if (!receivers.has_value()) {
      throw ConfigError("two_receiver topology requires receivers",
                        "receivers");
    }
    (*receivers)[0].validate("receivers.alice");
    (*receivers)[1].validate("receivers.bob");
    for (int i = 0; i < 2; ++i) {
      const auto& mzi = (*receivers)[static_cast<std::size_t>(i)].mzi;
      if (std::fabs(mzi.delay_ps - run.units.bin_period_ps) >
          1e-9 * run.units.bin_period_ps) {
        throw ConfigError("receiver mzi.delay_ps must equal bin_period_ps",
                          i == 0 ? "receivers.alice.mzi.delay_ps"
                                 : "receivers.bob.mzi.delay_ps");
      }
    }
  }
}

std::vector<std::string> Scenario::warnings() const {
  std::vector<std::string> out;
  run.collect_warnings("run", out);
  return out;
}

double mu_from_power(double power_mw, double rep_rate_hz,
                     double brightness_hz_per_mw, double calibration) {
  if (power_mw < 0.0) {
    throw std::invalid_argument("power_mw must be >= 0");
  }
  if (!(rep_rate_hz > 0.0)) {
    throw std::invalid_argument("rep_rate_hz must be positive");
  }
  if (!(brightness_hz_per_mw > 0.0)) {
    throw std::invalid_argument("brightness_hz_per_mw must be positive");
  }
  if (!(calibration > 0.0)) {
    throw std::invalid_argument("calibration must be positive");
  }
  return power_mw * brightness_hz_per_mw * calibration / rep_rate_hz;
}

}  // namespace timebin
