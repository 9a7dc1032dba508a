// tbsim: command-line front end for the time-bin pair simulator.
//
// Subcommands: simulate | analyze | sweep-phase | sweep-power |
// oracle-check | report.  Exit codes: 0 success, 1 runtime failure,
// 2 usage or configuration error.  TBSIM_CONFIG_DIR names the directory
// searched for bare --config file names.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "timebin/analysis.hpp"
#include "timebin/channel.hpp"
#include "timebin/config.hpp"
#include "timebin/config_io.hpp"
#include "timebin/histogram.hpp"
#include "timebin/optics.hpp"
#include "timebin/qkd.hpp"
#include "timebin/scenario.hpp"
#include "timebin/tags_io.hpp"
#include "timebin/text.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace timebin;

struct CommonOptions {
  std::string scenario_name;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  std::string format;
  unsigned threads = 1;
};

void add_common_options(CLI::App* cmd, CommonOptions& options,
                        bool with_format = true) {
  cmd->add_option("--scenario", options.scenario_name,
                  "Preset scenario name (see `tbsim simulate --help`)");
  cmd->add_option("--config", options.config_path,
                  "Scenario JSON file (bare names are searched in "
                  "$TBSIM_CONFIG_DIR)");
  cmd->add_option("--seed", options.seed, "Override the scenario seed");
  cmd->add_option("--out", options.out_dir, "Output directory")
      ->capture_default_str();
  if (with_format) {
    cmd->add_option("--format", options.format, "Output format")
        ->check(CLI::IsMember({"csv", "json"}));
  }
  cmd->add_option("--threads", options.threads,
                  "Worker threads for sweep points")
      ->capture_default_str();
}

std::string resolve_config_path(const std::string& path) {
  namespace fs = std::filesystem;
  if (fs::exists(path)) {
    return path;
  }
  if (path.find('/') == std::string::npos) {
    if (const char* dir = std::getenv("TBSIM_CONFIG_DIR")) {
      const fs::path candidate = fs::path(dir) / path;
      if (fs::exists(candidate)) {
        return candidate.string();
      }
    }
  }
  return path;  // load_scenario_file reports the open failure
}

Scenario resolve_scenario(const CommonOptions& options) {
  if (!options.scenario_name.empty() && !options.config_path.empty()) {
    throw ConfigError("--scenario and --config are mutually exclusive", "");
  }
  Scenario scenario;
  if (!options.config_path.empty()) {
    scenario = load_scenario_file(resolve_config_path(options.config_path));
  } else {
    scenario = preset_scenario(options.scenario_name.empty()
                                   ? "back_to_back"
                                   : options.scenario_name);
  }
  if (options.seed) {
    scenario.run.seed = *options.seed;
  }
  for (const std::string& warning : scenario.warnings()) {
    std::cerr << "warning: " << warning << "\n";
  }
  return scenario;
}

std::filesystem::path ensure_out_dir(const std::string& out_dir) {
  const std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);
  return dir;
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open '" + path.string() +
                             "' for writing");
  }
  out << content;
  if (!out) {
    throw std::runtime_error("failed writing '" + path.string() + "'");
  }
}

/// Reads a tag file in either container format, TTG1 detected by magic.
TagFile read_tag_file(const std::string& path, double fallback_tick_ps) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) {
    throw std::runtime_error("cannot open tag file '" + path + "'");
  }
  char magic[4] = {};
  probe.read(magic, 4);
  probe.close();
  if (std::string(magic, 4) == "TTG1") {
    return read_ttg1(path);
  }
  TagFile file;
  file.tags = read_tags_csv(path);
  file.tick_resolution_ps = fallback_tick_ps;
  std::uint8_t max_channel = 0;
  for (const TimeTag& tag : file.tags) {
    max_channel = std::max(max_channel, tag.channel);
  }
  file.channel_count = static_cast<std::uint8_t>(max_channel + 1);
  return file;
}

json fit_to_json(const FringeFit& fit) {
  json out;
  out["converged"] = fit.converged;
  if (!fit.converged) {
    out["diagnostics"] = fit.diagnostics;
    return out;
  }
  out["offset"] = fit.offset;
  out["offset_sigma"] = fit.offset_sigma;
  out["amplitude"] = fit.amplitude;
  out["amplitude_sigma"] = fit.amplitude_sigma;
  out["phase_rad"] = fit.phase;
  out["phase_sigma"] = fit.phase_sigma;
  out["frequency"] = fit.frequency;
  out["frequency_fixed"] = fit.frequency_fixed;
  out["visibility"] = fit.visibility;
  out["visibility_sigma"] = fit.visibility_sigma;
  out["visibility_overflow"] = fit.visibility_overflow;
  out["chi2"] = fit.chi2;
  out["dof"] = fit.dof;
  if (!fit.diagnostics.empty()) {
    out["diagnostics"] = fit.diagnostics;
  }
  return out;
}

json rates_to_json(const RateReport& rates) {
  json out;
  out["duration_s"] = rates.duration_s;
  out["singles_a_hz"] = rates.singles_a_hz;
  out["singles_a_sigma_hz"] = rates.singles_a_sigma_hz;
  out["singles_b_hz"] = rates.singles_b_hz;
  out["singles_b_sigma_hz"] = rates.singles_b_sigma_hz;
  out["coincidences_hz"] = rates.coincidences_hz;
  out["coincidences_sigma_hz"] = rates.coincidences_sigma_hz;
  out["accidentals_hz"] = rates.accidentals_hz;
  out["coincidence_counts"] = rates.coincidence_counts;
  return out;
}

json car_to_json(const CarResult& car) {
  json out;
  out["window_ps"] = car.window_ps;
  out["peak_counts"] = car.peak_counts;
  out["accidental_mean"] = car.accidental_mean;
  out["car"] = car.car;
  out["infinite"] = car.infinite;
  return out;
}

json peak_to_json(const PeakMetrics& peak) {
  json out;
  out["found"] = peak.found;
  if (peak.found) {
    out["position_ps"] = peak.position_ps;
    out["peak_count"] = peak.peak_count;
    out["area"] = peak.area;
    out["fwhm_ps"] = peak.fwhm_ps;
  }
  return out;
}

int cmd_simulate(const CommonOptions& options) {
  const Scenario scenario = resolve_scenario(options);
  const auto out_dir = ensure_out_dir(options.out_dir);
  const SimulationOutput output = run_scenario(scenario);

  const bool csv = options.format == "csv";
  std::vector<std::string> file_names;
  for (std::size_t i = 0; i < output.channels.size(); ++i) {
    const std::string name =
        output.channel_names[i] + (csv ? ".csv" : ".ttg1");
    const auto path = out_dir / name;
    if (csv) {
      write_tags_csv(path.string(), output.channels[i]);
    } else {
      TagFile file;
      file.tags = output.channels[i];
      file.tick_resolution_ps = scenario.run.units.tick_resolution_ps;
      file.channel_count =
          static_cast<std::uint8_t>(output.channels.size());
      write_ttg1(path.string(), file);
    }
    file_names.push_back(name);
  }
  write_text_file(out_dir / "manifest.json",
                  simulation_manifest(scenario, output, file_names));

  std::cout << "scenario " << scenario.name << ": wrote ";
  for (const std::string& name : file_names) {
    std::cout << name << " ";
  }
  std::cout << "manifest.json to " << out_dir.string() << "\n";
  for (std::size_t i = 0; i < output.channels.size(); ++i) {
    std::cout << output.channel_names[i] << ": " << output.channels[i].size()
              << " tags\n";
  }
  return 0;
}

int cmd_analyze(const CommonOptions& options,
                const std::vector<std::string>& inputs) {
  const Scenario scenario = resolve_scenario(options);
  const AnalysisConfig& analysis = scenario.analysis;
  const double fallback_tick = scenario.run.units.tick_resolution_ps;

  std::vector<TimeTag> stream_a;
  std::vector<TimeTag> stream_b;
  double tick = fallback_tick;
  if (inputs.size() == 1) {
    const TagFile file = read_tag_file(inputs[0], fallback_tick);
    tick = file.tick_resolution_ps;
    auto channels = split_channels(file.tags, 2);
    stream_a = std::move(channels[0]);
    stream_b = std::move(channels[1]);
  } else if (inputs.size() == 2) {
    TagFile file_a = read_tag_file(inputs[0], fallback_tick);
    TagFile file_b = read_tag_file(inputs[1], fallback_tick);
    tick = file_a.tick_resolution_ps;
    stream_a = std::move(file_a.tags);
    stream_b = std::move(file_b.tags);
  } else {
    throw ConfigError("analyze expects one or two tag files", "");
  }
  if (stream_a.empty() || stream_b.empty()) {
    throw std::runtime_error("analyze: empty tag stream");
  }

  const auto out_dir = ensure_out_dir(options.out_dir);
  const DelayHistogram hist = build_delay_histogram(
      stream_a, stream_b, analysis.bin_width_ps, analysis.max_delay_ps, tick);
  write_text_file(out_dir / "histogram.csv", histogram_csv(hist));

  const double period = scenario.run.units.bin_period_ps;
  const double duration_s =
      std::max(static_cast<double>(stream_a.back().ticks),
               static_cast<double>(stream_b.back().ticks)) *
      tick * 1e-12;

  json report;
  report["rates"] = rates_to_json(
      rate_report(stream_a, stream_b, duration_s, 0.0,
                  analysis.coincidence_window_ps,
                  analysis.accidental_offsets_ps, tick));
  report["car"] = car_to_json(compute_car(hist,
                                          analysis.coincidence_window_ps, 0.0,
                                          analysis.accidental_offsets_ps));
  report["peaks"]["center"] = peak_to_json(
      peak_metrics(hist, 0.0, period / 2.0, analysis.coincidence_window_ps));
  report["peaks"]["side_minus"] = peak_to_json(peak_metrics(
      hist, -period, period / 2.0, analysis.coincidence_window_ps));
  report["peaks"]["side_plus"] = peak_to_json(peak_metrics(
      hist, period, period / 2.0, analysis.coincidence_window_ps));
  write_text_file(out_dir / "report.json", report.dump(2) + "\n");

  std::cout << "wrote histogram.csv report.json to " << out_dir.string()
            << "\n";
  return 0;
}

int cmd_sweep_phase(const CommonOptions& options) {
  const Scenario scenario = resolve_scenario(options);
  const auto out_dir = ensure_out_dir(options.out_dir);
  const PhaseSweepResult result = sweep_phase(scenario, options.threads);

  write_text_file(out_dir / "fringe.csv", fringe_csv(result.points));

  json fit_report;
  fit_report["scenario"] = scenario.name;
  fit_report["points"] = json::array();
  for (const FringePoint& point : result.points) {
    json entry;
    entry["heater_mw"] = point.heater_mw;
    entry["phase_rad"] = point.phase_rad;
    entry["center_counts"] = point.center_counts;
    entry["side_counts"] = point.side_counts;
    entry["accidental_counts"] = point.accidental_counts;
    fit_report["points"].push_back(entry);
  }
  fit_report["raw_fit"] = fit_to_json(result.raw_fit);
  fit_report["corrected_fit"] = fit_to_json(result.corrected_fit);
  write_text_file(out_dir / "fit.json", fit_report.dump(2) + "\n");

  std::cout << "wrote fringe.csv fit.json to " << out_dir.string() << "\n";
  if (result.raw_fit.converged) {
    std::cout << "raw visibility " << format_double(result.raw_fit.visibility)
              << " +- " << format_double(result.raw_fit.visibility_sigma)
              << "\n";
  } else {
    std::cout << "raw fit failed: " << result.raw_fit.diagnostics << "\n";
  }
  if (result.corrected_fit.converged) {
    std::cout << "corrected visibility "
              << format_double(result.corrected_fit.visibility) << " +- "
              << format_double(result.corrected_fit.visibility_sigma) << "\n";
  } else {
    std::cout << "corrected fit failed: " << result.corrected_fit.diagnostics
              << "\n";
  }
  return 0;
}

int cmd_sweep_power(const CommonOptions& options,
                    const std::vector<double>& powers, double rep_rate_hz,
                    double brightness_hz_per_mw, double calibration) {
  const Scenario scenario = resolve_scenario(options);
  const auto out_dir = ensure_out_dir(options.out_dir);
  const std::vector<PowerPoint> points =
      sweep_power(scenario, powers, rep_rate_hz, brightness_hz_per_mw,
                  calibration, options.threads);
  write_text_file(out_dir / "power_sweep.csv", power_csv(points));
  std::cout << "wrote power_sweep.csv to " << out_dir.string() << "\n";
  for (const PowerPoint& point : points) {
    std::cout << format_double(point.power_mw) << " mW: mu "
              << format_double(point.mu) << ", coincidences "
              << format_double(point.rates.coincidences_hz) << " Hz, CAR "
              << format_double(point.car.car) << "\n";
  }
  return 0;
}

int cmd_oracle_check(const CommonOptions& options, std::uint64_t pulses,
                     const std::vector<double>& deltas,
                     std::uint64_t samples) {
  const std::uint64_t seed = options.seed.value_or(1);
  const OracleCheckResult result =
      oracle_check(pulses, deltas, samples, seed);

  const auto out_dir = ensure_out_dir(options.out_dir);
  // Analytic joint-bin tables, one per interferometer phase.  Detector
  // columns give the arrival bin seen by each detector under the
  // deterministic pair split (detA the signal photon, detB the idler).
  for (std::size_t d = 0; d < deltas.size(); ++d) {
    const AmplitudeTable table =
        amplitude_oracle(pulses, deltas[d], {}, true, 1.0);
    std::string csv = "signal_bin,idler_bin,detA,detB,probability\n";
    for (const AmplitudeEntry& entry : table.entries) {
      csv += std::to_string(entry.signal_bin);
      csv += ',';
      csv += std::to_string(entry.idler_bin);
      csv += ',';
      csv += std::to_string(entry.signal_bin);
      csv += ',';
      csv += std::to_string(entry.idler_bin);
      csv += ',';
      csv += format_double(entry.probability);
      csv += '\n';
    }
    write_text_file(out_dir / ("oracle_table_" + std::to_string(d) + ".csv"),
                    csv);
  }

  json summary;
  summary["pulse_count"] = result.pulse_count;
  summary["samples"] = samples;
  summary["seed"] = seed;
  summary["rows"] = json::array();
  for (const OracleCheckRow& row : result.rows) {
    json entry;
    entry["delta_rad"] = row.delta_rad;
    entry["chi2"] = row.chi2.statistic;
    entry["dof"] = row.chi2.dof;
    entry["p_value"] = row.chi2.p_value;
    summary["rows"].push_back(entry);
  }
  summary["pass"] = result.pass;
  write_text_file(out_dir / "oracle_check.json", summary.dump(2) + "\n");

  for (const OracleCheckRow& row : result.rows) {
    std::cout << "delta " << format_double(row.delta_rad) << ": chi2 "
              << format_double(row.chi2.statistic) << " (dof "
              << row.chi2.dof << "), p " << format_double(row.chi2.p_value)
              << "\n";
  }
  std::cout << (result.pass ? "PASS" : "FAIL")
            << " (threshold p > 0.01 per setting)\n";
  return result.pass ? 0 : 1;
}

int cmd_report(const CommonOptions& options) {
  const Scenario scenario = resolve_scenario(options);
  const auto out_dir = ensure_out_dir(options.out_dir);
  const SimulationOutput output = run_scenario(scenario);

  const double tick = scenario.run.units.tick_resolution_ps;
  const double period = scenario.run.units.bin_period_ps;
  const AnalysisConfig& analysis = scenario.analysis;

  const std::vector<TimeTag>* stream_a = &output.channels[0];
  const std::vector<TimeTag>* stream_b = &output.channels[1];
  std::vector<TimeTag> merged_a;
  std::vector<TimeTag> merged_b;
  if (output.channels.size() == 4) {
    merged_a = merge_ports(output.channels[0], output.channels[1]);
    merged_b = merge_ports(output.channels[2], output.channels[3]);
    stream_a = &merged_a;
    stream_b = &merged_b;
  }

  json report;
  report["scenario"] = scenario.name;
  report["duration_s"] = output.duration_s;
  for (std::size_t i = 0; i < output.channels.size(); ++i) {
    json entry;
    entry["name"] = output.channel_names[i];
    entry["tags"] = output.channels[i].size();
    entry["rate_hz"] = static_cast<double>(output.channels[i].size()) /
                       output.duration_s;
    report["channels"].push_back(entry);
  }
  report["rates"] = rates_to_json(rate_report(
      *stream_a, *stream_b, output.duration_s, 0.0,
      analysis.coincidence_window_ps, analysis.accidental_offsets_ps, tick));
  const DelayHistogram hist =
      build_delay_histogram(*stream_a, *stream_b, analysis.bin_width_ps,
                            analysis.max_delay_ps, tick);
  report["car"] = car_to_json(compute_car(hist,
                                          analysis.coincidence_window_ps, 0.0,
                                          analysis.accidental_offsets_ps));

  if (output.channels.size() == 4) {
    const std::vector<SiftedBlock> blocks =
        sift(merged_a, merged_b, analysis.coincidence_window_ps, period,
             tick);
    json qkd;
    for (const SiftedBlock& block : blocks) {
      json entry;
      entry["pair_count"] = block.pair_count;
      entry["qber"] = block.qber;
      qkd[block.basis == Basis::time ? "time" : "phase"] = entry;
    }
    const double qber_time = std::min(blocks[0].qber, 0.5);
    const double qber_phase = std::min(blocks[1].qber, 0.5);
    qkd["key_fraction"] = key_fraction(qber_time, qber_phase);
    const double visibility_estimate =
        std::clamp(1.0 - 2.0 * blocks[1].qber, 0.0, 1.0);
    const ThresholdCheck check =
        visibility_threshold_check(visibility_estimate);
    qkd["visibility_estimate"] = visibility_estimate;
    qkd["entangled"] = check.entangled;
    qkd["key_positive"] = check.key_positive;
    report["qkd"] = qkd;
  }

  write_text_file(out_dir / "report.json", report.dump(2) + "\n");
  std::cout << "wrote report.json to " << out_dir.string() << "\n";
  std::cout << "coincidences "
            << format_double(report["rates"]["coincidences_hz"].get<double>())
            << " Hz, CAR "
            << format_double(report["car"]["car"].get<double>()) << "\n";
  if (report.contains("qkd")) {
    std::cout << "qber_time "
              << format_double(report["qkd"]["time"]["qber"].get<double>())
              << ", qber_phase "
              << format_double(report["qkd"]["phase"]["qber"].get<double>())
              << ", key fraction "
              << format_double(report["qkd"]["key_fraction"].get<double>())
              << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-bin entangled pair source simulator and analysis"};
  app.require_subcommand(1);

  CommonOptions options;
  std::vector<std::string> analyze_inputs;
  std::vector<double> powers = {0.25, 0.35, 0.5,  0.7, 1.0, 1.4,
                                2.0,  2.8,  4.0,  5.6, 8.0};
  double rep_rate_hz = 1e9;
  double brightness_hz_per_mw = 7.2e6;
  double calibration = 0.5;
  std::uint64_t oracle_pulses = 10;
  std::vector<double> oracle_deltas = {0.0, M_PI / 4.0, M_PI / 2.0,
                                       3.0 * M_PI / 4.0};
  std::uint64_t oracle_samples = 1000000;

  CLI::App* simulate =
      app.add_subcommand("simulate", "Run a scenario and write tag files");
  add_common_options(simulate, options);

  CLI::App* analyze = app.add_subcommand(
      "analyze", "Histogram, rates, and CAR from tag files (TTG1 or CSV)");
  add_common_options(analyze, options);
  analyze->add_option("inputs", analyze_inputs, "Tag files (1 or 2)")
      ->required();

  CLI::App* sweep_phase_cmd = app.add_subcommand(
      "sweep-phase", "Interference fringe over the heater grid");
  add_common_options(sweep_phase_cmd, options);

  CLI::App* sweep_power_cmd = app.add_subcommand(
      "sweep-power", "Singles, coincidences, and CAR over pump power");
  add_common_options(sweep_power_cmd, options);
  sweep_power_cmd->add_option("--powers", powers, "Pump powers in mW")
      ->delimiter(',');
  sweep_power_cmd->add_option("--rep-rate", rep_rate_hz,
                              "Pump repetition rate in Hz")
      ->capture_default_str();
  sweep_power_cmd
      ->add_option("--brightness", brightness_hz_per_mw,
                   "Source brightness in pairs/s per mW")
      ->capture_default_str();
  sweep_power_cmd
      ->add_option("--calibration", calibration,
                   "In-band collection calibration factor")
      ->capture_default_str();

  CLI::App* oracle = app.add_subcommand(
      "oracle-check", "Monte Carlo vs analytic joint-bin distribution");
  add_common_options(oracle, options);
  oracle->add_option("--pulses", oracle_pulses, "Pulse-train length (<= 20)")
      ->capture_default_str();
  oracle->add_option("--deltas", oracle_deltas,
                     "Interferometer phases in radians")
      ->delimiter(',');
  oracle->add_option("--samples", oracle_samples, "Samples per phase")
      ->capture_default_str();

  CLI::App* report =
      app.add_subcommand("report", "Rates, CAR, and key metrics summary");
  add_common_options(report, options);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& error) {
    const int code = app.exit(error);
    return code == 0 ? 0 : 2;
  }

  try {
    if (simulate->parsed()) {
      return cmd_simulate(options);
    }
    if (analyze->parsed()) {
      return cmd_analyze(options, analyze_inputs);
    }
    if (sweep_phase_cmd->parsed()) {
      return cmd_sweep_phase(options);
    }
    if (sweep_power_cmd->parsed()) {
      return cmd_sweep_power(options, powers, rep_rate_hz,
                             brightness_hz_per_mw, calibration);
    }
    if (oracle->parsed()) {
      return cmd_oracle_check(options, oracle_pulses, oracle_deltas,
                              oracle_samples);
    }
    if (report->parsed()) {
      return cmd_report(options);
    }
  } catch (const ConfigError& error) {
    std::cerr << "config error: " << error.what() << "\n";
    return 2;
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << "\n";
    return 1;
  }
  return 2;
}
