#include "timebin/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <thread>
#include <utility>

#include <json.hpp>

#include "timebin/channel.hpp"
#include "timebin/config_io.hpp"
#include "timebin/detector.hpp"
#include "timebin/histogram.hpp"
#include "timebin/optics.hpp"
#include "timebin/qkd.hpp"
#include "timebin/rng.hpp"
#include "timebin/source.hpp"
#include "timebin/text.hpp"

namespace timebin {

namespace {

// Disjoint substream namespaces (block indices stay far below 2^62).
constexpr std::uint64_t kBackgroundStream = 0x8000000000000000ull;
constexpr std::uint64_t kDetectorStream = 0x9000000000000000ull;
constexpr std::uint64_t kPhaseSweepStream = 0xA000000000000000ull;
constexpr std::uint64_t kPowerSweepStream = 0xA100000000000000ull;

std::uint64_t block_pulse_count(const RunConfig& run) {
  const double target_pairs = 1.0e6;
  if (run.mu > 0.0 &&
      target_pairs / run.mu < static_cast<double>(run.pulse_count)) {
    return std::max<std::uint64_t>(
        1, static_cast<std::uint64_t>(target_pairs / run.mu));
  }
  return run.pulse_count;
}

void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body) {
  const unsigned workers =
      std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) {
      body(i);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) {
          return;
        }
        try {
          body(i);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) {
            first_error = std::current_exception();
          }
        }
      }
    });
  }
  for (std::thread& worker : pool) {
    worker.join();
  }
  if (first_error) {
    std::rethrow_exception(first_error);
  }
}

SimulationOutput run_single_receiver(const Scenario& scenario) {
  const RunConfig& run = scenario.run;
  const SplitterKind splitter = scenario.splitter();

  double link_loss_db = run.link.loss_db;
  if (run.link.dcm.enabled) {
    link_loss_db += run.link.dcm.insertion_loss_db;
  }
  const double link_survival = db_to_survival(link_loss_db);
  const double residual = residual_dispersion_ps_per_nm(run.link);
  const double mzi_survival = db_to_survival(run.mzi.insertion_loss_db);

  // Dispersion washout folds into the interference contrast used by the
  // pair transform.
  MziConfig mzi_eff = run.mzi;
  mzi_eff.intrinsic_visibility *= interference_washout(
      run.link, run.source.spectrum, run.units.bin_period_ps);

  std::array<std::vector<double>, 2> arrivals;
  const auto route = [&](PhotonRole role, double time_ps, Rng& rng) {
    const RoutedTo routed = splitter_route(role, splitter, rng);
    if (routed == RoutedTo::det_a) {
      arrivals[0].push_back(time_ps);
    } else if (routed == RoutedTo::det_b) {
      arrivals[1].push_back(time_ps);
    }
  };

  const std::uint64_t block_pulses = block_pulse_count(run);
  std::uint64_t first = 0;
  std::uint64_t block_index = 0;
  while (first < run.pulse_count) {
    const std::uint64_t count =
        std::min<std::uint64_t>(block_pulses, run.pulse_count - first);
    Rng rng = Rng::substream(run.seed, block_index);
    const std::vector<PairEvent> pairs =
        emit_pairs_block(run, first, count, rng);

    for (const PairEvent& pair : pairs) {
      const bool signal_alive = rng.bernoulli(link_survival);
      const bool idler_alive = rng.bernoulli(link_survival);
      if (!signal_alive && !idler_alive) {
        continue;
      }
      const double shift_signal = residual * pair.dlambda_signal_nm;
      const double shift_idler = residual * pair.dlambda_idler_nm;

      if (signal_alive && idler_alive) {
        const TransformResult transformed = transform_pair(
            pair, mzi_eff, run.pump_phase_step, run.pulse_count, rng);
        if (transformed.signal_alive) {
          route(PhotonRole::signal, transformed.signal_time_ps + shift_signal,
                rng);
        }
        if (transformed.idler_alive) {
          route(PhotonRole::idler, transformed.idler_time_ps + shift_idler,
                rng);
        }
      } else {
        // A photon whose partner was lost transits alone: random path,
        // insertion loss, routing, with no pair-interference step.
        const PhotonRole role =
            signal_alive ? PhotonRole::signal : PhotonRole::idler;
        double time_ps = pair.emission_time_ps +
                         (signal_alive ? shift_signal : shift_idler);
        if (rng.bernoulli(0.5)) {
          time_ps += mzi_eff.delay_ps;
        }
        if (rng.bernoulli(mzi_survival)) {
          route(role, time_ps, rng);
        }
      }
    }
    first += count;
    ++block_index;
  }

  SimulationOutput out;
  out.duration_s = run.duration_s();
  const bool distinct_ids = run.detectors[0].id != run.detectors[1].id;
  for (std::size_t ch = 0; ch < 2; ++ch) {
    Rng bg_rng = Rng::substream(run.seed, kBackgroundStream + ch);
    const std::vector<double> background = inject_background(
        out.duration_s, run.link.background_rate_hz, bg_rng);
    arrivals[ch].insert(arrivals[ch].end(), background.begin(),
                        background.end());
    std::sort(arrivals[ch].begin(), arrivals[ch].end());

    Rng det_rng = Rng::substream(run.seed, kDetectorStream + ch);
    out.channels.push_back(detect(arrivals[ch], run.detectors[ch], run.units,
                                  out.duration_s, det_rng,
                                  static_cast<std::uint8_t>(ch)));
    out.channel_names.push_back(distinct_ids
                                    ? run.detectors[ch].id
                                    : run.detectors[ch].id + "_" +
                                          std::to_string(ch));
    arrivals[ch].clear();
    arrivals[ch].shrink_to_fit();
  }
  return out;
}

/// Window counts used by the fringe: center, mean side, mean accidental.
struct WindowCounts {
  std::uint64_t center = 0;
  double side = 0.0;
  double accidentals = 0.0;
};

WindowCounts fringe_windows(const Scenario& scenario,
                            const SimulationOutput& output) {
  const double window = scenario.analysis.coincidence_window_ps;
  const double period = scenario.run.units.bin_period_ps;
  const double tick = scenario.run.units.tick_resolution_ps;
  const auto& offsets = scenario.analysis.accidental_offsets_ps;

  // Two-receiver fringes live in equal-port coincidences; single-receiver
  // fringes in the one detector pair.
  std::vector<std::pair<const std::vector<TimeTag>*,
                        const std::vector<TimeTag>*>>
      stream_pairs;
  if (output.channels.size() == 4) {
    stream_pairs.push_back({&output.channels[0], &output.channels[2]});
    stream_pairs.push_back({&output.channels[1], &output.channels[3]});
  } else {
    stream_pairs.push_back({&output.channels[0], &output.channels[1]});
  }

  WindowCounts counts;
  double side_total = 0.0;
  double accidental_total = 0.0;
  for (const auto& [a, b] : stream_pairs) {
    counts.center += count_pairs_near(*a, *b, 0.0, window, tick);
    side_total +=
        static_cast<double>(count_pairs_near(*a, *b, -period, window, tick)) +
        static_cast<double>(count_pairs_near(*a, *b, period, window, tick));
    for (const double offset : offsets) {
      accidental_total += static_cast<double>(
          count_pairs_near(*a, *b, offset, window, tick));
    }
  }
  counts.side = side_total / 2.0;
  counts.accidentals =
      offsets.empty() ? 0.0
                      : accidental_total / static_cast<double>(offsets.size());
  return counts;
}

FringeFit fit_or_diagnose(const std::vector<double>& x,
                          const std::vector<double>& y,
                          const std::vector<double>& sigma_y,
                          double fixed_frequency) {
  try {
    return fit_cosine(x, y, sigma_y, fixed_frequency);
  } catch (const std::exception& error) {
    FringeFit failed;
    failed.converged = false;
    failed.diagnostics = error.what();
    return failed;
  }
}

Scenario sweep_point_scenario(const Scenario& scenario, double heater_mw,
                              std::uint64_t point_seed) {
  Scenario point = scenario;
  point.run.seed = point_seed;
  const double period_s = scenario.run.units.bin_period_ps * 1e-12;
  point.run.pulse_count = static_cast<std::uint64_t>(
      std::llround(scenario.sweep.per_point_duration_s / period_s));
  const double phase = scenario.run.mzi.phase_for_heater(heater_mw);
  point.run.mzi.phase_delta_rad = phase;
  if (point.receivers) {
    (*point.receivers)[0].mzi.phase_delta_rad = phase;
  }
  return point;
}

}  // namespace

SimulationOutput run_scenario(const Scenario& scenario) {
  scenario.validate();
  if (scenario.topology == Topology::two_receiver) {
    const auto& receivers = *scenario.receivers;
    TwoReceiverOutput two =
        distribute_and_detect(scenario.run, receivers[0], receivers[1]);
    SimulationOutput out;
    out.duration_s = two.duration_s;
    out.channel_names = {"alice_0", "alice_1", "bob_0", "bob_1"};
    out.channels.push_back(std::move(two.alice_ports[0]));
    out.channels.push_back(std::move(two.alice_ports[1]));
    out.channels.push_back(std::move(two.bob_ports[0]));
    out.channels.push_back(std::move(two.bob_ports[1]));
    return out;
  }
  return run_single_receiver(scenario);
}

std::string simulation_manifest(const Scenario& scenario,
                                const SimulationOutput& output,
                                const std::vector<std::string>& file_names) {
  nlohmann::ordered_json manifest;
  manifest["format"] = "tbsim-manifest-v1";
  manifest["scenario"] = nlohmann::ordered_json::parse(
      scenario_to_json(scenario));
  manifest["duration_s"] = output.duration_s;
  nlohmann::ordered_json channels = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < output.channels.size(); ++i) {
    nlohmann::ordered_json entry;
    entry["name"] = output.channel_names[i];
    entry["tag_count"] = output.channels[i].size();
    if (i < file_names.size()) {
      entry["file"] = file_names[i];
    }
    channels.push_back(entry);
  }
  manifest["channels"] = channels;
  return manifest.dump(2) + "\n";
}

PhaseSweepResult sweep_phase(const Scenario& scenario, unsigned threads) {
  scenario.validate();
  const std::vector<double> grid = scenario.sweep.heater_mw.values();
  if (grid.size() < 5) {
    throw ConfigError("phase sweep requires at least 5 grid points",
                      "sweep.heater_mw.points");
  }

  PhaseSweepResult result;
  result.points.resize(grid.size());
  parallel_for(grid.size(), threads, [&](std::size_t i) {
    const std::uint64_t point_seed =
        Rng::substream(scenario.run.seed, kPhaseSweepStream + i).next_u64();
    const Scenario point = sweep_point_scenario(scenario, grid[i], point_seed);
    const SimulationOutput output = run_scenario(point);
    const WindowCounts windows = fringe_windows(point, output);
    FringePoint& fringe = result.points[i];
    fringe.heater_mw = grid[i];
    fringe.phase_rad = point.run.mzi.phase_delta_rad;
    fringe.center_counts = windows.center;
    fringe.side_counts = windows.side;
    fringe.accidental_counts = windows.accidentals;
  });

  // The two-photon fringe oscillates at 2x the swept phase through one
  // interferometer; the two-receiver arrangement sweeps only Alice's
  // phase, so its fringe advances at 1x.
  const double frequency =
      scenario.topology == Topology::two_receiver ? 1.0 : 2.0;
  const std::size_t accidental_windows =
      std::max<std::size_t>(1, scenario.analysis.accidental_offsets_ps.size());

  std::vector<double> x;
  std::vector<double> raw;
  std::vector<double> raw_sigma;
  std::vector<double> corrected;
  std::vector<double> corrected_sigma;
  for (const FringePoint& point : result.points) {
    x.push_back(point.phase_rad);
    const double center = static_cast<double>(point.center_counts);
    raw.push_back(center);
    raw_sigma.push_back(std::sqrt(std::max(1.0, center)));
    corrected.push_back(center - point.accidental_counts);
    const double corrected_variance =
        center + point.accidental_counts /
                     static_cast<double>(accidental_windows);
    corrected_sigma.push_back(std::sqrt(std::max(1.0, corrected_variance)));
  }
  result.raw_fit = fit_or_diagnose(x, raw, raw_sigma, frequency);
  result.corrected_fit =
      fit_or_diagnose(x, corrected, corrected_sigma, frequency);
  return result;
}

std::string fringe_csv(const std::vector<FringePoint>& points) {
  std::string csv = "heater_mW,phase_rad,center_counts,side_counts\n";
  for (const FringePoint& point : points) {
    csv += format_double(point.heater_mw);
    csv += ',';
    csv += format_double(point.phase_rad);
    csv += ',';
    csv += std::to_string(point.center_counts);
    csv += ',';
    csv += format_double(point.side_counts);
    csv += '\n';
  }
  return csv;
}

std::vector<PowerPoint> sweep_power(const Scenario& scenario,
                                    const std::vector<double>& powers_mw,
                                    double rep_rate_hz,
                                    double brightness_hz_per_mw,
                                    double calibration, unsigned threads) {
  scenario.validate();
  if (powers_mw.empty()) {
    throw ConfigError("power sweep requires at least one power", "");
  }
  for (const double power : powers_mw) {
    if (!(power > 0.0)) {
      throw ConfigError("powers must be positive", "");
    }
  }

  std::vector<PowerPoint> points(powers_mw.size());
  parallel_for(powers_mw.size(), threads, [&](std::size_t i) {
    Scenario point = scenario;
    point.run.mu = mu_from_power(powers_mw[i], rep_rate_hz,
                                 brightness_hz_per_mw, calibration);
    const double period_s = scenario.run.units.bin_period_ps * 1e-12;
    point.run.pulse_count = static_cast<std::uint64_t>(
        std::llround(scenario.sweep.per_point_duration_s / period_s));
    point.run.seed =
        Rng::substream(scenario.run.seed, kPowerSweepStream + i).next_u64();

    const SimulationOutput output = run_scenario(point);
    const std::vector<TimeTag>* a = nullptr;
    const std::vector<TimeTag>* b = nullptr;
    std::vector<TimeTag> merged_a;
    std::vector<TimeTag> merged_b;
    if (output.channels.size() == 4) {
      merged_a = merge_ports(output.channels[0], output.channels[1]);
      merged_b = merge_ports(output.channels[2], output.channels[3]);
      a = &merged_a;
      b = &merged_b;
    } else {
      a = &output.channels[0];
      b = &output.channels[1];
    }

    const double tick = point.run.units.tick_resolution_ps;
    PowerPoint& entry = points[i];
    entry.power_mw = powers_mw[i];
    entry.mu = point.run.mu;
    entry.rates = rate_report(*a, *b, output.duration_s, 0.0,
                              point.analysis.coincidence_window_ps,
                              point.analysis.accidental_offsets_ps, tick);
    const DelayHistogram hist =
        build_delay_histogram(*a, *b, point.analysis.bin_width_ps,
                              point.analysis.max_delay_ps, tick);
    entry.car = compute_car(hist, point.analysis.coincidence_window_ps, 0.0,
                            point.analysis.accidental_offsets_ps);
  });
  return points;
}

std::string power_csv(const std::vector<PowerPoint>& points) {
  std::string csv =
      "power_mw,mu,singles_a_hz,singles_b_hz,coincidences_hz,accidentals_hz,"
      "car\n";
  for (const PowerPoint& point : points) {
    csv += format_double(point.power_mw);
    csv += ',';
    csv += format_double(point.mu);
    csv += ',';
    csv += format_double(point.rates.singles_a_hz);
    csv += ',';
    csv += format_double(point.rates.singles_b_hz);
    csv += ',';
    csv += format_double(point.rates.coincidences_hz);
    csv += ',';
    csv += format_double(point.rates.accidentals_hz);
    csv += ',';
    csv += format_double(point.car.car);
    csv += '\n';
  }
  return csv;
}

std::vector<std::string> preset_names() {
  return {"back_to_back", "vienna_link"};
}

Scenario back_to_back_scenario() {
  Scenario scenario;
  scenario.name = "back_to_back";
  scenario.topology = Topology::single_receiver_bs;
  scenario.run.pulse_count = 1000000000;
  scenario.run.seed = 1;
  scenario.run.mu = 0.0018;
  scenario.run.mzi.delay_ps = 1000.0;
  scenario.run.mzi.insertion_loss_db = 1.6;
  scenario.run.mzi.intrinsic_visibility = 0.95;
  scenario.run.mzi.phase_per_heater_mw = M_PI / 40.0;
  scenario.run.detectors[0].id = "det_a";
  scenario.run.detectors[1].id = "det_b";
  for (DetectorConfig& det : scenario.run.detectors) {
    det.efficiency = 0.8;
    det.jitter_fwhm_ps = 247.5;
    det.dead_time_ns = 25.0;
    det.dark_rate_hz = 100.0;
  }
  scenario.analysis.bin_width_ps = 50.0;
  scenario.analysis.max_delay_ps = 5000.0;
  scenario.analysis.coincidence_window_ps = 350.0;
  scenario.analysis.accidental_offsets_ps = {-3000.0, -2000.0, 2000.0,
                                             3000.0};
  scenario.sweep.heater_mw = {0.0, 80.0, 21};
  scenario.sweep.per_point_duration_s = 2.0;
  return scenario;
}

Scenario vienna_link_scenario() {
  Scenario scenario = back_to_back_scenario();
  scenario.name = "vienna_link";
  scenario.run.mu = 0.00125;
  scenario.run.link.length_km = 28.6;
  scenario.run.link.loss_db = 9.5;
  scenario.run.link.dispersion_ps_per_nm_km = 18.0;
  scenario.run.link.dcm.enabled = true;
  scenario.run.link.dcm.compensated_km = 25.0;
  scenario.run.link.dcm.insertion_loss_db = 2.9;
  scenario.run.link.background_rate_hz = 18750.0;
  for (DetectorConfig& det : scenario.run.detectors) {
    det.jitter_fwhm_ps = 175.0;
  }
  scenario.analysis.coincidence_window_ps = 400.0;
  scenario.sweep.per_point_duration_s = 120.0;
  return scenario;
}

Scenario preset_scenario(const std::string& name) {
  if (name == "back_to_back") {
    return back_to_back_scenario();
  }
  if (name == "vienna_link") {
    return vienna_link_scenario();
  }
  std::string available;
  for (const std::string& preset : preset_names()) {
    if (!available.empty()) {
      available += ", ";
    }
    available += preset;
  }
  throw ConfigError(
      "unknown scenario '" + name + "'; available presets: " + available,
      "scenario");
}

OracleCheckResult oracle_check(std::uint64_t n_pulses,
                               const std::vector<double>& deltas_rad,
                               std::uint64_t samples, std::uint64_t seed,
                               double pump_phase_step) {
  OracleCheckResult result;
  result.pulse_count = n_pulses;
  result.pass = true;

  MziConfig mzi;
  mzi.delay_ps = 1000.0;
  mzi.insertion_loss_db = 0.0;
  mzi.intrinsic_visibility = 1.0;

  for (std::size_t d = 0; d < deltas_rad.size(); ++d) {
    mzi.phase_delta_rad = deltas_rad[d];
    std::vector<double> pump_phases(n_pulses);
    for (std::uint64_t j = 0; j < n_pulses; ++j) {
      pump_phases[j] = pump_phase_step * static_cast<double>(j);
    }
    const AmplitudeTable table =
        amplitude_oracle(n_pulses, deltas_rad[d], pump_phases, true, 1.0);

    Rng rng = Rng::substream(seed, d);
    std::map<std::pair<std::int64_t, std::int64_t>, std::uint64_t> observed;
    std::uint64_t discarded = 0;
    for (std::uint64_t s = 0; s < samples; ++s) {
      PairEvent event;
      auto pulse = static_cast<std::uint64_t>(
          rng.uniform() * static_cast<double>(n_pulses));
      if (pulse >= n_pulses) {
        pulse = n_pulses - 1;
      }
      event.origin_pulse = static_cast<std::int64_t>(pulse);
      event.pump_phase_rad = pump_phase_step * static_cast<double>(pulse);
      const TransformResult transformed =
          transform_pair(event, mzi, pump_phase_step, n_pulses, rng);
      if (transformed.outcome.kind == OutcomeKind::discarded) {
        ++discarded;
      } else {
        ++observed[{transformed.outcome.signal_bin,
                    transformed.outcome.idler_bin}];
      }
    }

    std::vector<double> observed_counts;
    std::vector<double> expected_counts;
    const auto total = static_cast<double>(samples);
    for (const AmplitudeEntry& entry : table.entries) {
      const auto key = std::make_pair(entry.signal_bin, entry.idler_bin);
      const auto it = observed.find(key);
      observed_counts.push_back(
          it == observed.end() ? 0.0 : static_cast<double>(it->second));
      expected_counts.push_back(entry.probability * total);
      if (it != observed.end()) {
        observed.erase(it);
      }
    }
    // Any sampled cell missing from the table is a genuine disagreement;
    // its zero expectation drives the p-value to zero.
    for (const auto& [key, count] : observed) {
      observed_counts.push_back(static_cast<double>(count));
      expected_counts.push_back(0.0);
    }
    observed_counts.push_back(static_cast<double>(discarded));
    expected_counts.push_back(table.discarded_probability * total);

    OracleCheckRow row;
    row.delta_rad = deltas_rad[d];
    row.samples = samples;
    row.chi2 = chi2_test(observed_counts, expected_counts, 1);
    result.pass = result.pass && row.chi2.p_value > 0.01;
    result.rows.push_back(row);
  }
  return result;
}

}  // namespace timebin
