// End-to-end acceptance checks: ten pinned behaviors of the simulator,
// one printed pass/fail line each with the measured values.  The process
// exit code is the number of failed checks.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "timebin/channel.hpp"
#include "timebin/config.hpp"
#include "timebin/detector.hpp"
#include "timebin/fit.hpp"
#include "timebin/histogram.hpp"
#include "timebin/optics.hpp"
#include "timebin/qkd.hpp"
#include "timebin/rng.hpp"
#include "timebin/scenario.hpp"
#include "timebin/stats.hpp"

using namespace timebin;

namespace {

constexpr double kPi = 3.14159265358979323846;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, ...) {
  char buffer[768];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buffer, sizeof buffer, format, args);
  va_end(args);
  return buffer;
}

void make_noiseless(RunConfig& run) {
  run.mzi.insertion_loss_db = 0.0;
  for (DetectorConfig& det : run.detectors) {
    det.efficiency = 1.0;
    det.jitter_fwhm_ps = 0.0;
    det.dead_time_ns = 0.0;
    det.dark_rate_hz = 0.0;
  }
}

/// Accidental-estimation offsets centered on comb teeth, for scenarios
/// without timing jitter (the default half-tooth offsets see no counts
/// when arrivals stay inside their emission bins).
const std::vector<double> kToothOffsets = {-3000.0, -2000.0, 2000.0, 3000.0};

using CriterionResult = std::pair<bool, std::string>;

// --- 1 -------------------------------------------------------------------

CriterionResult sampled_statistics_match_table() {
  const Clock::time_point start = Clock::now();
  const OracleCheckResult result = oracle_check(
      10, {0.0, kPi / 4.0, kPi / 2.0, 3.0 * kPi / 4.0}, 1000000, 42);
  const double elapsed = seconds_since(start);

  std::string ps;
  bool all_pass = true;
  for (const OracleCheckRow& row : result.rows) {
    ps += fmt(" %.3g", row.chi2.p_value);
    all_pass = all_pass && row.chi2.p_value > 0.01;
  }
  const bool pass = all_pass && result.rows.size() == 4 && elapsed < 60.0;
  return {pass, fmt("p values%s (need > 0.01), %.1f s (budget 60 s)",
                    ps.c_str(), elapsed)};
}

// --- 2 -------------------------------------------------------------------

CriterionResult center_to_side_ratio_at_unit_contrast() {
  Scenario s;
  s.topology = Topology::single_receiver_pbs;
  s.run.pulse_count = 200000000;
  s.run.mu = 0.002;
  s.run.seed = 21;
  s.run.mzi.intrinsic_visibility = 1.0;
  s.run.mzi.phase_delta_rad = 0.0;
  make_noiseless(s.run);

  const SimulationOutput out = run_scenario(s);
  const auto& a = out.channels[0];
  const auto& b = out.channels[1];
  const double w = 400.0;
  const auto center = count_pairs_near(a, b, 0.0, w, 1.0);
  const double side =
      0.5 * (static_cast<double>(count_pairs_near(a, b, -1000.0, w, 1.0)) +
             static_cast<double>(count_pairs_near(a, b, 1000.0, w, 1.0)));
  const double ratio = static_cast<double>(center) / side;

  const bool pass = center >= 100000 && ratio > 1.95 && ratio < 2.05;
  return {pass, fmt("center/side = %.4f (need 2.00 +- 0.05) over %llu "
                    "post-selected pairs (need >= 1e5)",
                    ratio, static_cast<unsigned long long>(center))};
}

// --- 3 -------------------------------------------------------------------

CriterionResult fringe_contrast_recovery() {
  Scenario s;
  s.topology = Topology::single_receiver_pbs;
  s.run.mu = 0.001;
  s.run.seed = 33;
  s.run.mzi.intrinsic_visibility = 0.93;
  s.run.mzi.phase_per_heater_mw = kPi / 40.0;
  make_noiseless(s.run);
  s.sweep.heater_mw = {0.0, 80.0, 21};
  s.sweep.per_point_duration_s = 0.2;

  const PhaseSweepResult result = sweep_phase(s);
  const double vis = result.raw_fit.visibility;

  std::vector<double> side_totals;
  for (const FringePoint& point : result.points) {
    side_totals.push_back(2.0 * point.side_counts);  // sum of both windows
  }
  const Chi2Result flat = chi2_test_constant(side_totals);

  const bool pass = result.raw_fit.converged && vis > 0.92 && vis < 0.94 &&
                    flat.p_value > 0.01;
  return {pass, fmt("fitted visibility %.4f +- %.4f (need 0.92..0.94), "
                    "side-count flatness p = %.3g (need > 0.01)",
                    vis, result.raw_fit.visibility_sigma, flat.p_value)};
}

// --- 4 -------------------------------------------------------------------

CriterionResult deployed_link_visibility() {
  const Clock::time_point start = Clock::now();

  Scenario bench = preset_scenario("back_to_back");
  bench.run.seed = 42;
  const PhaseSweepResult bench_sweep = sweep_phase(bench);
  if (!bench_sweep.corrected_fit.converged) {
    return {false, "bench sweep fit did not converge"};
  }
  const double bench_corrected = bench_sweep.corrected_fit.visibility;

  // One-step contrast calibration: scale the interferometer contrast so
  // the bench corrected visibility lands on 0.95, then rerun deployed.
  const double tuned = 0.95 * 0.95 / bench_corrected;

  Scenario vienna = preset_scenario("vienna_link");
  vienna.run.seed = 42;
  vienna.run.mzi.intrinsic_visibility = tuned;
  const PhaseSweepResult deployed = sweep_phase(vienna);
  const double elapsed = seconds_since(start);

  const double raw = deployed.raw_fit.visibility;
  const double corrected = deployed.corrected_fit.visibility;
  const bool pass = deployed.raw_fit.converged &&
                    deployed.corrected_fit.converged && raw > 0.87 &&
                    raw < 0.93 && corrected > 0.91 && corrected < 0.95 &&
                    elapsed < 600.0;
  return {pass,
          fmt("bench corrected %.4f -> contrast %.4f; deployed raw %.4f "
              "(need 0.90 +- 0.03), corrected %.4f (need 0.93 +- 0.02); "
              "%.0f s (budget 600 s)",
              bench_corrected, tuned, raw, corrected, elapsed)};
}

// --- 5 -------------------------------------------------------------------

CriterionResult car_scaling_and_dark_plateau() {
  Scenario s;
  s.topology = Topology::single_receiver_pbs;
  s.run.seed = 55;
  s.run.mzi.intrinsic_visibility = 0.95;
  make_noiseless(s.run);
  s.analysis.accidental_offsets_ps = kToothOffsets;
  s.sweep.per_point_duration_s = 0.1;

  // brightness 2e6 Hz/mW, calibration 0.5, 1 GHz: mu = 1e-3 per mW.
  const std::vector<double> powers = {1.0, 2.0, 4.0, 8.0, 16.0, 30.0};
  const std::vector<PowerPoint> clean =
      sweep_power(s, powers, 1.0e9, 2.0e6, 0.5);

  std::vector<double> log_mu;
  std::vector<double> log_car;
  for (const PowerPoint& point : clean) {
    if (point.car.infinite || !(point.car.car > 0.0)) {
      return {false, fmt("no accidentals measured at mu = %.3g", point.mu)};
    }
    log_mu.push_back(std::log(point.mu));
    log_car.push_back(std::log(point.car.car));
  }
  const LineFit line = fit_line(log_mu, log_car);

  // With dark counts enabled the ratio stops growing toward low mu: the
  // accidental floor goes constant while true coincidences keep shrinking,
  // so the curve turns over instead of continuing as 1/mu.  At mu = 3e-6
  // the photon rate (~3 kHz) is far below the 100 kHz dark rate and the
  // ratio drops well under its dark-limited peak near mu ~ 1e-4.
  Scenario dark = s;
  dark.run.seed = 56;
  dark.sweep.per_point_duration_s = 8.0;
  for (DetectorConfig& det : dark.run.detectors) {
    det.dark_rate_hz = 100000.0;
  }
  const std::vector<double> low_powers = {0.003, 0.03, 0.1, 0.3, 1.0};
  const std::vector<PowerPoint> noisy =
      sweep_power(dark, low_powers, 1.0e9, 2.0e6, 0.5);
  double best_higher = 0.0;
  for (std::size_t i = 1; i < noisy.size(); ++i) {
    best_higher = std::max(best_higher, noisy[i].car.car);
  }
  const bool plateau = noisy[0].car.car < best_higher;

  const bool pass =
      line.slope > -1.1 && line.slope < -0.9 && plateau;
  return {pass, fmt("log-log slope %.3f +- %.3f (need -1.0 +- 0.1); with "
                    "dark counts, ratio at mu %.1e is %.0f vs %.0f at higher "
                    "mu (must not be the maximum)",
                    line.slope, line.slope_sigma, noisy[0].mu,
                    noisy[0].car.car, best_higher)};
}

// --- 6 -------------------------------------------------------------------

CriterionResult detector_saturation_threshold() {
  DetectorConfig det;
  det.efficiency = 0.08;
  det.jitter_fwhm_ps = 0.0;
  det.dead_time_ns = 25000.0;  // 25 us
  det.dark_rate_hz = 0.0;
  const Units units;
  const double tau_s = 25e-6;
  // 1 - observed/linear exceeds 5% once eta*r*tau > 0.05/0.95.
  const double threshold_hz = (0.05 / 0.95) / (det.efficiency * tau_s);

  Rng rng_low(66);
  Rng rng_high(67);
  std::vector<SaturationPoint> curve =
      saturation_curve({5.0e3, 1.0e4, 2.0e4}, det, units, 40.0, rng_low);
  const std::vector<SaturationPoint> high = saturation_curve(
      {5.0e4, 1.5e5, 5.0e5, 5.0e6}, det, units, 4.0, rng_high);
  curve.insert(curve.end(), high.begin(), high.end());

  bool classified = true;
  double max_observed = 0.0;
  std::string detail;
  for (const SaturationPoint& point : curve) {
    const double deviation =
        1.0 - point.observed_rate_hz / point.expected_linear_hz;
    const bool should_deviate = point.input_rate_hz > threshold_hz;
    classified = classified && (deviation > 0.05) == should_deviate;
    max_observed = std::max(max_observed, point.observed_rate_hz);
    detail += fmt(" %.3g:%.1f%%", point.input_rate_hz, 100.0 * deviation);
  }
  const bool pass = classified && max_observed < 40000.0;
  return {pass, fmt("linearity deviation by input rate:%s (threshold "
                    "%.3g Hz), max observed %.0f Hz (ceiling 40000)",
                    detail.c_str(), threshold_hz, max_observed)};
}

// --- 7 -------------------------------------------------------------------

CriterionResult dispersion_effects() {
  // (a) Uncompensated metropolitan fiber: bin spreading merges the
  // arrival comb and the fringe collapses.
  Scenario torn = preset_scenario("vienna_link");
  torn.topology = Topology::single_receiver_pbs;
  torn.run.seed = 77;
  torn.run.mu = 0.01;
  torn.run.link.dcm.enabled = false;
  torn.run.link.background_rate_hz = 0.0;
  for (DetectorConfig& det : torn.run.detectors) {
    det.dark_rate_hz = 0.0;
  }
  torn.sweep.per_point_duration_s = 0.5;
  const PhaseSweepResult smeared = sweep_phase(torn);
  const double smeared_vis = smeared.raw_fit.visibility;

  // (b) Arrival-difference peak widths, bench vs compensated deployment.
  Scenario bench;
  bench.topology = Topology::single_receiver_pbs;
  bench.run.pulse_count = 200000000;
  bench.run.mu = 0.005;
  bench.run.seed = 78;
  bench.run.mzi.intrinsic_visibility = 0.95;
  for (DetectorConfig& det : bench.run.detectors) {
    det.jitter_fwhm_ps = 247.5;
    det.dead_time_ns = 0.0;
    det.dark_rate_hz = 0.0;
  }
  const SimulationOutput bench_out = run_scenario(bench);
  const DelayHistogram bench_hist = build_delay_histogram(
      bench_out.channels[0], bench_out.channels[1], 50.0, 5000.0, 1.0);
  const PeakMetrics bench_peak = peak_metrics(bench_hist, 0.0, 500.0, 1500.0);

  Scenario deployed = bench;
  deployed.run.pulse_count = 500000000;
  deployed.run.mu = 0.02;
  deployed.run.seed = 79;
  deployed.run.link.length_km = 28.6;
  deployed.run.link.loss_db = 9.5;
  deployed.run.link.dcm.enabled = true;
  deployed.run.link.dcm.compensated_km = 28.522;
  for (DetectorConfig& det : deployed.run.detectors) {
    det.jitter_fwhm_ps = 283.0;
  }
  const double residual = residual_dispersion_ps_per_nm(deployed.run.link);
  const SimulationOutput deployed_out = run_scenario(deployed);
  const DelayHistogram deployed_hist = build_delay_histogram(
      deployed_out.channels[0], deployed_out.channels[1], 50.0, 5000.0, 1.0);
  const PeakMetrics deployed_peak =
      peak_metrics(deployed_hist, 0.0, 500.0, 1500.0);

  const bool pass = smeared.raw_fit.converged && smeared_vis < 0.2 &&
                    bench_peak.found && bench_peak.fwhm_ps > 320.0 &&
                    bench_peak.fwhm_ps < 380.0 && std::fabs(residual) <= 1.5 &&
                    deployed_peak.found && deployed_peak.fwhm_ps > 350.0 &&
                    deployed_peak.fwhm_ps < 450.0;
  return {pass,
          fmt("uncompensated fringe visibility %.3f (need < 0.2); peak "
              "FWHM bench %.0f ps (need 350 +- 30), compensated link %.0f ps "
              "(need 400 +- 50) at residual %.3g ps/nm (need <= 1.5)",
              smeared_vis, bench_peak.fwhm_ps, deployed_peak.fwhm_ps,
              residual)};
}

// --- 8 -------------------------------------------------------------------

CriterionResult broadening_product() {
  const double value = broadening_estimate(18.0, 3.5, 30.0);
  const bool pass = value == 1890.0;
  return {pass, fmt("broadening_estimate(18, 3.5, 30) = %.10g (need exactly "
                    "1890)",
                    value)};
}

// --- 9 -------------------------------------------------------------------

CriterionResult classical_fringe_recovery() {
  MziConfig mzi;
  mzi.phase_per_heater_mw = kPi / 40.0;
  std::vector<double> heaters;
  std::vector<double> phases;
  for (int i = 0; i < 21; ++i) {
    heaters.push_back(4.0 * static_cast<double>(i));
    phases.push_back(mzi.phase_for_heater(heaters.back()));
  }
  const std::vector<double> intensities =
      classical_interference(heaters, true, mzi, 0.9977, 1.0e6);
  const FringeFit fit = fit_cosine(phases, intensities, {}, 1.0);
  const double error = std::fabs(fit.visibility - 0.9977);
  const bool pass = fit.converged && error <= 0.001;
  return {pass, fmt("fitted classical visibility %.5f (need 0.9977 +- "
                    "0.001)",
                    fit.visibility)};
}

// --- 10 ------------------------------------------------------------------

CriterionResult key_distribution_run() {
  Scenario q;
  q.name = "qkd";
  q.topology = Topology::two_receiver;
  q.run.pulse_count = 2000000000;
  q.run.mu = 0.002;
  q.run.seed = 1010;
  q.receivers.emplace();
  for (ReceiverConfig& receiver : *q.receivers) {
    receiver.mzi.insertion_loss_db = 0.0;
    receiver.mzi.intrinsic_visibility = std::sqrt(0.93);
    receiver.mzi.phase_delta_rad = 0.0;
    receiver.link.background_rate_hz = 20000.0;
    for (DetectorConfig& det : receiver.detectors) {
      det.efficiency = 1.0;
      det.jitter_fwhm_ps = 0.0;
      det.dead_time_ns = 0.0;
      det.dark_rate_hz = 0.0;
    }
  }

  const SimulationOutput out = run_scenario(q);
  const std::vector<TimeTag> alice =
      merge_ports(out.channels[0], out.channels[1]);
  const std::vector<TimeTag> bob = merge_ports(out.channels[2],
                                               out.channels[3]);
  const std::vector<SiftedBlock> blocks = sift(alice, bob, 400.0, 1000.0);
  const SiftedBlock& time_block = blocks[0];
  const SiftedBlock& phase_block = blocks[1];

  // Uniform accidental floor measured off the arrival comb; the two
  // time-basis windows collect about twice this many accidental matches,
  // half of which mismatch, so the floor itself bounds the error count.
  const double floor_mean =
      0.5 * (static_cast<double>(
                 count_pairs_near(alice, bob, 2500.0, 400.0, 1.0)) +
             static_cast<double>(
                 count_pairs_near(alice, bob, -2500.0, 400.0, 1.0)));
  const double time_errors =
      time_block.qber * static_cast<double>(time_block.pair_count);
  const double error_budget =
      3.0 * floor_mean + 5.0 * std::sqrt(floor_mean + 1.0) + 5.0;
  const bool time_ok =
      time_errors <= error_budget && time_block.qber < 0.005;

  const ThresholdCheck check = visibility_threshold_check(0.93);

  // Deterministic pair separation transmits four times what a passive
  // balanced splitter keeps.
  Scenario sp;
  sp.topology = Topology::single_receiver_pbs;
  sp.run.pulse_count = 50000000;
  sp.run.mu = 0.005;
  sp.run.seed = 1011;
  sp.run.mzi.intrinsic_visibility = 0.95;
  make_noiseless(sp.run);
  sp.run.mzi.insertion_loss_db = 1.6;
  const SimulationOutput pbs_out = run_scenario(sp);
  Scenario sb = sp;
  sb.topology = Topology::single_receiver_bs;
  const SimulationOutput bs_out = run_scenario(sb);
  const auto pbs_pairs = count_pairs_near(pbs_out.channels[0],
                                          pbs_out.channels[1], 0.0, 400.0,
                                          1.0);
  const auto bs_pairs = count_pairs_near(bs_out.channels[0],
                                         bs_out.channels[1], 0.0, 400.0, 1.0);
  const double ratio =
      static_cast<double>(pbs_pairs) / static_cast<double>(bs_pairs);

  const bool pass = phase_block.qber > 0.030 && phase_block.qber < 0.040 &&
                    phase_block.pair_count > 100000 && time_ok &&
                    check.entangled && check.key_positive && ratio > 3.8 &&
                    ratio < 4.2;
  return {pass,
          fmt("phase QBER %.4f (need 0.035 +- 0.005) over %llu pairs; time "
              "errors %.0f vs accidental budget %.0f (QBER %.2g); joint "
              "visibility 0.93 -> entangled %s, key-positive %s; "
              "deterministic/balanced splitter ratio %.2f (need 4.0 +- 0.2)",
              phase_block.qber,
              static_cast<unsigned long long>(phase_block.pair_count),
              time_errors, error_budget, time_block.qber,
              check.entangled ? "yes" : "no",
              check.key_positive ? "yes" : "no", ratio)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    CriterionResult (*body)();
  };
  const std::vector<Criterion> criteria = {
      {"sampled joint-bin statistics match the analytic table",
       sampled_statistics_match_table},
      {"center peak doubles the side peaks at unit contrast",
       center_to_side_ratio_at_unit_contrast},
      {"phase sweep recovers the configured contrast with flat side peaks",
       fringe_contrast_recovery},
      {"deployed-link sweep reaches its visibility bands in budget",
       deployed_link_visibility},
      {"coincidence-to-accidental ratio scales as 1/mu and plateaus with "
       "dark counts",
       car_scaling_and_dark_plateau},
      {"dead-time saturation departs from linearity at the predicted rate",
       detector_saturation_threshold},
      {"dispersion collapses the fringe uncompensated and broadens the "
       "compensated peak",
       dispersion_effects},
      {"first-order broadening product", broadening_product},
      {"classical fringe visibility recovery", classical_fringe_recovery},
      {"two-receiver key run: QBERs, thresholds, splitter ratio",
       key_distribution_run},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    CriterionResult result;
    try {
      result = criteria[i].body();
    } catch (const std::exception& error) {
      result = {false, std::string("exception: ") + error.what()};
    }
    std::printf("[%s] criterion %zu: %s (%s)\n",
                result.first ? "PASS" : "FAIL", i + 1, criteria[i].name,
                result.second.c_str());
    std::fflush(stdout);
    failures += result.first ? 0 : 1;
  }
  std::printf("acceptance: %zu/%zu passed\n", criteria.size() - failures,
              criteria.size());
  return failures;
}
