#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "timebin/config.hpp"
#include "timebin/scenario.hpp"

using namespace timebin;

namespace {

constexpr double kPi = 3.14159265358979323846;

/// Small, fast, noiseless single-receiver scenario for pipeline tests.
Scenario small_scenario() {
  Scenario s;
  s.name = "unit";
  s.topology = Topology::single_receiver_pbs;
  s.run.pulse_count = 200000;
  s.run.mu = 0.05;
  s.run.seed = 11;
  s.run.mzi.insertion_loss_db = 0.0;
  s.run.mzi.intrinsic_visibility = 0.95;
  s.run.mzi.phase_per_heater_mw = kPi / 40.0;
  for (DetectorConfig& det : s.run.detectors) {
    det.efficiency = 1.0;
    det.jitter_fwhm_ps = 0.0;
    det.dead_time_ns = 0.0;
    det.dark_rate_hz = 0.0;
  }
  s.sweep.heater_mw = {0.0, 80.0, 9};
  s.sweep.per_point_duration_s = 0.001;  // 1e6 pulses per point
  return s;
}

Scenario small_two_receiver() {
  Scenario s;
  s.name = "unit_qkd";
  s.topology = Topology::two_receiver;
  s.run.pulse_count = 10000;
  s.run.mu = 0.02;
  s.receivers.emplace();
  for (ReceiverConfig& receiver : *s.receivers) {
    for (DetectorConfig& det : receiver.detectors) {
      det.jitter_fwhm_ps = 0.0;
      det.dark_rate_hz = 0.0;
    }
  }
  return s;
}

}  // namespace

TEST_CASE("preset catalogue") {
  CHECK(preset_names() == std::vector<std::string>{"back_to_back",
                                                   "vienna_link"});
  try {
    preset_scenario("nope");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.key_path() == "scenario");
    CHECK(std::string(e.what()).find(
              "available presets: back_to_back, vienna_link") !=
          std::string::npos);
  }
}

TEST_CASE("bench preset describes a co-located measurement") {
  const Scenario s = preset_scenario("back_to_back");
  CHECK(s.topology == Topology::single_receiver_bs);
  CHECK(s.run.link.length_km == 0.0);
  CHECK(s.run.link.loss_db == 0.0);
  CHECK(s.run.mu == doctest::Approx(0.0018));
  CHECK(s.run.mzi.intrinsic_visibility == doctest::Approx(0.95));
  CHECK(s.run.detectors[0].jitter_fwhm_ps == doctest::Approx(247.5));
  CHECK_NOTHROW(s.validate());
}

TEST_CASE("deployed-link preset adds fiber, compensation, and background") {
  const Scenario s = preset_scenario("vienna_link");
  CHECK(s.run.link.length_km == doctest::Approx(28.6));
  CHECK(s.run.link.loss_db == doctest::Approx(9.5));
  CHECK(s.run.link.dcm.enabled);
  CHECK(s.run.link.dcm.insertion_loss_db == doctest::Approx(2.9));
  CHECK(s.run.link.background_rate_hz > 0.0);
  CHECK(s.run.detectors[0].jitter_fwhm_ps == doctest::Approx(175.0));
  CHECK(s.analysis.coincidence_window_ps == doctest::Approx(400.0));
  CHECK_NOTHROW(s.validate());
}

TEST_CASE("run_scenario is deterministic in the seed") {
  Scenario s = small_scenario();
  s.run.pulse_count = 100000;
  const SimulationOutput first = run_scenario(s);
  const SimulationOutput second = run_scenario(s);
  REQUIRE(first.channels.size() == 2);
  CHECK(first.channel_names == second.channel_names);
  CHECK(first.channels[0] == second.channels[0]);
  CHECK(first.channels[1] == second.channels[1]);
  CHECK(first.channels[0].size() > 1000);

  s.run.seed += 1;
  const SimulationOutput other = run_scenario(s);
  CHECK(first.channels[0] != other.channels[0]);
}

TEST_CASE("channel names fall back to indexed detector ids") {
  Scenario s = small_scenario();
  s.run.pulse_count = 1000;
  // Both detectors share the default id "det": indices disambiguate.
  const SimulationOutput out = run_scenario(s);
  CHECK(out.channel_names ==
        std::vector<std::string>{"det_0", "det_1"});

  s.run.detectors[0].id = "north";
  s.run.detectors[1].id = "south";
  const SimulationOutput named = run_scenario(s);
  CHECK(named.channel_names == std::vector<std::string>{"north", "south"});
}

TEST_CASE("two-receiver runs yield four named port channels") {
  const SimulationOutput out = run_scenario(small_two_receiver());
  REQUIRE(out.channels.size() == 4);
  CHECK(out.channel_names == std::vector<std::string>{"alice_0", "alice_1",
                                                      "bob_0", "bob_1"});
  std::size_t total = 0;
  for (const auto& channel : out.channels) {
    total += channel.size();
  }
  CHECK(total > 100);
}

TEST_CASE("manifest is parseable, complete, and byte-deterministic") {
  Scenario s = small_scenario();
  s.run.pulse_count = 10000;
  const SimulationOutput out = run_scenario(s);
  const std::vector<std::string> files = {"det_0.ttg1", "det_1.ttg1"};
  const std::string manifest = simulation_manifest(s, out, files);
  CHECK(manifest == simulation_manifest(s, out, files));

  const nlohmann::json parsed = nlohmann::json::parse(manifest);
  CHECK(parsed.at("format") == "tbsim-manifest-v1");
  CHECK(parsed.at("duration_s").get<double>() ==
        doctest::Approx(out.duration_s));
  CHECK(parsed.at("scenario").at("run").at("mu").get<double>() ==
        doctest::Approx(0.05));
  const auto& channels = parsed.at("channels");
  REQUIRE(channels.size() == 2);
  CHECK(channels[0].at("name") == "det_0");
  CHECK(channels[0].at("file") == "det_0.ttg1");
  CHECK(channels[0].at("tag_count").get<std::uint64_t>() ==
        out.channels[0].size());
  CHECK(channels[1].at("name") == "det_1");
}

TEST_CASE("phase sweep traces the two-photon fringe") {
  const Scenario s = small_scenario();
  const PhaseSweepResult result = sweep_phase(s);
  REQUIRE(result.points.size() == 9);

  for (std::size_t i = 0; i < result.points.size(); ++i) {
    const FringePoint& point = result.points[i];
    CHECK(point.heater_mw == doctest::Approx(10.0 * static_cast<double>(i)));
    CHECK(point.phase_rad ==
          doctest::Approx(point.heater_mw * kPi / 40.0));
  }

  // Counts peak at phase 0 (cos 2*0 = 1) and dip near phase pi/2.
  CHECK(result.points[0].center_counts >
        4 * result.points[2].center_counts);

  REQUIRE(result.raw_fit.converged);
  REQUIRE(result.corrected_fit.converged);
  CHECK(result.raw_fit.frequency == doctest::Approx(2.0));
  CHECK(result.raw_fit.visibility > 0.85);
  CHECK(result.raw_fit.visibility < 1.0);
  CHECK(result.corrected_fit.visibility >= result.raw_fit.visibility - 0.01);
}

TEST_CASE("phase sweep results do not depend on the thread count") {
  const Scenario s = small_scenario();
  const PhaseSweepResult serial = sweep_phase(s, 1);
  const PhaseSweepResult threaded = sweep_phase(s, 4);
  REQUIRE(serial.points.size() == threaded.points.size());
  for (std::size_t i = 0; i < serial.points.size(); ++i) {
    CHECK(serial.points[i].center_counts == threaded.points[i].center_counts);
    CHECK(serial.points[i].side_counts == threaded.points[i].side_counts);
    CHECK(serial.points[i].accidental_counts ==
          threaded.points[i].accidental_counts);
  }
  CHECK(serial.raw_fit.visibility == threaded.raw_fit.visibility);
  CHECK(serial.corrected_fit.visibility == threaded.corrected_fit.visibility);
}

TEST_CASE("phase sweep requires a usable grid") {
  Scenario s = small_scenario();
  s.sweep.heater_mw = {0.0, 80.0, 3};
  try {
    sweep_phase(s);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.key_path() == "sweep.heater_mw.points");
  }
}

TEST_CASE("fringe CSV format") {
  std::vector<FringePoint> points(1);
  points[0].heater_mw = 10.0;
  points[0].phase_rad = 0.5;
  points[0].center_counts = 123;
  points[0].side_counts = 45.5;
  CHECK(fringe_csv(points) ==
        "heater_mW,phase_rad,center_counts,side_counts\n"
        "10,0.5,123,45.5\n");
}

TEST_CASE("power sweep recovers the pair rate scaling") {
  Scenario s = small_scenario();
  s.sweep.per_point_duration_s = 0.002;
  // Without jitter every arrival stays on the pulse comb, so accidental
  // estimation must sample window offsets centered on comb teeth.
  s.analysis.accidental_offsets_ps = {-3000.0, -2000.0, 2000.0, 3000.0};
  // calibration 0.5 and brightness 1e7 Hz/mW at 1 GHz: mu = 0.005 / mW.
  const std::vector<PowerPoint> points =
      sweep_power(s, {1.0, 4.0}, 1.0e9, 1.0e7, 0.5);
  REQUIRE(points.size() == 2);
  CHECK(points[0].mu == doctest::Approx(0.005));
  CHECK(points[1].mu == doctest::Approx(0.02));
  // Singles scale ~4x with mu; statistical scatter stays below a percent
  // at these counts.
  CHECK(points[1].rates.singles_a_hz / points[0].rates.singles_a_hz ==
        doctest::Approx(4.0).epsilon(0.05));
  CHECK_FALSE(points[0].car.infinite);
  CHECK_FALSE(points[1].car.infinite);
  CHECK(points[0].car.car > points[1].car.car);
  CHECK(points[0].rates.coincidences_hz > 0.0);
}

TEST_CASE("power sweep rejects non-positive powers") {
  const Scenario s = small_scenario();
  CHECK_THROWS_AS(sweep_power(s, {1.0, 0.0}, 1.0e9, 1.0e7, 0.5), ConfigError);
  CHECK_THROWS_AS(sweep_power(s, {-2.0}, 1.0e9, 1.0e7, 0.5), ConfigError);
  CHECK_THROWS_AS(sweep_power(s, {}, 1.0e9, 1.0e7, 0.5), ConfigError);
}

TEST_CASE("power CSV format") {
  std::vector<PowerPoint> points(1);
  points[0].power_mw = 2.0;
  points[0].mu = 0.01;
  points[0].rates.singles_a_hz = 1000.0;
  points[0].rates.singles_b_hz = 900.0;
  points[0].rates.coincidences_hz = 50.0;
  points[0].rates.accidentals_hz = 2.5;
  points[0].car.car = 20.0;
  CHECK(power_csv(points) ==
        "power_mw,mu,singles_a_hz,singles_b_hz,coincidences_hz,"
        "accidentals_hz,car\n"
        "2,0.01,1000,900,50,2.5,20\n");
}

TEST_CASE("sampled interferometer statistics match the amplitude table") {
  const OracleCheckResult result =
      oracle_check(4, {0.0, kPi / 3.0}, 200000, 99);
  CHECK(result.pulse_count == 4);
  REQUIRE(result.rows.size() == 2);
  for (const OracleCheckRow& row : result.rows) {
    CHECK(row.samples == 200000);
    CHECK(row.chi2.p_value > 0.01);
  }
  CHECK(result.pass);
}
