// Microbenchmarks for the hot paths: pair emission, interferometer
// transform, detection, delay histogramming, sifting, and the end-to-end
// single-receiver pipeline.

#include <benchmark/benchmark.h>

#include <algorithm>
#include <cstdint>
#include <vector>

#include "timebin/config.hpp"
#include "timebin/detector.hpp"
#include "timebin/histogram.hpp"
#include "timebin/optics.hpp"
#include "timebin/qkd.hpp"
#include "timebin/rng.hpp"
#include "timebin/scenario.hpp"
#include "timebin/source.hpp"
#include "timebin/types.hpp"

namespace {

using namespace timebin;

RunConfig bench_run(std::uint64_t pulses, double mu) {
  RunConfig run;
  run.pulse_count = pulses;
  run.mu = mu;
  run.seed = 9001;
  run.mzi.insertion_loss_db = 0.0;
  for (DetectorConfig& det : run.detectors) {
    det.efficiency = 1.0;
    det.jitter_fwhm_ps = 50.0;
    det.dead_time_ns = 25.0;
    det.dark_rate_hz = 100.0;
  }
  return run;
}

void BM_EmitPairs(benchmark::State& state) {
  const RunConfig run = bench_run(2000000, 0.05);  // ~1e5 pairs per call
  std::uint64_t seed = 1;
  for (auto _ : state) {
    Rng rng(seed++);
    const std::vector<PairEvent> pairs =
        emit_pairs_block(run, 0, run.pulse_count, rng);
    benchmark::DoNotOptimize(pairs.data());
    state.SetItemsProcessed(state.items_processed() +
                            static_cast<std::int64_t>(pairs.size()));
  }
}
BENCHMARK(BM_EmitPairs)->Unit(benchmark::kMillisecond);

void BM_TransformPair(benchmark::State& state) {
  const RunConfig run = bench_run(2000000, 0.05);
  Rng setup(7);
  const std::vector<PairEvent> pairs =
      emit_pairs_block(run, 0, run.pulse_count, setup);
  std::uint64_t seed = 1;
  for (auto _ : state) {
    Rng rng(seed++);
    for (const PairEvent& event : pairs) {
      benchmark::DoNotOptimize(
          transform_pair(event, run.mzi, 0.0, run.pulse_count, rng));
    }
    state.SetItemsProcessed(state.items_processed() +
                            static_cast<std::int64_t>(pairs.size()));
  }
}
BENCHMARK(BM_TransformPair)->Unit(benchmark::kMillisecond);

void BM_Detect(benchmark::State& state) {
  const RunConfig run = bench_run(2000000, 0.05);
  Rng setup(11);
  const std::vector<PairEvent> pairs =
      emit_pairs_block(run, 0, run.pulse_count, setup);
  std::vector<double> arrivals;
  arrivals.reserve(pairs.size());
  for (const PairEvent& event : pairs) {
    arrivals.push_back(event.emission_time_ps);
  }
  std::sort(arrivals.begin(), arrivals.end());
  const double duration_s =
      static_cast<double>(run.pulse_count) * run.units.bin_period_ps * 1e-12;
  std::uint64_t seed = 1;
  for (auto _ : state) {
    Rng rng(seed++);
    const std::vector<TimeTag> tags =
        detect(arrivals, run.detectors[0], run.units, duration_s, rng, 0);
    benchmark::DoNotOptimize(tags.data());
    state.SetItemsProcessed(state.items_processed() +
                            static_cast<std::int64_t>(arrivals.size()));
  }
}
BENCHMARK(BM_Detect)->Unit(benchmark::kMillisecond);

SimulationOutput small_run() {
  Scenario s;
  s.topology = Topology::single_receiver_pbs;
  s.run = bench_run(2000000, 0.05);
  return run_scenario(s);
}

void BM_BuildDelayHistogram(benchmark::State& state) {
  const SimulationOutput out = small_run();
  for (auto _ : state) {
    const DelayHistogram hist = build_delay_histogram(
        out.channels[0], out.channels[1], 50.0, 5000.0, 1.0);
    benchmark::DoNotOptimize(hist.counts.data());
    state.SetItemsProcessed(
        state.items_processed() +
        static_cast<std::int64_t>(out.channels[0].size()));
  }
}
BENCHMARK(BM_BuildDelayHistogram)->Unit(benchmark::kMillisecond);

void BM_Sift(benchmark::State& state) {
  RunConfig run = bench_run(2000000, 0.05);
  ReceiverConfig alice;
  ReceiverConfig bob;
  for (ReceiverConfig* receiver : {&alice, &bob}) {
    receiver->mzi.insertion_loss_db = 0.0;
    for (DetectorConfig& det : receiver->detectors) {
      det.efficiency = 1.0;
      det.jitter_fwhm_ps = 0.0;
      det.dead_time_ns = 0.0;
      det.dark_rate_hz = 0.0;
    }
  }
  const TwoReceiverOutput out = distribute_and_detect(run, alice, bob);
  const std::vector<TimeTag> alice_tags =
      merge_ports(out.alice_ports[0], out.alice_ports[1]);
  const std::vector<TimeTag> bob_tags =
      merge_ports(out.bob_ports[0], out.bob_ports[1]);
  for (auto _ : state) {
    const std::vector<SiftedBlock> blocks =
        sift(alice_tags, bob_tags, 400.0, 1000.0);
    benchmark::DoNotOptimize(blocks.data());
    state.SetItemsProcessed(state.items_processed() +
                            static_cast<std::int64_t>(alice_tags.size()));
  }
}
BENCHMARK(BM_Sift)->Unit(benchmark::kMillisecond);

void BM_EndToEndSingleReceiver(benchmark::State& state) {
  Scenario s;
  s.topology = Topology::single_receiver_pbs;
  s.run = bench_run(1000000, 0.05);  // ~5e4 pairs per iteration
  for (auto _ : state) {
    s.run.seed += 1;
    const SimulationOutput out = run_scenario(s);
    benchmark::DoNotOptimize(out.channels.data());
    state.SetItemsProcessed(
        state.items_processed() +
        static_cast<std::int64_t>(expected_pairs(s.run)));
  }
}
BENCHMARK(BM_EndToEndSingleReceiver)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
