#include "timebin/source.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "timebin/text.hpp"

namespace timebin {

std::vector<PairEvent> emit_pairs(const RunConfig& run, Rng& rng) {
  return emit_pairs_block(run, 0, run.pulse_count, rng);
}

std::vector<PairEvent> emit_pairs_block(const RunConfig& run,
                                        std::uint64_t first_pulse,
                                        std::uint64_t block_pulses, Rng& rng) {
  if (first_pulse + block_pulses > run.pulse_count) {
    throw std::invalid_argument(
        "emit_pairs_block: pulse range extends past the end of the run");
  }
  const double mean_total = run.mu * static_cast<double>(block_pulses);
  const std::uint64_t total = rng.poisson(mean_total);

  std::vector<std::uint64_t> pulses(total);
  const auto span = static_cast<double>(block_pulses);
  for (auto& pulse : pulses) {
    auto index = static_cast<std::uint64_t>(rng.uniform() * span);
    if (index >= block_pulses) {
      index = block_pulses - 1;
    }
    pulse = first_pulse + index;
  }
  std::sort(pulses.begin(), pulses.end());

  const double bin_period = run.units.bin_period_ps;
  const double pulse_width = run.source.pulse_width_ps;

  std::vector<PairEvent> events;
  events.reserve(total);
  for (const std::uint64_t pulse : pulses) {
    PairEvent event;
    event.origin_pulse = static_cast<std::int64_t>(pulse);
    event.emission_time_ps = static_cast<double>(pulse) * bin_period +
                             rng.uniform() * pulse_width;
    sample_spectrum(event, run.source.spectrum, rng);
    event.pump_phase_rad = run.pump_phase_step * static_cast<double>(pulse);
    events.push_back(event);
  }
  return events;
}

double expected_pairs(const RunConfig& run) {
  return run.mu * static_cast<double>(run.pulse_count);
}

void sample_spectrum(PairEvent& event, const SpectrumConfig& cfg, Rng& rng) {
  const double sigma = cfg.sigma_nm();
  const double corr = cfg.correlation;
  const double anti = std::sqrt(std::max(0.0, 1.0 - corr * corr));
  const double z1 = rng.normal();
  const double z2 = rng.normal();
  event.dlambda_signal_nm = sigma * z1;
  event.dlambda_idler_nm = sigma * (corr * z1 + anti * z2);
}

std::map<double, std::uint64_t> spectrum_histogram(
    const std::vector<PairEvent>& events, double center_nm,
    double bin_width_nm) {
  if (!(bin_width_nm > 0.0)) {
    throw std::invalid_argument(
        "spectrum_histogram requires a positive bin width");
  }
  std::map<double, std::uint64_t> hist;
  for (const PairEvent& event : events) {
    const double lambda = center_nm + event.dlambda_signal_nm;
    const double edge =
        std::floor(lambda / bin_width_nm) * bin_width_nm;
    ++hist[edge];
  }
  return hist;
}

std::string spectrum_csv(const std::map<double, std::uint64_t>& hist) {
  std::string csv = "lambda_nm,count\n";
  for (const auto& [lambda_nm, count] : hist) {
    csv += format_double(lambda_nm);
    csv += ',';
    csv += std::to_string(count);
    csv += '\n';
  }
  return csv;
}

}  // namespace timebin
