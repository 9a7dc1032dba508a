#include "timebin/optics.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace timebin {

namespace {

void check_contrast(double v0) {
  if (v0 < 0.0 || v0 > 1.0 || !std::isfinite(v0)) {
    throw std::invalid_argument("interference contrast must lie in [0, 1]");
  }
}

}  // namespace

OutcomeDistribution pair_outcome_distribution(double pump_phase_step,
                                              double delta, double v0) {
  check_contrast(v0);
  OutcomeDistribution dist;
  dist.side_minus = 0.25;
  dist.side_plus = 0.25;
  const double theta = 2.0 * delta + pump_phase_step;
  dist.center = 0.25 * (1.0 + v0 * std::cos(theta));
  dist.discarded = 1.0 - dist.side_minus - dist.side_plus - dist.center;
  return dist;
}

TransformResult transform_pair(const PairEvent& event, const MziConfig& mzi,
                               double pump_phase_step,
                               std::uint64_t pulse_count, Rng& rng) {
  check_contrast(mzi.intrinsic_visibility);
  TransformResult result;
  const bool signal_long = rng.bernoulli(0.5);
  const bool idler_long = rng.bernoulli(0.5);
  const std::int64_t pulse = event.origin_pulse;

  bool pair_kept = true;
  if (signal_long != idler_long) {
    result.outcome.kind =
        signal_long ? OutcomeKind::side_plus : OutcomeKind::side_minus;
  } else {
    const bool first_pulse_short = !signal_long && pulse == 0;
    const bool last_pulse_long =
        signal_long &&
        pulse == static_cast<std::int64_t>(pulse_count) - 1;
    if (first_pulse_short || last_pulse_long) {
      // No adjacent-pulse partner exists for this same-path outcome, so
      // there is nothing to interfere with: always kept.
      result.outcome.kind = OutcomeKind::center;
    } else {
      const double theta = 2.0 * mzi.phase_delta_rad + pump_phase_step;
      const double keep =
          0.5 * (1.0 + mzi.intrinsic_visibility * std::cos(theta));
      if (rng.bernoulli(keep)) {
        result.outcome.kind = OutcomeKind::center;
      } else {
        result.outcome.kind = OutcomeKind::discarded;
        pair_kept = false;
      }
    }
  }

  result.outcome.signal_bin = pulse + (signal_long ? 1 : 0);
  result.outcome.idler_bin = pulse + (idler_long ? 1 : 0);
  result.signal_time_ps =
      event.emission_time_ps + (signal_long ? mzi.delay_ps : 0.0);
  result.idler_time_ps =
      event.emission_time_ps + (idler_long ? mzi.delay_ps : 0.0);

  if (pair_kept) {
    const double survival = db_to_survival(mzi.insertion_loss_db);
    result.signal_alive = rng.bernoulli(survival);
    result.idler_alive = rng.bernoulli(survival);
  }
  return result;
}

RoutedTo splitter_route(PhotonRole role, SplitterKind kind, Rng& rng) {
  if (kind == SplitterKind::balanced_50_50 && !rng.bernoulli(0.5)) {
    return RoutedTo::absorbed;
  }
  return role == PhotonRole::signal ? RoutedTo::det_a : RoutedTo::det_b;
}

double AmplitudeTable::probability_for(std::int64_t signal_bin,
                                       std::int64_t idler_bin) const {
  double total = 0.0;
  for (const auto& entry : entries) {
    if (entry.signal_bin == signal_bin && entry.idler_bin == idler_bin) {
      total += entry.probability;
    }
  }
  return total;
}

AmplitudeTable amplitude_oracle(std::uint64_t n_pulses, double delta,
                                const std::vector<double>& pump_phases,
                                bool include_boundary, double v0) {
  check_contrast(v0);
  if (n_pulses == 0) {
    throw std::invalid_argument("amplitude_oracle requires n_pulses >= 1");
  }
  if (n_pulses > 20) {
    throw std::invalid_argument(
        "amplitude_oracle is limited to n_pulses <= 20; use the Monte Carlo "
        "path for longer trains");
  }
  if (!pump_phases.empty() && pump_phases.size() != n_pulses) {
    throw std::invalid_argument(
        "pump_phases must be empty or have one phase per pulse");
  }

  const auto phase_of = [&](std::uint64_t j) {
    return pump_phases.empty() ? 0.0 : pump_phases[j];
  };
  const double norm = 1.0 / std::sqrt(static_cast<double>(n_pulses));
  const std::complex<double> I(0.0, 1.0);

  // One same-path contribution per (joint cell): short-short of pulse j
  // lands in cell (j, j); long-long of pulse j-1 lands in the same cell.
  struct CellAmps {
    std::vector<std::complex<double>> amps;
  };
  std::map<std::int64_t, CellAmps> center_cells;

  AmplitudeTable table;
  double kept = 0.0;
  for (std::uint64_t j = 0; j < n_pulses; ++j) {
    const std::complex<double> pump = std::exp(-I * phase_of(j));
    const std::complex<double> half(0.5, 0.0);
    const std::complex<double> long_arm = std::exp(I * delta);

    const std::complex<double> amp_ss = half * pump * norm;
    const std::complex<double> amp_ll = half * pump * long_arm * long_arm * norm;
    const std::complex<double> amp_sl = half * pump * long_arm * norm;
    const std::complex<double> amp_ls = amp_sl;

    const auto pulse = static_cast<std::int64_t>(j);

    AmplitudeEntry side_minus;  // signal short, idler long
    side_minus.signal_bin = pulse;
    side_minus.idler_bin = pulse + 1;
    side_minus.amplitude = amp_sl;
    side_minus.probability = std::norm(amp_sl);
    table.entries.push_back(side_minus);
    kept += side_minus.probability;

    AmplitudeEntry side_plus;  // signal long, idler short
    side_plus.signal_bin = pulse + 1;
    side_plus.idler_bin = pulse;
    side_plus.amplitude = amp_ls;
    side_plus.probability = std::norm(amp_ls);
    table.entries.push_back(side_plus);
    kept += side_plus.probability;

    center_cells[pulse].amps.push_back(amp_ss);
    center_cells[pulse + 1].amps.push_back(amp_ll);
  }

  for (const auto& [cell, amps] : center_cells) {
    const bool boundary = amps.amps.size() == 1;
    if (boundary && !include_boundary) {
      // Dropped from the table but still part of the kept norm, so
      // discarded_probability always means destructive-interference loss.
      kept += std::norm(amps.amps[0]);
      continue;
    }
    AmplitudeEntry entry;
    entry.signal_bin = cell;
    entry.idler_bin = cell;
    if (boundary) {
      entry.amplitude = amps.amps[0];
      entry.probability = std::norm(amps.amps[0]);
    } else {
      const std::complex<double> a1 = amps.amps[0];
      const std::complex<double> a2 = amps.amps[1];
      entry.amplitude = (a1 + a2) / std::sqrt(2.0);
      entry.probability = 0.5 * (std::norm(a1) + std::norm(a2)) +
                          v0 * (a1 * std::conj(a2)).real();
    }
    table.entries.push_back(entry);
    kept += entry.probability;
  }

  table.discarded_probability = 1.0 - kept;
  if (table.discarded_probability < 0.0 &&
      table.discarded_probability > -1e-12) {
    table.discarded_probability = 0.0;
  }
  return table;
}

std::vector<double> classical_interference(const std::vector<double>& xs,
                                           bool xs_are_heater_mw,
                                           const MziConfig& mzi,
                                           double classical_visibility,
                                           double peak_intensity) {
  check_contrast(classical_visibility);
  if (!(peak_intensity > 0.0)) {
    throw std::invalid_argument("peak_intensity must be positive");
  }
  std::vector<double> out;
  out.reserve(xs.size());
  for (const double x : xs) {
    const double delta = xs_are_heater_mw ? mzi.phase_for_heater(x) : x;
    out.push_back(0.5 * peak_intensity *
                  (1.0 + classical_visibility * std::cos(delta)));
  }
  return out;
}

}  // namespace timebin
