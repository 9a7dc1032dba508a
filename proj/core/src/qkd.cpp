#include "timebin/qkd.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "timebin/channel.hpp"
#include "timebin/detector.hpp"
#include "timebin/rng.hpp"
#include "timebin/source.hpp"
#include "timebin/stats.hpp"

namespace timebin {

namespace {

// Disjoint substream namespaces so pipeline stages never share draws with
// the per-block emission streams (block indices stay far below 2^62).
constexpr std::uint64_t kBackgroundStream = 0x8000000000000000ull;
constexpr std::uint64_t kDetectorStream = 0x9000000000000000ull;

struct ReceiverDerived {
  double link_survival = 1.0;
  double residual_ps_per_nm = 0.0;
  double mzi_survival = 1.0;
  double delay_ps = 0.0;
  double delta_rad = 0.0;
};

ReceiverDerived derive(const ReceiverConfig& receiver) {
  ReceiverDerived d;
  double loss_db = receiver.link.loss_db;
  if (receiver.link.dcm.enabled) {
    loss_db += receiver.link.dcm.insertion_loss_db;
  }
  d.link_survival = db_to_survival(loss_db);
  d.residual_ps_per_nm = residual_dispersion_ps_per_nm(receiver.link);
  d.mzi_survival = db_to_survival(receiver.mzi.insertion_loss_db);
  d.delay_ps = receiver.mzi.delay_ps;
  d.delta_rad = receiver.mzi.phase_delta_rad;
  return d;
}

/// Joint interference contrast of the two-receiver arrangement: both
/// interferometers' intrinsic contrast times the washout from the
/// relative dispersive delay spread of the two links acting on the
/// correlated detunings.
double franson_visibility(const RunConfig& run, const ReceiverConfig& alice,
                          const ReceiverConfig& bob) {
  const double sigma_lambda = run.source.spectrum.sigma_nm();
  const double corr = run.source.spectrum.correlation;
  const double r_a = residual_dispersion_ps_per_nm(alice.link);
  const double r_b = residual_dispersion_ps_per_nm(bob.link);
  const double variance =
      sigma_lambda * sigma_lambda *
      std::max(0.0, r_a * r_a + r_b * r_b - 2.0 * corr * r_a * r_b);
  const double period = run.units.bin_period_ps;
  const double washout = std::exp(-0.5 * variance / (period * period));
  return alice.mzi.intrinsic_visibility * bob.mzi.intrinsic_visibility *
         washout;
}

void check_receiver_delay(const ReceiverConfig& receiver, const Units& units,
                          const std::string& key_path) {
  if (receiver.mzi.delay_ps != units.bin_period_ps) {
    throw ConfigError(
        "receiver interferometer delay (" +
            std::to_string(receiver.mzi.delay_ps) +
            " ps) must equal the source bin period (" +
            std::to_string(units.bin_period_ps) + " ps)",
        key_path);
  }
}

void check_sorted_tags(const std::vector<TimeTag>& tags, const char* which) {
  for (std::size_t i = 1; i < tags.size(); ++i) {
    if (tags[i].ticks < tags[i - 1].ticks) {
      throw std::invalid_argument(std::string("sift: ") + which +
                                  " tag stream is not sorted");
    }
  }
}

}  // namespace

TwoReceiverOutput distribute_and_detect(const RunConfig& run,
                                        const ReceiverConfig& alice,
                                        const ReceiverConfig& bob) {
  run.validate("run");
  alice.validate("receivers.alice");
  bob.validate("receivers.bob");
  check_receiver_delay(alice, run.units, "receivers.alice.mzi.delay_ps");
  check_receiver_delay(bob, run.units, "receivers.bob.mzi.delay_ps");

  const ReceiverDerived da = derive(alice);
  const ReceiverDerived db = derive(bob);
  const double v_eff = franson_visibility(run, alice, bob);
  const double theta =
      da.delta_rad + db.delta_rad + run.pump_phase_step;
  const double p_same_port = 0.5 * (1.0 + v_eff * std::cos(theta));
  const std::int64_t last_pulse =
      static_cast<std::int64_t>(run.pulse_count) - 1;

  // Pair emission is chunked so arbitrarily long runs hold only one
  // block of pair events at a time (detected arrivals accumulate).
  const double target_pairs_per_block = 1.0e6;
  std::uint64_t block_pulses = run.pulse_count;
  if (run.mu > 0.0 && target_pairs_per_block / run.mu <
                          static_cast<double>(run.pulse_count)) {
    block_pulses = std::max<std::uint64_t>(
        1, static_cast<std::uint64_t>(target_pairs_per_block / run.mu));
  }

  std::array<std::vector<double>, 2> alice_arrivals;
  std::array<std::vector<double>, 2> bob_arrivals;

  std::uint64_t first = 0;
  std::uint64_t block_index = 0;
  while (first < run.pulse_count) {
    const std::uint64_t count =
        std::min<std::uint64_t>(block_pulses, run.pulse_count - first);
    Rng rng = Rng::substream(run.seed, block_index);
    const std::vector<PairEvent> pairs =
        emit_pairs_block(run, first, count, rng);

    for (const PairEvent& pair : pairs) {
      const bool a_alive = rng.bernoulli(da.link_survival);
      const bool b_alive = rng.bernoulli(db.link_survival);
      if (!a_alive && !b_alive) {
        continue;
      }
      double t_a =
          pair.emission_time_ps + da.residual_ps_per_nm * pair.dlambda_signal_nm;
      double t_b =
          pair.emission_time_ps + db.residual_ps_per_nm * pair.dlambda_idler_nm;

      if (a_alive && b_alive) {
        const bool long_a = rng.bernoulli(0.5);
        const bool long_b = rng.bernoulli(0.5);
        const bool keep_a = rng.bernoulli(da.mzi_survival);
        const bool keep_b = rng.bernoulli(db.mzi_survival);
        if (long_a) t_a += da.delay_ps;
        if (long_b) t_b += db.delay_ps;

        const bool center = long_a == long_b;
        const bool boundary =
            center && ((!long_a && pair.origin_pulse == 0) ||
                       (long_a && pair.origin_pulse == last_pulse));
        if (center && !boundary && keep_a && keep_b) {
          const bool same_port = rng.bernoulli(p_same_port);
          const int port_a = rng.bernoulli(0.5) ? 1 : 0;
          const int port_b = same_port ? port_a : 1 - port_a;
          alice_arrivals[static_cast<std::size_t>(port_a)].push_back(t_a);
          bob_arrivals[static_cast<std::size_t>(port_b)].push_back(t_b);
        } else {
          if (keep_a) {
            const int port = rng.bernoulli(0.5) ? 1 : 0;
            alice_arrivals[static_cast<std::size_t>(port)].push_back(t_a);
          }
          if (keep_b) {
            const int port = rng.bernoulli(0.5) ? 1 : 0;
            bob_arrivals[static_cast<std::size_t>(port)].push_back(t_b);
          }
        }
      } else if (a_alive) {
        if (rng.bernoulli(0.5)) t_a += da.delay_ps;
        if (rng.bernoulli(da.mzi_survival)) {
          const int port = rng.bernoulli(0.5) ? 1 : 0;
          alice_arrivals[static_cast<std::size_t>(port)].push_back(t_a);
        }
      } else {
        if (rng.bernoulli(0.5)) t_b += db.delay_ps;
        if (rng.bernoulli(db.mzi_survival)) {
          const int port = rng.bernoulli(0.5) ? 1 : 0;
          bob_arrivals[static_cast<std::size_t>(port)].push_back(t_b);
        }
      }
    }
    first += count;
    ++block_index;
  }

  TwoReceiverOutput out;
  out.duration_s = run.duration_s();
  for (std::size_t ch = 0; ch < 4; ++ch) {
    const bool is_alice = ch < 2;
    const std::size_t port = ch % 2;
    std::vector<double>& arrivals =
        is_alice ? alice_arrivals[port] : bob_arrivals[port];
    const ReceiverConfig& receiver = is_alice ? alice : bob;

    Rng bg_rng = Rng::substream(run.seed, kBackgroundStream + ch);
    const std::vector<double> background = inject_background(
        out.duration_s, receiver.link.background_rate_hz, bg_rng);
    arrivals.insert(arrivals.end(), background.begin(), background.end());
    std::sort(arrivals.begin(), arrivals.end());

    Rng det_rng = Rng::substream(run.seed, kDetectorStream + ch);
    std::vector<TimeTag>& dest =
        is_alice ? out.alice_ports[port] : out.bob_ports[port];
    dest = detect(arrivals, receiver.detectors[port], run.units,
                  out.duration_s, det_rng, static_cast<std::uint8_t>(port));
    arrivals.clear();
    arrivals.shrink_to_fit();
  }
  return out;
}

std::vector<TimeTag> merge_ports(const std::vector<TimeTag>& port0,
                                 const std::vector<TimeTag>& port1) {
  std::vector<TimeTag> merged;
  merged.reserve(port0.size() + port1.size());
  merged.insert(merged.end(), port0.begin(), port0.end());
  merged.insert(merged.end(), port1.begin(), port1.end());
  std::sort(merged.begin(), merged.end(),
            [](const TimeTag& lhs, const TimeTag& rhs) {
              return lhs.ticks != rhs.ticks ? lhs.ticks < rhs.ticks
                                            : lhs.channel < rhs.channel;
            });
  return merged;
}

std::vector<SiftedBlock> sift(const std::vector<TimeTag>& alice_tags,
                              const std::vector<TimeTag>& bob_tags,
                              double coincidence_window_ps,
                              double bin_period_ps,
                              double tick_resolution_ps) {
  if (!(bin_period_ps > 0.0) || !(tick_resolution_ps > 0.0)) {
    throw std::invalid_argument(
        "sift requires positive bin period and tick resolution");
  }
  if (!(coincidence_window_ps > 0.0)) {
    throw std::invalid_argument("sift requires a positive coincidence window");
  }
  if (coincidence_window_ps >= bin_period_ps / 2.0) {
    throw std::invalid_argument(
        "coincidence window must be smaller than half the bin period; "
        "time and phase bases become ambiguous");
  }
  check_sorted_tags(alice_tags, "alice");
  check_sorted_tags(bob_tags, "bob");

  const double period = bin_period_ps;
  const double half_window = coincidence_window_ps / 2.0 + 1e-9;
  const double reach = period + coincidence_window_ps / 2.0;

  SiftedBlock time_block;
  time_block.basis = Basis::time;
  SiftedBlock phase_block;
  phase_block.basis = Basis::phase;

  const auto time_of = [tick_resolution_ps](const TimeTag& tag) {
    return static_cast<double>(tag.ticks) * tick_resolution_ps;
  };

  // Greedy earliest-first one-to-one matching: the globally earliest
  // unmatched tag claims its best valid partner (smallest |time
  // difference|) or is permanently discarded.  Partners are always at or
  // after the claiming tag, so a forward scan bounded by `reach` suffices.
  std::vector<char> used_a(alice_tags.size(), 0);
  std::vector<char> used_b(bob_tags.size(), 0);
  std::size_t ia = 0;
  std::size_t ib = 0;

  const auto classify_and_store = [&](const TimeTag& tag_a,
                                      const TimeTag& tag_b) {
    const double t_a = time_of(tag_a);
    const double t_b = time_of(tag_b);
    const double delta = t_b - t_a;
    const auto n = std::llround(delta / period);
    if (n == 0) {
      phase_block.alice_bits.push_back(tag_a.channel & 1);
      phase_block.bob_bits.push_back(tag_b.channel & 1);
    } else {
      const auto bin_a = std::llround(t_a / period);
      const auto bin_b = std::llround(t_b / period);
      time_block.alice_bits.push_back(static_cast<std::uint8_t>(bin_a & 1));
      time_block.bob_bits.push_back(
          static_cast<std::uint8_t>((bin_b & 1) ^ 1));
    }
  };

  const auto valid_match = [&](double delta) {
    const auto n = std::llround(delta / period);
    if (n < -1 || n > 1) {
      return false;
    }
    return std::fabs(delta - static_cast<double>(n) * period) <= half_window;
  };

  while (true) {
    while (ia < alice_tags.size() && used_a[ia]) ++ia;
    while (ib < bob_tags.size() && used_b[ib]) ++ib;
    const bool have_a = ia < alice_tags.size();
    const bool have_b = ib < bob_tags.size();
    if (!have_a && !have_b) {
      break;
    }
    const bool from_a =
        have_a &&
        (!have_b || time_of(alice_tags[ia]) <= time_of(bob_tags[ib]));

    if (from_a) {
      const double t_a = time_of(alice_tags[ia]);
      std::size_t best = bob_tags.size();
      double best_abs = 0.0;
      for (std::size_t j = ib; j < bob_tags.size(); ++j) {
        if (used_b[j]) continue;
        const double delta = time_of(bob_tags[j]) - t_a;
        if (delta > reach + 1e-9) break;
        if (!valid_match(delta)) continue;
        if (best == bob_tags.size() || std::fabs(delta) < best_abs) {
          best = j;
          best_abs = std::fabs(delta);
        }
      }
      if (best != bob_tags.size()) {
        classify_and_store(alice_tags[ia], bob_tags[best]);
        used_b[best] = 1;
      }
      used_a[ia] = 1;
    } else {
      const double t_b = time_of(bob_tags[ib]);
      std::size_t best = alice_tags.size();
      double best_abs = 0.0;
      for (std::size_t j = ia; j < alice_tags.size(); ++j) {
        if (used_a[j]) continue;
        const double delta = t_b - time_of(alice_tags[j]);
        if (time_of(alice_tags[j]) > t_b + reach + 1e-9) break;
        if (!valid_match(delta)) continue;
        if (best == alice_tags.size() || std::fabs(delta) < best_abs) {
          best = j;
          best_abs = std::fabs(delta);
        }
      }
      if (best != alice_tags.size()) {
        classify_and_store(alice_tags[best], bob_tags[ib]);
        used_a[best] = 1;
      }
      used_b[ib] = 1;
    }
  }

  for (SiftedBlock* block : {&time_block, &phase_block}) {
    block->pair_count = block->alice_bits.size();
    std::uint64_t mismatches = 0;
    for (std::size_t i = 0; i < block->alice_bits.size(); ++i) {
      mismatches += block->alice_bits[i] != block->bob_bits[i];
    }
    block->qber = block->pair_count == 0
                      ? 0.0
                      : static_cast<double>(mismatches) /
                            static_cast<double>(block->pair_count);
  }
  return {time_block, phase_block};
}

double key_fraction(double qber_time, double qber_phase) {
  for (const double qber : {qber_time, qber_phase}) {
    if (!(qber >= 0.0) || !(qber <= 0.5)) {
      throw std::invalid_argument(
          "key_fraction requires QBER values in [0, 0.5]");
    }
  }
  const double fraction =
      1.0 - binary_entropy(qber_time) - binary_entropy(qber_phase);
  return std::max(0.0, fraction);
}

ThresholdCheck visibility_threshold_check(double visibility) {
  if (!(visibility >= 0.0) || !(visibility <= 1.0)) {
    throw std::invalid_argument(
        "visibility_threshold_check requires visibility in [0, 1]");
  }
  ThresholdCheck check;
  check.entangled = visibility > 1.0 / std::sqrt(2.0);
  const double qber = (1.0 - visibility) / 2.0;
  check.key_positive = key_fraction(qber, qber) > 0.0;
  return check;
}

}  // namespace timebin
