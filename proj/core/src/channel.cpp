#include "timebin/channel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace timebin {

double broadening_estimate(double dispersion_ps_per_nm_km, double bandwidth_nm,
                           double length_km) {
  if (dispersion_ps_per_nm_km < 0.0 || bandwidth_nm < 0.0 || length_km < 0.0) {
    throw std::invalid_argument("broadening_estimate arguments must be >= 0");
  }
  return dispersion_ps_per_nm_km * bandwidth_nm * length_km;
}

double residual_dispersion_ps_per_nm(const LinkConfig& link) {
  const double compensated = link.dcm.enabled ? link.dcm.compensated_km : 0.0;
  return link.dispersion_ps_per_nm_km * (link.length_km - compensated);
}

double relative_delay_sigma_ps(const LinkConfig& link,
                               const SpectrumConfig& spectrum) {
  const double residual = std::fabs(residual_dispersion_ps_per_nm(link));
  const double spread =
      std::sqrt(2.0 * (1.0 - spectrum.correlation)) * spectrum.sigma_nm();
  return residual * spread;
}

double interference_washout(const LinkConfig& link,
                            const SpectrumConfig& spectrum,
                            double bin_period_ps) {
  if (!(bin_period_ps > 0.0)) {
    throw std::invalid_argument("bin_period_ps must be positive");
  }
  const double sigma = relative_delay_sigma_ps(link, spectrum);
  const double ratio = sigma / bin_period_ps;
  return std::exp(-0.5 * ratio * ratio);
}

std::vector<Photon> apply_link(const std::vector<Photon>& photons,
                               const LinkConfig& link, Rng& rng) {
  const double total_loss_db =
      link.loss_db + (link.dcm.enabled ? link.dcm.insertion_loss_db : 0.0);
  const double survival = db_to_survival(total_loss_db);
  const double residual = residual_dispersion_ps_per_nm(link);

  std::vector<Photon> out;
  out.reserve(photons.size());
  for (const Photon& photon : photons) {
    if (!rng.bernoulli(survival)) {
      continue;
    }
    Photon shifted = photon;
    shifted.time_ps += residual * photon.dlambda_nm;
    out.push_back(shifted);
  }
  std::sort(out.begin(), out.end(),
            [](const Photon& a, const Photon& b) { return a.time_ps < b.time_ps; });
  return out;
}

std::vector<double> inject_background(double duration_s, double rate_hz,
                                      Rng& rng) {
  if (duration_s < 0.0 || rate_hz < 0.0) {
    throw std::invalid_argument(
        "inject_background requires non-negative duration and rate");
  }
  std::vector<double> times;
  if (rate_hz == 0.0 || duration_s == 0.0) {
    return times;
  }
  times.reserve(static_cast<std::size_t>(rate_hz * duration_s * 1.1) + 16);
  const double duration_ps = duration_s * 1e12;
  const double rate_per_ps = rate_hz * 1e-12;
  double t = rng.exponential(rate_per_ps);
  while (t < duration_ps) {
    times.push_back(t);
    t += rng.exponential(rate_per_ps);
  }
  return times;
}

}  // namespace timebin
