#pragma once

#include <vector>

#include "timebin/config.hpp"
#include "timebin/rng.hpp"
#include "timebin/types.hpp"

namespace timebin {

/// First-order chromatic pulse broadening D * bandwidth * length, in ps.
double broadening_estimate(double dispersion_ps_per_nm_km, double bandwidth_nm,
                           double length_km);

/// Signed residual dispersion of the link after compensation, in ps/nm.
double residual_dispersion_ps_per_nm(const LinkConfig& link);

/// Standard deviation of the signal-idler relative arrival delay induced
/// by residual dispersion acting on the correlated spectral detunings:
/// sigma = |residual| * sigma_lambda * sqrt(2 * (1 - correlation)).
double relative_delay_sigma_ps(const LinkConfig& link,
                               const SpectrumConfig& spectrum);

/// Contrast reduction factor for adjacent-bin interference when residual
/// dispersion smears arrival times across the bin structure:
/// exp(-((sigma / bin_period)^2) / 2).  Equals 1 for a fully compensated
/// (or zero-length) link.
double interference_washout(const LinkConfig& link,
                            const SpectrumConfig& spectrum,
                            double bin_period_ps);

/// Propagates photons through the link: each survives the total link
/// attenuation (fiber loss plus compensation-module insertion loss when
/// enabled) independently, and survivors acquire the dispersive time shift
/// residual * detuning.  The returned photons are sorted by arrival time.
std::vector<Photon> apply_link(const std::vector<Photon>& photons,
                               const LinkConfig& link, Rng& rng);

/// Uncorrelated background photons over [0, duration_s), as sorted arrival
/// times in ps, generated with exponential inter-arrival gaps at rate_hz.
std::vector<double> inject_background(double duration_s, double rate_hz,
                                      Rng& rng);

}  // namespace timebin
