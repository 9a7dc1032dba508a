#include "timebin/types.hpp"

#include <cmath>
#include <stdexcept>

namespace timebin {

void Units::validate() const {
  if (!(tick_resolution_ps > 0.0)) {
    throw std::invalid_argument("tick_resolution_ps must be positive");
  }
  if (!(bin_period_ps > 0.0)) {
    throw std::invalid_argument("bin_period_ps must be positive");
  }
  if (std::fabs(mzi_delay_ps - bin_period_ps) > 1e-9 * bin_period_ps) {
    throw std::invalid_argument(
        "mzi_delay_ps must equal bin_period_ps: adjacent-bin interference "
        "requires the interferometer imbalance to match the emission period");
  }
}

double db_to_survival(double db) {
  if (db < 0.0) {
    throw std::invalid_argument("attenuation in dB must be >= 0");
  }
  return std::pow(10.0, -db / 10.0);
}

double survival_to_db(double survival) {
  if (!(survival > 0.0) || survival > 1.0) {
    throw std::invalid_argument("survival probability must lie in (0, 1]");
  }
  return -10.0 * std::log10(survival);
}

}  // namespace timebin
