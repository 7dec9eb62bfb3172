#include "qlink/units.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qlink::units {

double photon_energy(double wavelength_m) {
  if (!(wavelength_m > 0.0) || !std::isfinite(wavelength_m)) {
    throw std::domain_error("photon_energy: wavelength must be positive, got " +
                            std::to_string(wavelength_m));
  }
  return kPlanck * kSpeedOfLight / wavelength_m;
}

double photons_per_pulse(double power_w, double wavelength_m, double baud_rate) {
  if (!(baud_rate > 0.0)) {
    throw std::domain_error("photons_per_pulse: baud-rate must be positive");
  }
  if (power_w < 0.0) {
    throw std::domain_error("photons_per_pulse: power must be non-negative");
  }
  return power_w / (photon_energy(wavelength_m) * baud_rate);
}

double photon_flux(double power_w, double wavelength_m) {
  if (power_w < 0.0) {
    throw std::domain_error("photon_flux: power must be non-negative");
  }
  return power_w / photon_energy(wavelength_m);
}

void PhysicalParams::validate() const {
  if (!(wavelength > 0.0)) throw std::domain_error("PhysicalParams: wavelength must be > 0");
  if (!(power >= 0.0)) throw std::domain_error("PhysicalParams: power must be >= 0");
  if (!(baud_rate > 0.0)) throw std::domain_error("PhysicalParams: baud_rate must be > 0");
}

}  // namespace qlink::units
