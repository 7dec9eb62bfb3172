#pragma once

// Conversions between laboratory units (watts, metres, baud) and the
// dimensionless photon numbers used everywhere else in qlink. This is the
// only header that knows about joules; every other module works with
// hbar*omega = 1, i.e. energy measured in photons.

namespace qlink::units {

inline constexpr double kPlanck = 6.62607015e-34;      // J s (exact, SI 2019)
inline constexpr double kSpeedOfLight = 299792458.0;   // m/s (exact)
inline constexpr double kCBandWavelength = 1550e-9;    // m

/// Energy of a single photon of the given vacuum wavelength, h*c/lambda.
/// Throws std::domain_error for a non-positive wavelength.
double photon_energy(double wavelength_m);

/// Mean photon number per pulse n for a transmitter emitting `power_w`
/// watts at `baud_rate` pulses per second, from w = e_p * n * b.
double photons_per_pulse(double power_w, double wavelength_m, double baud_rate);

/// Photons per second N = w / e_p. Independent of the baud-rate; N = n * b.
double photon_flux(double power_w, double wavelength_m);

struct PhysicalParams {
  double wavelength = kCBandWavelength;  // m
  double power = 0.0;                    // W
  double baud_rate = 80e9;               // pulses/s

  void validate() const;
  double photon_energy() const { return units::photon_energy(wavelength); }
  double photons_per_pulse() const {
    return units::photons_per_pulse(power, wavelength, baud_rate);
  }
  double photon_flux() const { return units::photon_flux(power, wavelength); }
};

}  // namespace qlink::units
