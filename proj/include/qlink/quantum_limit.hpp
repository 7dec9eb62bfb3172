#pragma once

#include <optional>
#include <span>
#include <vector>

// Rates in bits per second when a fixed photon flux N is spread over b
// pulses per second (n = N / b), for single-symbol (OSSR), joint-detection
// (OJDR) and Hadamard receivers.

namespace qlink::quantum_limit {

/// b log2(1 + tau (N/b) / (1 + nu)).
double rate_ossr(double flux, double tau, double nu, double baud);
/// N tau / ((1 + nu) ln 2), the b -> infinity limit of rate_ossr.
double ossr_bound(double flux, double tau, double nu);

/// b [g(tau N / b + nu) - g(nu)] with nu fixed per pulse.
double rate_ojdr(double flux, double tau, double nu, double baud);
/// N tau log2(1 + 1/nu); +inf for nu = 0.
double ojdr_asymptote(double flux, double tau, double nu);

/// b [g((tau N + nu_flux) / b) - g(nu_flux / b)]: the noise is fixed per
/// second, so each pulse carries nu_flux / b noise photons.
double rate_ojdr_noise_flux(double flux, double tau, double noise_flux, double baud);
/// tau N log2(b / (tau N + nu_flux)); rate_ojdr_noise_flux minus this
/// converges to a constant as b grows.
double ojdr_log_asymptote(double flux, double tau, double noise_flux, double baud);

/// (b/k)(1 - exp(-k tau N / b)) log2 k for an order-k Hadamard receiver on
/// a noiseless link. Throws std::domain_error unless k is a power of 2 >= 2.
double rate_hadamard(double flux, double tau, double baud, int order);

/// b g(x / b) written as x log2(1 + b/x) + b log2(1 + x/b).
double scaled_entropy(double x, double baud);

struct CrossoverOptions {
  double lower = 1.0;
  double upper = 1e18;
  double rel_width = 1e-6;
};

/// Baud-rate at which rate_ojdr reaches ossr_bound. nullopt when the
/// crossing is not bracketed by [lower, upper].
std::optional<double> quantum_limit_crossover(double flux, double tau, double nu,
                                              const CrossoverOptions& options = {});

enum class NoiseConvention { PerPulse, PerSecond };

struct BaudScan {
  double flux = 0.0;
  double tau = 0.0;
  double noise = 0.0;
  NoiseConvention convention = NoiseConvention::PerPulse;
  std::vector<double> baud_points;
  std::vector<double> rates_ossr;
  std::vector<double> rates_ojdr;
};

/// Evaluates both receivers at every baud point. For the per-second noise
/// convention the OSSR sees nu = noise / b per pulse.
BaudScan baud_scan(double flux, double tau, double noise, NoiseConvention convention,
                   std::span<const double> baud_points);

/// `count` points log-spaced over [lo, hi], endpoints included.
std::vector<double> log_spaced(double lo, double hi, int count);

}  // namespace qlink::quantum_limit
