#include "qlink/quantum_limit.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qlink/spectral_efficiency.hpp"

namespace qlink::quantum_limit {

namespace {

void check(double flux, double tau, double nu, double baud) {
  if (!(flux >= 0.0) || !(tau >= 0.0) || !(nu >= 0.0)) {
    throw std::invalid_argument("quantum_limit: flux, tau and noise must be >= 0");
  }
  if (!(baud > 0.0)) throw std::invalid_argument("quantum_limit: baud-rate must be > 0");
}

double log2_1p(double x) { return std::log1p(x) / std::numbers::ln2; }

}  // namespace

double rate_ossr(double flux, double tau, double nu, double baud) {
  check(flux, tau, nu, baud);
  return baud * log2_1p(tau * flux / (baud * (1.0 + nu)));
}

double ossr_bound(double flux, double tau, double nu) {
  return flux * tau / ((1.0 + nu) * std::numbers::ln2);
}

double rate_ojdr(double flux, double tau, double nu, double baud) {
  check(flux, tau, nu, baud);
  return baud * (thermal_entropy(tau * flux / baud + nu) - thermal_entropy(nu));
}

double ojdr_asymptote(double flux, double tau, double nu) {
  return flux * tau * thermal_entropy_derivative(nu);
}

double scaled_entropy(double x, double baud) {
  if (x == 0.0) return 0.0;
  return x * log2_1p(baud / x) + baud * log2_1p(x / baud);
}

double rate_ojdr_noise_flux(double flux, double tau, double noise_flux, double baud) {
  check(flux, tau, noise_flux, baud);
  return scaled_entropy(tau * flux + noise_flux, baud) - scaled_entropy(noise_flux, baud);
}

double ojdr_log_asymptote(double flux, double tau, double noise_flux, double baud) {
  const double x = tau * flux;
  return x * std::log2(baud / (x + noise_flux));
}

double rate_hadamard(double flux, double tau, double baud, int order) {
  check(flux, tau, 0.0, baud);
  if (order < 2 || (order & (order - 1)) != 0) {
    throw std::domain_error("rate_hadamard: order must be a power of two >= 2");
  }
  const double k = order;
  return baud / k * -std::expm1(-k * tau * flux / baud) * std::log2(k);
}

std::optional<double> quantum_limit_crossover(double flux, double tau, double nu,
                                              const CrossoverOptions& opt) {
  if (!(flux * tau > 0.0)) throw std::invalid_argument("crossover: tau N must be > 0");
  const double bound = ossr_bound(flux, tau, nu);
  auto excess = [&](double b) { return rate_ojdr(flux, tau, nu, b) - bound; };
  double lo = opt.lower;
  double hi = opt.upper;
  if (excess(lo) >= 0.0 || excess(hi) < 0.0) return std::nullopt;
  // The OJDR rate is increasing in b, so the sign change is unique; bisect
  // in log space.
  while (hi - lo > opt.rel_width * lo) {
    const double mid = std::sqrt(lo * hi);
    (excess(mid) >= 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

BaudScan baud_scan(double flux, double tau, double noise, NoiseConvention convention,
                   std::span<const double> baud_points) {
  BaudScan scan;
  scan.flux = flux;
  scan.tau = tau;
  scan.noise = noise;
  scan.convention = convention;
  scan.baud_points.assign(baud_points.begin(), baud_points.end());
  for (double b : baud_points) {
    if (convention == NoiseConvention::PerPulse) {
      scan.rates_ossr.push_back(rate_ossr(flux, tau, noise, b));
      scan.rates_ojdr.push_back(rate_ojdr(flux, tau, noise, b));
    } else {
      scan.rates_ossr.push_back(rate_ossr(flux, tau, noise / b, b));
      scan.rates_ojdr.push_back(rate_ojdr_noise_flux(flux, tau, noise, b));
    }
  }
  return scan;
}

std::vector<double> log_spaced(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi >= lo) || count < 1) {
    throw std::invalid_argument("log_spaced: need 0 < lo <= hi and count >= 1");
  }
  std::vector<double> out(static_cast<std::size_t>(count));
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (count - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

}  // namespace qlink::quantum_limit
