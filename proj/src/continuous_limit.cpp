#include "qlink/continuous_limit.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "qlink/spectral_efficiency.hpp"

namespace qlink::continuum {

namespace {

void check_non_negative(double alpha, double length_km, double photons) {
  if (!(alpha >= 0.0) || !(length_km >= 0.0) || !(photons >= 0.0)) {
    throw std::invalid_argument("continuum: alpha, length and photon number must be >= 0");
  }
}

void check_gamma(double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("continuum: gamma must lie in [0, 1]");
  }
}

}  // namespace

double shannon_se_continuous(double alpha, double length_km, double photons) {
  check_non_negative(alpha, length_km, photons);
  const double x = alpha * length_km / (photons + 1.0);
  const double tau = std::exp(-x);
  const double noise = -std::expm1(-x) * photons;
  return std::log1p(tau * photons / (1.0 + noise)) / std::numbers::ln2;
}

double continuous_energy_shannon(double alpha, double length_km, double photons) {
  check_non_negative(alpha, length_km, photons);
  return alpha * length_km * photons;
}

OnOffCoefficients onoff_coefficients(double alpha, double length_km, double photons,
                                     double gamma) {
  check_non_negative(alpha, length_km, photons);
  check_gamma(gamma);
  const double al = alpha * length_km;
  const double unamplified_tail = std::exp(-al * (1.0 - gamma));
  // tau = e^{-aL(1-gamma)} e^{-aL gamma / (1+n)}; write nu without the
  // cancellation in e^{-aL(1-gamma)} - tau.
  const double deficit = al * gamma / (1.0 + photons);
  OnOffCoefficients c;
  c.tau = unamplified_tail * std::exp(-deficit);
  c.nu = -unamplified_tail * std::expm1(-deficit) * photons;
  return c;
}

OnOffPoint onoff_se_and_energy(double alpha, double length_km, double photons, double gamma) {
  const auto c = onoff_coefficients(alpha, length_km, photons, gamma);
  const double received = std::exp(-alpha * length_km * (1.0 - gamma)) * photons;
  return {thermal_entropy(received) - thermal_entropy(c.nu),
          alpha * length_km * gamma * photons};
}

OnOffSolution solve_onoff(double alpha, double length_km, double n0, const OnOffOptions& opt) {
  check_non_negative(alpha, length_km, n0);
  if (!(n0 > 0.0)) throw std::invalid_argument("solve_onoff: n0 must be > 0");
  if (opt.photon_points < 2) throw std::invalid_argument("solve_onoff: need >= 2 photon points");

  OnOffSolution best;
  best.target_se = shannon_se_continuous(alpha, length_km, n0);
  best.baseline_energy = continuous_energy_shannon(alpha, length_km, n0);
  best.photons = n0;
  best.gamma = 1.0;
  best.energy = std::numeric_limits<double>::infinity();
  const double target = best.target_se;
  auto se = [&](double n, double gamma) {
    return onoff_se_and_energy(alpha, length_km, n, gamma).se;
  };

  // gamma = 1, n = n0 meets the target because Holevo >= Shannon.
  if (se(n0, 1.0) < target * (1.0 - 1e-12)) {
    throw std::logic_error("solve_onoff: full amplification misses the Shannon target");
  }

  const double log_lo = std::log(n0 * opt.min_photon_fraction);
  const double log_hi = std::log(n0);
  for (int j = 0; j < opt.photon_points; ++j) {
    const double n = j + 1 == opt.photon_points
                         ? n0
                         : std::exp(log_lo + (log_hi - log_lo) * j / (opt.photon_points - 1));
    if (se(n, 1.0) < target) continue;
    double gamma = 0.0;
    if (se(n, 0.0) < target) {
      bool monotone = true;
      double prev = se(n, 0.0);
      for (int m = 1; m <= opt.monotonicity_samples; ++m) {
        const double v = se(n, static_cast<double>(m) / opt.monotonicity_samples);
        if (v < prev) {
          monotone = false;
          break;
        }
        prev = v;
      }
      double lo = 0.0;
      double hi = 1.0;
      if (!monotone) {
        best.used_grid_fallback = true;
        for (int m = 1; m <= opt.fallback_gamma_points; ++m) {
          const double gm = static_cast<double>(m) / opt.fallback_gamma_points;
          if (se(n, gm) >= target) {
            hi = gm;
            lo = static_cast<double>(m - 1) / opt.fallback_gamma_points;
            break;
          }
        }
      }
      for (int it = 0; it < 80 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        (se(n, mid) >= target ? hi : lo) = mid;
      }
      gamma = hi;
    }
    const double e = alpha * length_km * gamma * n;
    if (e < best.energy) {
      best.energy = e;
      best.photons = n;
      best.gamma = gamma;
    }
  }
  return best;
}

}  // namespace qlink::continuum
