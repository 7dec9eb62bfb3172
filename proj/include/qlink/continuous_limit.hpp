#pragma once

// Continuous amplification (K -> infinity) and the on-off strategy in which
// only the first fraction gamma of the link is amplified at full gain.

namespace qlink::continuum {

/// Optimal heterodyne SE with infinitely many amplifiers at full gain:
/// log2(1 + e^{-aL/(n+1)} n / (1 + (1 - e^{-aL/(n+1)}) n)).
double shannon_se_continuous(double alpha, double length_km, double photons);

/// alpha L n, the K -> infinity limit of (K - 1)(1 - eta) n.
double continuous_energy_shannon(double alpha, double length_km, double photons);

struct OnOffCoefficients {
  double tau = 0.0;
  double nu = 0.0;
};

/// tau = exp[-aL (1 - gamma n / (1 + n))], nu = (e^{-aL(1-gamma)} - tau) n.
OnOffCoefficients onoff_coefficients(double alpha, double length_km, double photons,
                                     double gamma);

struct OnOffPoint {
  double se = 0.0;      // Holevo SE, bits per pulse
  double energy = 0.0;  // photons, alpha L gamma n
};

OnOffPoint onoff_se_and_energy(double alpha, double length_km, double photons, double gamma);

struct OnOffSolution {
  double photons = 0.0;  // optimal n <= n0
  double gamma = 0.0;
  double energy = 0.0;          // E_oo
  double target_se = 0.0;       // continuous Shannon optimum at n0
  double baseline_energy = 0.0; // alpha L n0
  bool used_grid_fallback = false;
};

struct OnOffOptions {
  int photon_points = 2000;        // log-spaced in [n0 * min_fraction, n0]
  double min_photon_fraction = 1e-6;
  int monotonicity_samples = 64;   // gamma samples checked before bisecting
  int fallback_gamma_points = 2000;
};

/// Minimises alpha L gamma n subject to S_ho(n, gamma) >= S_sh(n0) over
/// n in (0, n0], gamma in [0, 1]. For each n the minimal feasible gamma is
/// found by bisection; if S_ho is not monotone in gamma at that n, a gamma
/// grid is scanned instead.
OnOffSolution solve_onoff(double alpha, double length_km, double n0,
                          const OnOffOptions& options = {});

}  // namespace qlink::continuum
