#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "qlink/link_model.hpp"

namespace qlink {

/// Receiver families. Heterodyne and homodyne are the single-symbol
/// (Shannon-type) receivers, Holevo is the optimal joint-detection receiver
/// and Hadamard is the structured joint receiver built from order-k Hadamard
/// codes, defined only for a noiseless channel.
class Receiver {
 public:
  enum class Kind { Heterodyne, Holevo, Homodyne, Hadamard };

  static Receiver heterodyne() { return Receiver(Kind::Heterodyne, 0); }
  static Receiver holevo() { return Receiver(Kind::Holevo, 0); }
  static Receiver homodyne() { return Receiver(Kind::Homodyne, 0); }
  /// Throws std::domain_error unless `order` is a power of two >= 2.
  static Receiver hadamard(int order);

  Kind kind() const { return kind_; }
  int order() const { return order_; }
  std::string name() const;

  bool operator==(const Receiver&) const = default;

 private:
  Receiver(Kind kind, int order) : kind_(kind), order_(order) {}
  Kind kind_;
  int order_;
};

/// g(x) = (x+1) log2(x+1) - x log2(x), the entropy of a thermal state with
/// mean photon number x. g(0) = 0. Throws std::domain_error for x < 0.
double thermal_entropy(double x);

/// g'(x) = log2(1 + 1/x); +infinity at x = 0.
double thermal_entropy_derivative(double x);

/// log2 f_beta(x) with f_beta(x) = (1 + 1/x)^(x + beta). At x = 0 the value
/// is +inf for beta > 0, -inf for beta < 0 and 0 for beta = 0.
double log2_f_beta(double beta, double x);

/// log2(1 + tau n / (1 + nu)).
double shannon_se(const ChannelCoefficients& coeffs, double photons);
/// g(tau n + nu) - g(nu).
double holevo_se(const ChannelCoefficients& coeffs, double photons);
/// log2(1 + 4 tau n / (1 + 2 nu)).
double homodyne_se(const ChannelCoefficients& coeffs, double photons);
/// (1/k)(1 - exp(-k tau n)) log2 k. Requires nu == 0.
double hadamard_se(const ChannelCoefficients& coeffs, double photons, int order);

double spectral_efficiency(const Receiver& receiver, const ChannelCoefficients& coeffs,
                           double photons);
/// Same, from the end-to-end coefficients only.
double spectral_efficiency(const Receiver& receiver, double tau, double nu, double photons);

// Partial derivatives with respect to gain i (0-based). They use the
// suffix coefficients, so every component costs O(1) once the coefficients
// are known.

/// (SNR / G_i) (1 - beta_i) / (1 + nu), chained through log2(1 + SNR).
double shannon_gain_gradient(const ChannelCoefficients& coeffs, double photons, std::size_t i);

/// (1 / G_i) [log2 f_beta(tau n + nu) - log2 f_beta(nu)], beta = beta_i.
/// For nu = 0 (unamplified) this is -inf when beta_i > 0.
double holevo_gain_gradient(const ChannelCoefficients& coeffs, double photons, std::size_t i);

/// Homodyne SNR' = 4 tau n / (1 + 2 nu) has
/// dSNR'/dG_i = (SNR' / G_i)(1 - 2 beta_i) / (1 + 2 nu).
double homodyne_gain_gradient(const ChannelCoefficients& coeffs, double photons, std::size_t i);

/// All K partials for the given receiver. Hadamard is rejected.
std::vector<double> se_gradient(const Receiver& receiver, const ChannelCoefficients& coeffs,
                                double photons);

}  // namespace qlink
