#include "qlink/spectral_efficiency.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace qlink {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log2_1p(double x) { return std::log1p(x) / std::numbers::ln2; }

void check_index(const ChannelCoefficients& c, std::size_t i) {
  if (i >= c.segments()) throw std::out_of_range("gain index out of range");
}

}  // namespace

Receiver Receiver::hadamard(int order) {
  if (order < 2 || (order & (order - 1)) != 0) {
    throw std::domain_error("Hadamard order must be a power of two >= 2, got " +
                            std::to_string(order));
  }
  return Receiver(Kind::Hadamard, order);
}

std::string Receiver::name() const {
  switch (kind_) {
    case Kind::Heterodyne: return "heterodyne";
    case Kind::Holevo: return "holevo";
    case Kind::Homodyne: return "homodyne";
    case Kind::Hadamard: return "hadamard-" + std::to_string(order_);
  }
  return "unknown";
}

double thermal_entropy(double x) {
  if (x < 0.0 || std::isnan(x)) throw std::domain_error("thermal_entropy: x must be >= 0");
  if (x == 0.0) return 0.0;
  // log2(1+x) + x log2(1+1/x): no cancellation near 0 or for large x.
  return log2_1p(x) + x * log2_1p(1.0 / x);
}

double thermal_entropy_derivative(double x) {
  if (x < 0.0) throw std::domain_error("thermal_entropy_derivative: x must be >= 0");
  if (x == 0.0) return kInf;
  return log2_1p(1.0 / x);
}

double log2_f_beta(double beta, double x) {
  if (x < 0.0) throw std::domain_error("log2_f_beta: x must be >= 0");
  if (x == 0.0) {
    if (beta > 0.0) return kInf;
    if (beta < 0.0) return -kInf;
    return 0.0;  // x log(1 + 1/x) -> 0
  }
  return (x + beta) * log2_1p(1.0 / x);
}

double spectral_efficiency(const Receiver& r, double tau, double nu, double photons) {
  const double signal = tau * photons;
  switch (r.kind()) {
    case Receiver::Kind::Heterodyne: return log2_1p(signal / (1.0 + nu));
    case Receiver::Kind::Holevo: return thermal_entropy(signal + nu) - thermal_entropy(nu);
    case Receiver::Kind::Homodyne: return log2_1p(4.0 * signal / (1.0 + 2.0 * nu));
    case Receiver::Kind::Hadamard: {
      if (nu != 0.0) {
        throw std::domain_error("hadamard_se: the Hadamard rate is defined for noiseless links only");
      }
      const double k = r.order();
      return -std::expm1(-k * signal) * std::log2(k) / k;
    }
  }
  throw std::logic_error("unreachable");
}

double spectral_efficiency(const Receiver& r, const ChannelCoefficients& c, double photons) {
  return spectral_efficiency(r, c.tau(), c.nu(), photons);
}

double shannon_se(const ChannelCoefficients& c, double photons) {
  return spectral_efficiency(Receiver::heterodyne(), c, photons);
}

double holevo_se(const ChannelCoefficients& c, double photons) {
  return spectral_efficiency(Receiver::holevo(), c, photons);
}

double homodyne_se(const ChannelCoefficients& c, double photons) {
  return spectral_efficiency(Receiver::homodyne(), c, photons);
}

double hadamard_se(const ChannelCoefficients& c, double photons, int order) {
  return spectral_efficiency(Receiver::hadamard(order), c, photons);
}

double shannon_gain_gradient(const ChannelCoefficients& c, double photons, std::size_t i) {
  check_index(c, i);
  const double nu = c.nu();
  const double snr = c.tau() * photons / (1.0 + nu);
  const double dsnr = snr / c.gains[i] * (1.0 - c.beta[i]) / (1.0 + nu);
  return dsnr / ((1.0 + snr) * std::numbers::ln2);
}

double holevo_gain_gradient(const ChannelCoefficients& c, double photons, std::size_t i) {
  check_index(c, i);
  const double nu = c.nu();
  const double beta = c.beta[i];
  const double received = c.tau() * photons + nu;
  if (received == 0.0) return 0.0;  // n = 0 and no noise: vacuum in, vacuum out
  return (log2_f_beta(beta, received) - log2_f_beta(beta, nu)) / c.gains[i];
}

double homodyne_gain_gradient(const ChannelCoefficients& c, double photons, std::size_t i) {
  check_index(c, i);
  const double nu = c.nu();
  const double snr = 4.0 * c.tau() * photons / (1.0 + 2.0 * nu);
  const double dsnr = snr / c.gains[i] * (1.0 - 2.0 * c.beta[i]) / (1.0 + 2.0 * nu);
  return dsnr / ((1.0 + snr) * std::numbers::ln2);
}

std::vector<double> se_gradient(const Receiver& r, const ChannelCoefficients& c, double photons) {
  double (*partial)(const ChannelCoefficients&, double, std::size_t) = nullptr;
  switch (r.kind()) {
    case Receiver::Kind::Heterodyne: partial = &shannon_gain_gradient; break;
    case Receiver::Kind::Holevo: partial = &holevo_gain_gradient; break;
    case Receiver::Kind::Homodyne: partial = &homodyne_gain_gradient; break;
    case Receiver::Kind::Hadamard:
      throw std::invalid_argument("se_gradient: no gain gradient for the Hadamard receiver");
  }
  std::vector<double> out(c.segments());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = partial(c, photons, i);
  return out;
}

}  // namespace qlink
