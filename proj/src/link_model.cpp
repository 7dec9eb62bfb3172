#include "qlink/link_model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace qlink {

double LinkConfig::eta() const {
  return std::exp(-alpha * length_km / static_cast<double>(segments));
}

void LinkConfig::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("LinkConfig: alpha must be >= 0");
  }
  if (!(length_km > 0.0) || !std::isfinite(length_km)) {
    throw std::invalid_argument("LinkConfig: length must be > 0");
  }
  if (segments < 1) {
    throw std::invalid_argument("LinkConfig: segment count must be >= 1");
  }
  if (!(photons >= 0.0) || !std::isfinite(photons)) {
    throw std::invalid_argument("LinkConfig: photon number must be >= 0");
  }
}

GainProfile::GainProfile(std::vector<double> gains) : gains_(std::move(gains)) {
  if (gains_.empty()) throw std::invalid_argument("GainProfile: no gains");
  for (double g : gains_) {
    if (!std::isfinite(g) || g <= 0.0) {
      throw std::invalid_argument("GainProfile: gains must be finite and positive");
    }
  }
}

GainProfile GainProfile::unity(int segments) {
  if (segments < 1) throw std::invalid_argument("GainProfile: segment count must be >= 1");
  return GainProfile(std::vector<double>(static_cast<std::size_t>(segments), 1.0));
}

GainProfile GainProfile::full(const LinkConfig& config) {
  config.validate();
  std::vector<double> gains(static_cast<std::size_t>(config.segments), max_gain(config));
  gains.back() = 1.0;
  return GainProfile(std::move(gains));
}

void GainProfile::validate_for(const LinkConfig& config, double rel_tol) const {
  if (gains_.size() != static_cast<std::size_t>(config.segments)) {
    throw std::invalid_argument("GainProfile: expected " + std::to_string(config.segments) +
                                " gains, got " + std::to_string(gains_.size()));
  }
  const double g_max = max_gain(config);
  for (std::size_t i = 0; i < gains_.size(); ++i) {
    if (gains_[i] < 1.0 - rel_tol || gains_[i] > g_max * (1.0 + rel_tol)) {
      throw std::invalid_argument("GainProfile: gain " + std::to_string(i) +
                                  " outside [1, G_max]");
    }
  }
  if (gains_.back() != 1.0) {
    throw std::invalid_argument("GainProfile: the last amplifier must have gain 1");
  }
}

ChannelCoefficients propagate(const LinkConfig& config, const GainProfile& profile) {
  const auto k = static_cast<std::size_t>(config.segments);
  if (profile.size() != k) {
    throw std::invalid_argument("propagate: profile has " + std::to_string(profile.size()) +
                                " gains for " + std::to_string(k) + " segments");
  }
  ChannelCoefficients c;
  c.eta = config.eta();
  c.gains = profile.vector();
  c.tau_prefix.resize(k + 1);
  c.nu_prefix.resize(k + 1);
  c.tau_suffix.resize(k + 1);
  c.nu_suffix.resize(k + 1);
  c.beta.resize(k);

  c.tau_prefix[0] = 1.0;
  c.nu_prefix[0] = 0.0;
  for (std::size_t i = 1; i <= k; ++i) {
    const double g = c.gains[i - 1];
    c.tau_prefix[i] = g * c.eta * c.tau_prefix[i - 1];
    c.nu_prefix[i] = g * c.eta * c.nu_prefix[i - 1] + g - 1.0;
  }

  c.tau_suffix[k] = 1.0;
  c.nu_suffix[k] = 0.0;
  for (std::size_t i = k; i-- > 0;) {
    const double g = c.gains[i];  // G_{i+1}
    c.tau_suffix[i] = c.eta * g * c.tau_suffix[i + 1];
    c.nu_suffix[i] = c.nu_suffix[i + 1] + (g - 1.0) * c.tau_suffix[i + 1];
  }
  for (std::size_t j = 0; j < k; ++j) {
    c.beta[j] = c.tau_suffix[j + 1] - c.nu_suffix[j + 1];
  }
  return c;
}

double max_gain(const LinkConfig& config) {
  const double n = config.photons;
  return (1.0 + n) / (1.0 + config.eta() * n);
}

PowerCheck check_power_constraint(const LinkConfig& config, const ChannelCoefficients& coeffs,
                                  double rel_tol) {
  const double cap = config.photons * (1.0 + rel_tol);
  for (std::size_t i = 1; i < coeffs.tau_prefix.size(); ++i) {
    const double field = coeffs.tau_prefix[i] * config.photons + coeffs.nu_prefix[i];
    if (field > cap) return {false, i - 1};
  }
  return {};
}

GainProfile swap_gains(const GainProfile& profile, std::size_t i) {
  if (i + 2 >= profile.size()) {
    throw std::out_of_range("swap_gains: index " + std::to_string(i) +
                            " would move the last gain or is out of range");
  }
  std::vector<double> g = profile.vector();
  std::swap(g[i], g[i + 1]);
  return GainProfile(std::move(g));
}

LinkTotals link_totals(double eta, double photons, std::span<const double> gains) {
  LinkTotals t;
  const double relaxed_cost = eta * photons + 1.0;
  for (double g : gains) {
    t.energy += (g - 1.0) * (eta * (t.tau * photons + t.nu) + 1.0);
    t.energy_relaxed += (g - 1.0) * relaxed_cost;
    t.tau = g * eta * t.tau;
    t.nu = g * eta * t.nu + g - 1.0;
  }
  return t;
}

Mat2 Mat2::operator*(const Mat2& o) const {
  Mat2 r;
  for (int row = 0; row < 2; ++row) {
    for (int col = 0; col < 2; ++col) {
      r.m[static_cast<std::size_t>(2 * row + col)] =
          (*this)(row, 0) * o(0, col) + (*this)(row, 1) * o(1, col);
    }
  }
  return r;
}

std::array<double, 2> Mat2::operator*(const std::array<double, 2>& v) const {
  return {m[0] * v[0] + m[1] * v[1], m[2] * v[0] + m[3] * v[1]};
}

Mat2 transfer_matrix(double eta, double gain) { return Mat2{{eta * gain, gain - 1.0, 0.0, 1.0}}; }

Mat2 transfer_matrix_derivative(double eta) { return Mat2{{eta, 1.0, 0.0, 0.0}}; }

double noise_via_transfer_matrices(double eta, std::span<const double> gains, std::size_t k) {
  if (k > gains.size()) throw std::out_of_range("noise_via_transfer_matrices: k > K");
  Mat2 product;
  for (std::size_t i = 0; i < k; ++i) product = transfer_matrix(eta, gains[i]) * product;
  return (product * std::array<double, 2>{0.0, 1.0})[0];
}

}  // namespace qlink
