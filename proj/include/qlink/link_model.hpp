#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace qlink {

/// A fibre link of length L split into K equal segments. Each segment is a
/// pure-loss channel of transmissivity eta = exp(-alpha L / K) followed by a
/// quantum-limited amplifier. The sender transmits at the power cap, so the
/// input photon number n is also n_max.
struct LinkConfig {
  double alpha = 0.05;     // 1/km
  double length_km = 0.0;  // km
  int segments = 1;        // K
  double photons = 0.0;    // n = n_max, photons per pulse

  double eta() const;
  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

/// Amplifier gains G_1..G_K. Indices in the C++ API are 0-based, so gain(i)
/// is G_{i+1} in 1-based notation. The box [1, G_max] and G_K = 1 are not
/// enforced here (finite differences and constraint checks need profiles
/// that step outside it); use validate_for() where they must hold.
class GainProfile {
 public:
  GainProfile() = default;
  explicit GainProfile(std::vector<double> gains);

  /// All gains 1: the unamplified link.
  static GainProfile unity(int segments);
  /// G_i = G_max for i < K and G_K = 1.
  static GainProfile full(const LinkConfig& config);

  std::size_t size() const { return gains_.size(); }
  double operator[](std::size_t i) const { return gains_[i]; }
  double& operator[](std::size_t i) { return gains_[i]; }
  std::span<const double> values() const { return gains_; }
  const std::vector<double>& vector() const { return gains_; }

  /// Throws std::invalid_argument unless size == K, 1 <= G_i <= G_max
  /// (relative slack `rel_tol`) and the last gain is exactly 1.
  void validate_for(const LinkConfig& config, double rel_tol = 1e-9) const;

  bool operator==(const GainProfile&) const = default;

 private:
  std::vector<double> gains_;
};

/// Attenuation/noise bookkeeping of one gain profile.
///
/// Prefix sequences have K+1 entries: tau_prefix[i], nu_prefix[i] describe
/// the field after segment i (tau_0 = 1, nu_0 = 0), so that the energy at
/// that point is tau_i n + nu_i. Suffix sequences also have K+1 entries:
/// tau_suffix[i] = eta^(K-i) prod_{j>i} G_j is the attenuation of the
/// segments after i and nu_suffix[i] = sum_{j>i} (G_j - 1) tau_suffix[j] the
/// noise they add, with tau_suffix[K] = 1 and nu_suffix[K] = 0. Hence
/// tau = tau_suffix[i] tau_i and nu = tau_suffix[i] nu_i + nu_suffix[i].
///
/// beta[j] (0-based amplifier j) is tau_suffix[j+1] - nu_suffix[j+1]; its
/// sign selects the regime of the Holevo gain derivative.
struct ChannelCoefficients {
  double eta = 1.0;
  std::vector<double> gains;
  std::vector<double> tau_prefix;
  std::vector<double> nu_prefix;
  std::vector<double> tau_suffix;
  std::vector<double> nu_suffix;
  std::vector<double> beta;

  std::size_t segments() const { return gains.size(); }
  double tau() const { return tau_prefix.back(); }
  double nu() const { return nu_prefix.back(); }
};

ChannelCoefficients propagate(const LinkConfig& config, const GainProfile& profile);

/// The gain that restores a field of n photons after one lossy segment:
/// (1 + n) / (1 + eta n).
double max_gain(const LinkConfig& config);

struct PowerCheck {
  bool satisfied = true;
  /// 0-based index of the first amplifier output exceeding the cap.
  std::optional<std::size_t> first_violation;
};

/// Checks tau_i n + nu_i <= n (1 + rel_tol) at every amplifier output.
PowerCheck check_power_constraint(const LinkConfig& config,
                                  const ChannelCoefficients& coeffs,
                                  double rel_tol = 1e-9);

/// Exchanges gains i and i+1 (0-based). The last gain is never moved, so
/// i + 1 < K - 1 is required; throws std::out_of_range otherwise.
GainProfile swap_gains(const GainProfile& profile, std::size_t i);

/// End-to-end quantities of a profile computed in one allocation-free pass:
/// the totals tau, nu and both energy functionals.
struct LinkTotals {
  double tau = 1.0;
  double nu = 0.0;
  double energy = 0.0;          // sum (G_i - 1)(eta (tau_{i-1} n + nu_{i-1}) + 1)
  double energy_relaxed = 0.0;  // sum (G_i - 1)(eta n + 1)
};

LinkTotals link_totals(double eta, double photons, std::span<const double> gains);

/// 2x2 row-major matrix; used for the transfer-matrix form of the noise
/// recursion.
struct Mat2 {
  std::array<double, 4> m{1.0, 0.0, 0.0, 1.0};

  double operator()(int r, int c) const { return m[static_cast<std::size_t>(2 * r + c)]; }
  Mat2 operator*(const Mat2& o) const;
  std::array<double, 2> operator*(const std::array<double, 2>& v) const;
};

/// M(G) = [[eta G, G - 1], [0, 1]]: maps (x, 1) to the field after one
/// lossy segment and one amplifier.
Mat2 transfer_matrix(double eta, double gain);
/// D(G) = dM/dG = [[eta, 1], [0, 0]].
Mat2 transfer_matrix_derivative(double eta);

/// nu_k = <M(G_k)...M(G_1) e_2, e_1>, k in [0, K].
double noise_via_transfer_matrices(double eta, std::span<const double> gains, std::size_t k);

}  // namespace qlink
