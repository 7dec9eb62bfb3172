#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "oracles.hpp"
#include "qlink/quantum_limit.hpp"
#include "qlink/spectral_efficiency.hpp"
#include "qlink/units.hpp"

using namespace qlink;
using namespace qlink::quantum_limit;
using oracle::rel_err;

namespace {
const double kFlux = units::photon_flux(1e-3, 1550e-9);
const double kTau = std::exp(-0.05 * 185.0);
}  // namespace

TEST_CASE("single-symbol rate") {
  CHECK(rate_ossr(0.0, kTau, 0.0, 1e12) == 0.0);
  CHECK(rel_err(kTau * kFlux, 7.5e11) < 0.01);
  CHECK(rel_err(rate_ossr(kFlux, kTau, 0.0, 1.8e13), 1.06e12) < 0.01);
  const double bound = ossr_bound(kFlux, kTau, 0.0);
  CHECK(rel_err(bound, 1.083e12) < 0.002);
  CHECK(rate_ossr(kFlux, kTau, 0.0, 1e18) < bound);
  CHECK(rel_err(rate_ossr(kFlux, kTau, 0.0, 1e18), bound) < 1e-5);
}

TEST_CASE("single-symbol rate saturates monotonically") {
  for (double nu : {0.0, 0.5, 3.0}) {
    const double bound = ossr_bound(kFlux, kTau, nu);
    double prev = 0.0;
    for (double b : log_spaced(1e6, 1e17, 400)) {
      const double r = rate_ossr(kFlux, kTau, nu, b);
      CHECK(r < bound);
      CHECK(r > prev);
      prev = r;
    }
  }
}

TEST_CASE("joint-detection rate") {
  CHECK(rate_ojdr(0.0, kTau, 0.0, 1e12) == 0.0);
  const double r = rate_ojdr(kFlux, kTau, 0.0, 1.8e13);
  CHECK(rel_err(r, 4.54e12) < 0.01);
  CHECK(std::abs(r / 4.3e12 - 1.0) < 0.10);
  CHECK(rel_err(rate_ojdr(kFlux, kTau, 1.0, 1e16), kFlux * kTau) < 0.01);
  CHECK(rel_err(ojdr_asymptote(kFlux, kTau, 1.0), kFlux * kTau) < 1e-15);
  CHECK(std::isinf(ojdr_asymptote(kFlux, kTau, 0.0)));
  // Unbounded growth at zero noise.
  CHECK(rate_ojdr(kFlux, kTau, 0.0, 1e17) > 2.0 * rate_ojdr(kFlux, kTau, 0.0, 1e13));
}

TEST_CASE("joint detection dominates single-symbol detection") {
  for (double nu : {0.0, 0.1, 2.0}) {
    for (double b : log_spaced(1e6, 1e17, 300))
      CHECK(rate_ojdr(kFlux, kTau, nu, b) >= rate_ossr(kFlux, kTau, nu, b));
  }
}

TEST_CASE("noise fixed per second") {
  for (double b : {1e10, 1e13, 1e15})
    CHECK(rel_err(rate_ojdr_noise_flux(kFlux, kTau, 0.0, b), rate_ojdr(kFlux, kTau, 0.0, b)) <
          1e-12);
  CHECK(rate_ojdr_noise_flux(0.0, kTau, 1e11, 1e13) == 0.0);

  const double noise = kTau * kFlux;
  auto eps = [&](double b) {
    return rate_ojdr_noise_flux(kFlux, kTau, noise, b) - ojdr_log_asymptote(kFlux, kTau, noise, b);
  };
  const double e13 = eps(1e13), e14 = eps(1e14), e15 = eps(1e15), e16 = eps(1e16);
  CHECK(std::abs(e14 - e13) > std::abs(e15 - e14));
  CHECK(std::abs(e15 - e14) > std::abs(e16 - e15));
}

TEST_CASE("scaled entropy identity") {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 2000; ++t) {
    const double x = std::pow(10.0, 18.0 * u(rng) - 3.0);
    const double b = std::pow(10.0, 18.0 * u(rng));
    const double lhs = b * thermal_entropy(x / b);
    const double rhs = (x * std::log1p(b / x) + b * std::log1p(x / b)) / std::log(2.0);
    CHECK(rel_err(lhs, rhs) < 1e-12);
    CHECK(rel_err(scaled_entropy(x, b), lhs) < 1e-12);
  }
}

TEST_CASE("Hadamard receiver rates") {
  const double b = 1.8e13;
  CHECK(rel_err(rate_hadamard(kFlux, kTau, b, 4), 1.3799e12) < 0.01);
  CHECK(rel_err(rate_hadamard(kFlux, kTau, b, 8), 1.91191e12) < 0.01);
  CHECK(rel_err(rate_hadamard(kFlux, kTau, b, 16), 2.18987e12) < 0.01);
  CHECK(rel_err(rate_hadamard(kFlux, kTau, b, 32), 2.0744e12) < 0.01);
  CHECK(rate_hadamard(0.0, kTau, b, 8) == 0.0);
  CHECK_THROWS_AS(rate_hadamard(kFlux, kTau, b, 1), std::domain_error);
  CHECK_THROWS_AS(rate_hadamard(kFlux, kTau, b, 12), std::domain_error);
  for (int k : {2, 4, 8, 16, 32, 64})
    for (double bb : log_spaced(1e9, 1e15, 200))
      CHECK(rate_hadamard(kFlux, kTau, bb, k) <= rate_ojdr(kFlux, kTau, 0.0, bb));
}

TEST_CASE("quantum-limit crossover") {
  const auto b = quantum_limit_crossover(kFlux, kTau, 0.0);
  REQUIRE(b.has_value());
  CHECK(std::abs(*b / 0.44e12 - 1.0) < 0.10);

  // Dense scan oracle: first of 1e5 log-spaced points past the bound.
  const double bound = ossr_bound(kFlux, kTau, 0.0);
  const auto grid = log_spaced(1e9, 1e15, 100000);
  double first = 0.0, last_below = 0.0;
  for (double x : grid) {
    if (rate_ojdr(kFlux, kTau, 0.0, x) >= bound) {
      first = x;
      break;
    }
    last_below = x;
  }
  REQUIRE(first > 0.0);
  CHECK(*b >= last_below * (1.0 - 1e-6));
  CHECK(*b <= first * (1.0 + 1e-6));

  for (double tn : {1e3, 1e9, 1e14}) CHECK(quantum_limit_crossover(tn, 1.0, 0.0).has_value());
  CrossoverOptions narrow;
  narrow.upper = 1e6;
  CHECK_FALSE(quantum_limit_crossover(kFlux, kTau, 0.0, narrow).has_value());
}

TEST_CASE("baud scans") {
  const auto bauds = log_spaced(1e9, 1e15, 50);
  REQUIRE(bauds.size() == 50);
  CHECK(bauds.front() == doctest::Approx(1e9));
  CHECK(bauds.back() == doctest::Approx(1e15));

  const auto pp = baud_scan(kFlux, kTau, 0.0, NoiseConvention::PerPulse, bauds);
  REQUIRE(pp.rates_ossr.size() == 50);
  REQUIRE(pp.rates_ojdr.size() == 50);
  for (std::size_t j = 0; j < bauds.size(); ++j) {
    CHECK(pp.rates_ossr[j] <= ossr_bound(kFlux, kTau, 0.0));
    if (j) CHECK(pp.rates_ojdr[j] >= pp.rates_ojdr[j - 1]);
  }

  const double noise = 1e11;
  const auto ps = baud_scan(kFlux, kTau, noise, NoiseConvention::PerSecond, bauds);
  for (std::size_t j = 0; j < bauds.size(); ++j) {
    CHECK(rel_err(ps.rates_ossr[j], rate_ossr(kFlux, kTau, noise / bauds[j], bauds[j])) < 1e-15);
    CHECK(rel_err(ps.rates_ojdr[j], rate_ojdr_noise_flux(kFlux, kTau, noise, bauds[j])) < 1e-15);
  }
}
