#include "qlink/gain_optimizer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <utility>

namespace qlink {

namespace {

using Vec = std::vector<double>;

// Gains within this distance (relative to G_max - 1) of a bound count as
// sitting on it.
constexpr double kBoundTol = 1e-12;

// Scales `v` to unit length. Infinite components dominate: the direction
// becomes their signs. Returns false for a zero (or NaN) vector.
bool normalize(Vec& v) {
  const bool any_inf = std::any_of(v.begin(), v.end(), [](double x) { return std::isinf(x); });
  if (any_inf) {
    for (double& x : v) x = std::isinf(x) ? std::copysign(1.0, x) : 0.0;
  }
  const double norm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
  if (!(norm > 0.0) || !std::isfinite(norm)) return false;
  for (double& x : v) x /= norm;
  return true;
}

// Zeroes the components of `dir` that would push a gain already on a bound
// out of [1, g_max] when moving by +dir.
void mask_at_bounds(Vec& dir, const GainProfile& g, double g_max) {
  const double tol = kBoundTol * std::max(g_max - 1.0, 1.0);
  for (std::size_t i = 0; i < dir.size(); ++i) {
    if ((g[i] <= 1.0 + tol && dir[i] < 0.0) || (g[i] >= g_max - tol && dir[i] > 0.0)) dir[i] = 0.0;
  }
}

// g + t * dir on the free gains, projected onto the box. G_K stays 1.
GainProfile moved(const GainProfile& g, const Vec& dir, double t, double g_max) {
  std::vector<double> out = g.vector();
  for (std::size_t i = 0; i < dir.size(); ++i) {
    out[i] = std::clamp(out[i] + t * dir[i], 1.0, g_max);
  }
  out.back() = 1.0;
  return GainProfile(std::move(out));
}

Vec free_part(Vec full) {
  full.pop_back();
  return full;
}

double dot(const Vec& a, const Vec& b) { return std::inner_product(a.begin(), a.end(), b.begin(), 0.0); }

double step_size(double g_max, int s) { return (g_max - 1.0) * std::ldexp(1.0, -s); }

// Unit ascent direction of the constraint functional at `g`, masked at the
// box. Returns false when no admissible ascent direction exists.
bool constraint_ascent(const EgsProblem& p, const GainProfile& g, Vec& out) {
  const auto coeffs = propagate(p.config, g);
  out = free_part(se_gradient(p.receiver, coeffs, p.config.photons));
  mask_at_bounds(out, g, p.max_gain());
  return normalize(out);
}

// Unit descent direction (to be subtracted) of the objective.
bool objective_descent(const EgsProblem& p, const GainProfile& g, Vec& out) {
  out = free_part(energy_gradient(p.config, g, p.model));
  for (double& x : out) x = -x;
  mask_at_bounds(out, g, p.max_gain());
  for (double& x : out) x = -x;
  return normalize(out);
}

// Shared accept/halve loop of the two descent stages. `propose` maps the
// current point and step to a candidate or nullopt.
GainProfile run_stage(const EgsProblem& p, GainProfile g, int budget, StageTrace* trace,
                      const std::function<std::optional<GainProfile>(const GainProfile&, double)>& propose) {
  const double g_max = p.max_gain();
  double e = p.objective(g);
  int s = 1;
  int attempts = 0;
  while (s < budget && attempts < p.options.max_steps_per_stage) {
    ++attempts;
    const double step = step_size(g_max, s);
    if (trace) trace->step_sizes.push_back(step);
    const auto cand = propose(g, step);
    if (!cand) break;
    if (p.feasible(*cand)) {
      const double ec = p.objective(*cand);
      if (ec < e * (1.0 - p.options.min_rel_decrease)) {
        g = *cand;
        e = ec;
        if (trace) {
          ++trace->accepted;
          trace->energies.push_back(e);
        }
        continue;
      }
    }
    ++s;
  }
  return g;
}

void check_free_gains(const EgsProblem& p, const GainProfile& g) {
  if (g.size() != static_cast<std::size_t>(p.config.segments)) {
    throw std::invalid_argument("descent stage: profile length does not match the link");
  }
}

OptimizationResult finish(const EgsProblem& p, GainProfile g) {
  OptimizationResult r;
  r.se_target = p.target_se;
  r.se_achieved = p.constraint(g);
  r.energy = p.objective(g);
  r.energy_exact = energy(p.config, g);
  r.baseline_energy = baseline_energy(p.config);
  r.savings_fraction = r.baseline_energy > 0.0 ? 1.0 - r.energy_exact / r.baseline_energy : 0.0;
  r.gains = std::move(g);
  return r;
}

}  // namespace

std::string to_string(EnergyModel model) {
  return model == EnergyModel::Exact ? "exact" : "relaxed";
}

double energy(const LinkConfig& config, const GainProfile& profile) {
  return link_totals(config.eta(), config.photons, profile.values()).energy;
}

double energy_relaxed(const LinkConfig& config, const GainProfile& profile) {
  return link_totals(config.eta(), config.photons, profile.values()).energy_relaxed;
}

double energy(const LinkConfig& config, const GainProfile& profile, EnergyModel model) {
  return model == EnergyModel::Exact ? energy(config, profile) : energy_relaxed(config, profile);
}

std::vector<double> energy_gradient(const LinkConfig& config, const GainProfile& profile,
                                    EnergyModel model) {
  const auto k = static_cast<std::size_t>(config.segments);
  if (profile.size() != k) throw std::invalid_argument("energy_gradient: profile length mismatch");
  const double eta = config.eta();
  const double n = config.photons;
  std::vector<double> grad(k, 0.0);
  if (model == EnergyModel::Relaxed) {
    std::fill(grad.begin(), grad.end() - 1, eta * n + 1.0);
    return grad;
  }

  // state[i] = M(G_i)...M(G_1) (n, 1): its first entry is the field
  // tau_i n + nu_i after segment i.
  std::vector<std::array<double, 2>> state(k + 1);
  state[0] = {n, 1.0};
  for (std::size_t i = 0; i < k; ++i) state[i + 1] = transfer_matrix(eta, profile[i]) * state[i];

  const Mat2 d = transfer_matrix_derivative(eta);
  for (std::size_t i = 0; i + 1 < k; ++i) {
    // w = d state_j / d G_{i+1} for j = i+1, i+2, ...
    std::array<double, 2> w = d * state[i];
    double g = w[0];  // eta (tau_i n + nu_i) + 1
    for (std::size_t j = i + 1; j < k; ++j) {
      g += (profile[j] - 1.0) * eta * w[0];
      w = transfer_matrix(eta, profile[j]) * w;
    }
    grad[i] = g;
  }
  return grad;
}

double baseline_energy(const LinkConfig& config) {
  return static_cast<double>(config.segments - 1) * (-std::expm1(-config.alpha * config.length_km /
                                                                  config.segments)) *
         config.photons;
}

double optimal_shannon_se(const LinkConfig& config) {
  config.validate();
  const double n = config.photons;
  const double loss = config.alpha * config.length_km / config.segments;
  const double eta = std::exp(-loss);
  const double one_minus_eta = -std::expm1(-loss);
  // r = eta G_max = 1 - (1 - eta) / (1 + eta n); tau_max = eta r^(K-1).
  const double log_r = std::log1p(-one_minus_eta / (1.0 + eta * n));
  const double powered = static_cast<double>(config.segments - 1) * log_r;
  const double signal = eta * std::exp(powered) * n;
  const double noise = -eta * std::expm1(powered) * n;  // (eta - tau_max) n
  return std::log1p(signal / (1.0 + noise)) / std::numbers::ln2;
}

double EgsProblem::objective(const GainProfile& profile) const {
  const auto t = link_totals(config.eta(), config.photons, profile.values());
  return model == EnergyModel::Exact ? t.energy : t.energy_relaxed;
}

double EgsProblem::constraint(const GainProfile& profile) const {
  const auto t = link_totals(config.eta(), config.photons, profile.values());
  return spectral_efficiency(receiver, t.tau, t.nu, config.photons);
}

EgsProblem make_egs_problem(const LinkConfig& config, std::optional<double> target_se,
                            EnergyModel model, const Receiver& receiver,
                            const SolverOptions& options) {
  config.validate();
  if (receiver.kind() == Receiver::Kind::Hadamard) {
    throw std::invalid_argument("EGS: the Hadamard receiver has no gain gradient");
  }
  if (options.stage_budget < 1 || options.outer_rounds < 1) {
    throw std::invalid_argument("EGS: iteration budgets must be positive");
  }
  EgsProblem p;
  p.config = config;
  p.target_se = target_se.value_or(optimal_shannon_se(config));
  if (!(p.target_se >= 0.0) || !std::isfinite(p.target_se)) {
    throw std::invalid_argument("EGS: target SE must be finite and >= 0");
  }
  p.model = model;
  p.receiver = receiver;
  p.options = options;
  return p;
}

GainProfile energy_gradient_stage(const EgsProblem& p, GainProfile start, int budget,
                                  StageTrace* trace) {
  check_free_gains(p, start);
  const double g_max = p.max_gain();
  return run_stage(p, std::move(start), budget, trace,
                   [&](const GainProfile& g, double step) -> std::optional<GainProfile> {
                     Vec x;
                     if (!objective_descent(p, g, x)) return std::nullopt;
                     return moved(g, x, -step, g_max);
                   });
}

GainProfile spectral_surface_stage(const EgsProblem& p, GainProfile start, int budget,
                                   StageTrace* trace) {
  check_free_gains(p, start);
  const double g_max = p.max_gain();
  const double threshold = p.threshold();
  return run_stage(
      p, std::move(start), budget, trace,
      [&](const GainProfile& g, double step) -> std::optional<GainProfile> {
        const auto coeffs = propagate(p.config, g);
        const Vec e_raw = free_part(energy_gradient(p.config, g, p.model));
        const Vec s_raw = free_part(se_gradient(p.receiver, coeffs, p.config.photons));
        // Active-set projection: gains pinned at a bound are dropped from
        // both gradients before projecting, until the resulting move keeps
        // every remaining gain inside the box.
        const double tol = kBoundTol * std::max(g_max - 1.0, 1.0);
        std::vector<bool> pinned(e_raw.size(), false);
        Vec x(e_raw.size());
        for (std::size_t pass = 0; pass <= e_raw.size(); ++pass) {
          Vec e_dir = e_raw, s_dir = s_raw;
          for (std::size_t i = 0; i < x.size(); ++i) {
            if (pinned[i]) e_dir[i] = s_dir[i] = 0.0;
          }
          if (!normalize(e_dir)) return std::nullopt;
          const double overlap = normalize(s_dir) ? dot(s_dir, e_dir) : 0.0;
          for (std::size_t i = 0; i < x.size(); ++i) x[i] = -(e_dir[i] - overlap * s_dir[i]);
          bool grew = false;
          for (std::size_t i = 0; i < x.size(); ++i) {
            if (pinned[i]) continue;
            if ((g[i] <= 1.0 + tol && x[i] < 0.0) || (g[i] >= g_max - tol && x[i] > 0.0)) {
              pinned[i] = true;
              grew = true;
            }
          }
          if (!grew) break;
        }
        for (double& v : x) v = -v;
        const double norm = std::sqrt(dot(x, x));
        if (!(norm > 1e-14)) return std::nullopt;  // grad E parallel to grad SE

        GainProfile cand = moved(g, x, -step, g_max);
        if (p.constraint(cand) >= threshold) return cand;

        Vec up;
        if (!constraint_ascent(p, cand, up)) return cand;
        if (p.constraint(moved(cand, up, step, g_max)) < threshold) return cand;
        double lo = 0.0;
        double hi = step;
        for (int it = 0; it < 60; ++it) {
          const double mid = 0.5 * (lo + hi);
          if (p.constraint(moved(cand, up, mid, g_max)) >= threshold) {
            hi = mid;
          } else {
            lo = mid;
          }
        }
        return moved(cand, up, hi, g_max);
      });
}

OptimizationResult segs_shannon(const LinkConfig& config) {
  config.validate();
  OptimizationResult r;
  r.gains = GainProfile::full(config);
  r.se_achieved = optimal_shannon_se(config);
  r.se_target = r.se_achieved;
  r.energy = energy(config, r.gains);
  r.energy_exact = r.energy;
  r.baseline_energy = baseline_energy(config);
  r.savings_fraction = 0.0;
  r.converged = true;
  return r;
}

OptimizationResult segs_holevo(const LinkConfig& config, const SolverOptions& options) {
  config.validate();
  const auto k = static_cast<std::size_t>(config.segments);
  const double g_max = max_gain(config);
  const double n = config.photons;
  const double eta = config.eta();
  auto se = [&](const GainProfile& g) {
    const auto t = link_totals(eta, n, g.values());
    return spectral_efficiency(Receiver::holevo(), t.tau, t.nu, n);
  };

  GainProfile best = GainProfile::unity(config.segments);
  double best_se = se(best);
  int iterations = 0;
  // Start from each on-off profile: the first m amplifiers at G_max.
  for (std::size_t m = 1; m < k; ++m) {
    std::vector<double> init(k, 1.0);
    std::fill(init.begin(), init.begin() + static_cast<std::ptrdiff_t>(m), g_max);
    GainProfile g(std::move(init));
    double value = se(g);
    int s = 1;
    int attempts = 0;
    while (s < options.stage_budget && attempts < options.max_steps_per_stage) {
      ++attempts;
      ++iterations;
      Vec dir = free_part(se_gradient(Receiver::holevo(), propagate(config, g), n));
      mask_at_bounds(dir, g, g_max);
      if (!normalize(dir)) break;
      GainProfile cand = moved(g, dir, step_size(g_max, s), g_max);
      std::vector<double> sorted = cand.vector();
      std::sort(sorted.begin(), sorted.end() - 1, std::greater<>());
      cand = GainProfile(std::move(sorted));
      const double cv = se(cand);
      if (cv > value) {
        g = std::move(cand);
        value = cv;
      } else {
        ++s;
      }
    }
    if (value > best_se) {
      best_se = value;
      best = std::move(g);
    }
  }

  OptimizationResult r;
  r.gains = best;
  r.se_achieved = best_se;
  r.se_target = optimal_shannon_se(config);
  r.energy = energy(config, best);
  r.energy_exact = r.energy;
  r.baseline_energy = baseline_energy(config);
  r.savings_fraction = r.baseline_energy > 0.0 ? 1.0 - r.energy_exact / r.baseline_energy : 0.0;
  r.converged = true;
  r.iterations = iterations;
  return r;
}

OptimizationResult solve_egs(const LinkConfig& config, std::optional<double> target_se,
                             EnergyModel model, const Receiver& receiver,
                             const SolverOptions& options, StageTrace* trace) {
  const EgsProblem p = make_egs_problem(config, target_se, model, receiver, options);

  GainProfile unity = GainProfile::unity(config.segments);
  if (p.feasible(unity)) {
    auto r = finish(p, std::move(unity));
    r.converged = true;
    return r;
  }
  GainProfile g = GainProfile::full(config);
  if (config.segments == 1 || !p.feasible(g)) {
    auto r = finish(p, std::move(g));
    r.infeasible = true;
    r.savings_fraction = 0.0;
    return r;
  }

  double e = p.objective(g);
  bool converged = false;
  int rounds = 0;
  while (rounds < options.outer_rounds) {
    ++rounds;
    const double before = e;
    g = energy_gradient_stage(p, std::move(g), options.stage_budget, trace);
    g = spectral_surface_stage(p, std::move(g), options.stage_budget, trace);
    e = p.objective(g);
    if (std::abs(before - e) <= options.convergence_tol * std::max(before, 1e-300)) {
      converged = true;
      break;
    }
  }
  auto r = finish(p, std::move(g));
  r.converged = converged;
  r.iterations = rounds;
  return r;
}

OptimizationResult solve_homodyne_egs(const LinkConfig& config, std::optional<double> target_se,
                                      EnergyModel model, const SolverOptions& options) {
  return solve_egs(config, target_se, model, Receiver::homodyne(), options);
}

namespace {

// Visits every lattice point of the K-1 free gains; `visit` gets the full
// gain vector (last entry 1).
template <typename Visit>
std::size_t for_each_lattice_point(const LinkConfig& config, int resolution, bool non_increasing,
                                   Visit&& visit) {
  if (resolution < 1) throw std::invalid_argument("grid search: resolution must be >= 1");
  const auto k = static_cast<std::size_t>(config.segments);
  const std::size_t free = k - 1;
  const double per_axis = resolution + 1.0;
  if (std::pow(per_axis, static_cast<double>(free)) > 1e8) {
    throw std::invalid_argument("grid search: lattice too large");
  }
  const double g_max = max_gain(config);
  std::vector<double> axis(static_cast<std::size_t>(resolution) + 1);
  for (std::size_t j = 0; j < axis.size(); ++j) {
    axis[j] = 1.0 + (g_max - 1.0) * static_cast<double>(j) / resolution;
  }
  axis.back() = g_max;

  std::vector<std::size_t> idx(free, 0);
  std::vector<double> gains(k, 1.0);
  std::size_t visited = 0;
  while (true) {
    bool admissible = true;
    if (non_increasing) {
      for (std::size_t i = 1; i < free; ++i) {
        if (idx[i] > idx[i - 1]) {
          admissible = false;
          break;
        }
      }
    }
    if (admissible) {
      for (std::size_t i = 0; i < free; ++i) gains[i] = axis[idx[i]];
      visit(std::as_const(gains));
      ++visited;
    }
    std::size_t d = free;
    while (d > 0) {
      --d;
      if (++idx[d] < axis.size()) break;
      idx[d] = 0;
      if (d == 0) return visited;
    }
    if (free == 0) return visited;
  }
}

}  // namespace

GridSearchResult grid_search_egs(const EgsProblem& p, int resolution, bool non_increasing_only) {
  GridSearchResult r;
  const double eta = p.config.eta();
  const double n = p.config.photons;
  const double threshold = p.threshold();
  std::vector<double> best;
  r.value = std::numeric_limits<double>::infinity();
  r.evaluated = for_each_lattice_point(
      p.config, resolution, non_increasing_only, [&](const std::vector<double>& gains) {
        const auto t = link_totals(eta, n, gains);
        const double e = p.model == EnergyModel::Exact ? t.energy : t.energy_relaxed;
        if (e >= r.value) return;
        if (spectral_efficiency(p.receiver, t.tau, t.nu, n) >= threshold) {
          r.value = e;
          best = gains;
        }
      });
  if (!best.empty()) {
    r.found = true;
    r.gains = GainProfile(std::move(best));
  }
  return r;
}

GridSearchResult grid_search_segs(const LinkConfig& config, const Receiver& receiver,
                                  int resolution) {
  config.validate();
  GridSearchResult r;
  const double eta = config.eta();
  const double n = config.photons;
  std::vector<double> best;
  r.value = -std::numeric_limits<double>::infinity();
  r.evaluated = for_each_lattice_point(config, resolution, false,
                                       [&](const std::vector<double>& gains) {
                                         const auto t = link_totals(eta, n, gains);
                                         const double s =
                                             spectral_efficiency(receiver, t.tau, t.nu, n);
                                         if (s > r.value) {
                                           r.value = s;
                                           best = gains;
                                         }
                                       });
  r.found = !best.empty();
  if (r.found) r.gains = GainProfile(std::move(best));
  return r;
}

}  // namespace qlink
