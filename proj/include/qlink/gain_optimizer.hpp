#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "qlink/link_model.hpp"
#include "qlink/spectral_efficiency.hpp"

namespace qlink {

/// Amplifier energy accounting. Exact charges each amplifier for the photons
/// it adds to its actual input; Relaxed charges every amplifier as if its
/// input sat at the power cap, which makes the cost per unit gain constant.
enum class EnergyModel { Exact, Relaxed };

std::string to_string(EnergyModel model);

/// E = sum_i (G_i - 1)(eta (tau_{i-1} n + nu_{i-1}) + 1).
double energy(const LinkConfig& config, const GainProfile& profile);
/// E' = sum_i (G_i - 1)(eta n + 1).
double energy_relaxed(const LinkConfig& config, const GainProfile& profile);
double energy(const LinkConfig& config, const GainProfile& profile, EnergyModel model);

/// dE/dG_i for every gain. The last component is always 0 because G_K is
/// pinned to 1. The exact model propagates D(G_i) = dM/dG through the
/// transfer matrices of the downstream amplifiers.
std::vector<double> energy_gradient(const LinkConfig& config, const GainProfile& profile,
                                    EnergyModel model);

/// Energy of the fully amplified link, (K - 1)(1 - eta) n.
double baseline_energy(const LinkConfig& config);

/// Shannon SE of the fully amplified link,
/// log2(1 + tau_max n / (1 + (eta - tau_max) n)), tau_max = eta^K G_max^(K-1),
/// evaluated in a form that stays accurate for K in the 1e5 range.
double optimal_shannon_se(const LinkConfig& config);

struct SolverOptions {
  int stage_budget = 30;         // step scales (G_max - 1) 2^-s, s = 1 .. budget-1
  int outer_rounds = 10;
  double convergence_tol = 1e-9; // relative objective change over one round
  double se_slack = 1e-12;       // constraint accepted at target (1 - slack)
  double min_rel_decrease = 1e-12;  // smaller energy decreases count as rejections
  int max_steps_per_stage = 20000;
};

struct OptimizationResult {
  GainProfile gains;
  double se_achieved = 0.0;
  double se_target = 0.0;
  double energy = 0.0;        // in the model that was optimised
  double energy_exact = 0.0;  // always the exact model
  double baseline_energy = 0.0;
  double savings_fraction = 0.0;  // 1 - energy_exact / baseline_energy, 0 if no baseline
  bool converged = false;
  bool infeasible = false;
  int iterations = 0;
};

/// Minimise energy subject to SE(receiver) >= target over 1 <= G_i <= G_max,
/// G_K = 1.
struct EgsProblem {
  LinkConfig config;
  double target_se = 0.0;
  EnergyModel model = EnergyModel::Exact;
  Receiver receiver = Receiver::holevo();
  SolverOptions options;

  double max_gain() const { return qlink::max_gain(config); }
  double threshold() const { return target_se * (1.0 - options.se_slack); }
  double objective(const GainProfile& profile) const;
  double constraint(const GainProfile& profile) const;
  bool feasible(const GainProfile& profile) const { return constraint(profile) >= threshold(); }
};

/// Validates the inputs; the target defaults to optimal_shannon_se(config).
EgsProblem make_egs_problem(const LinkConfig& config, std::optional<double> target_se,
                            EnergyModel model, const Receiver& receiver,
                            const SolverOptions& options = {});

/// What a descent stage did. `step_sizes` holds the step size of every
/// attempted move, `energies` the objective after every accepted one.
struct StageTrace {
  int accepted = 0;
  std::vector<double> step_sizes;
  std::vector<double> energies;
};

/// Walks down -grad E / |grad E| with step (G_max - 1) 2^-s, halving the step
/// on every rejected move and stopping once s reaches `budget`. A move is
/// accepted when the projected point keeps the SE constraint and lowers the
/// objective.
GainProfile energy_gradient_stage(const EgsProblem& problem, GainProfile start, int budget,
                                  StageTrace* trace = nullptr);

/// Same step schedule, moving along the energy gradient projected onto the
/// tangent plane of the SE level set. A tangential move that leaves the
/// feasible set is pulled back along grad SE by the shortest distance that
/// restores the constraint.
GainProfile spectral_surface_stage(const EgsProblem& problem, GainProfile start, int budget,
                                   StageTrace* trace = nullptr);

/// Full amplification, which is optimal for heterodyne detection.
OptimizationResult segs_shannon(const LinkConfig& config);

/// Maximises the Holevo SE over non-increasing profiles by projected
/// gradient ascent started from every on-off profile.
OptimizationResult segs_holevo(const LinkConfig& config, const SolverOptions& options = {});

/// Energy-optimal gain selection. With EnergyModel::Relaxed this is the
/// relaxed problem; `energy_exact` and the savings always use the exact
/// model. An unreachable target yields the full profile with
/// infeasible = true and zero savings.
OptimizationResult solve_egs(const LinkConfig& config, std::optional<double> target_se,
                             EnergyModel model, const Receiver& receiver = Receiver::holevo(),
                             const SolverOptions& options = {}, StageTrace* trace = nullptr);

OptimizationResult solve_homodyne_egs(const LinkConfig& config,
                                      std::optional<double> target_se = std::nullopt,
                                      EnergyModel model = EnergyModel::Exact,
                                      const SolverOptions& options = {});

struct GridSearchResult {
  bool found = false;
  GainProfile gains;
  double value = 0.0;
  std::size_t evaluated = 0;
};

/// Exhaustive search over the lattice 1 + j (G_max - 1) / resolution for
/// every free gain. Throws std::invalid_argument when the lattice would
/// exceed 1e8 points.
GridSearchResult grid_search_egs(const EgsProblem& problem, int resolution,
                                 bool non_increasing_only = false);

/// Exhaustive maximisation of the SE on the same lattice.
GridSearchResult grid_search_segs(const LinkConfig& config, const Receiver& receiver,
                                  int resolution);

}  // namespace qlink
