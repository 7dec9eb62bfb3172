// qlink command-line front end.
//
// Exit codes: 0 success, 1 invalid input, 2 I/O failure.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qlink/continuous_limit.hpp"
#include "qlink/gain_optimizer.hpp"
#include "qlink/link_model.hpp"
#include "qlink/quantum_limit.hpp"
#include "qlink/spectral_efficiency.hpp"
#include "qlink/sweep.hpp"
#include "qlink/units.hpp"

namespace {

using nlohmann::json;
using namespace qlink;

constexpr int kExitInvalid = 1;
constexpr int kExitIo = 2;

json number_or_null(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

void print_json(const json& doc) { std::cout << doc.dump(2) << '\n'; }

struct LinkArgs {
  double alpha = 0.05;
  double length = 0.0;
  int segments = 1;
  double photons = 0.0;

  void attach(CLI::App* app) {
    app->add_option("--alpha", alpha, "attenuation coefficient, 1/km")->capture_default_str();
    app->add_option("-L,--length", length, "link length, km")->required();
    app->add_option("-K,--segments", segments, "number of segments")->capture_default_str();
    app->add_option("-n,--photons", photons, "photons per pulse at the power cap")->required();
  }
  LinkConfig config() const {
    LinkConfig c{alpha, length, segments, photons};
    c.validate();
    return c;
  }
};

json result_json(const OptimizationResult& r) {
  return json{{"gains", r.gains.vector()},
              {"se_achieved", r.se_achieved},
              {"se_target", r.se_target},
              {"energy", r.energy},
              {"energy_exact", r.energy_exact},
              {"baseline_energy", r.baseline_energy},
              {"savings_pct", 100.0 * r.savings_fraction},
              {"converged", r.converged},
              {"infeasible", r.infeasible},
              {"iterations", r.iterations}};
}

// -- se ---------------------------------------------------------------------

void run_se(const LinkArgs& link, const std::string& gains_text) {
  const auto config = link.config();
  GainProfile profile = GainProfile::full(config);
  if (!gains_text.empty()) {
    profile = GainProfile(sweep::parse_number_list(gains_text));
    profile.validate_for(config);
  }
  const auto coeffs = propagate(config, profile);
  const auto flat = propagate(config, GainProfile::unity(config.segments));
  const double n = config.photons;
  print_json({{"eta", config.eta()},
              {"max_gain", max_gain(config)},
              {"gains", profile.vector()},
              {"tau", coeffs.tau()},
              {"nu", coeffs.nu()},
              {"se_shannon", shannon_se(coeffs, n)},
              {"se_holevo", holevo_se(coeffs, n)},
              {"se_homodyne", homodyne_se(coeffs, n)},
              {"se_shannon_op", optimal_shannon_se(config)},
              {"se_shannon_noamp", shannon_se(flat, n)},
              {"se_holevo_noamp", holevo_se(flat, n)},
              {"AE", sweep::amplification_enhancement(config)},
              {"energy", energy(config, profile)},
              {"energy_relaxed", energy_relaxed(config, profile)},
              {"baseline_energy", baseline_energy(config)}});
}

// -- optimize ---------------------------------------------------------------

void run_optimize(const LinkArgs& link, const std::string& problem,
                  std::optional<double> target) {
  const auto config = link.config();
  OptimizationResult r;
  if (problem == "egs") {
    r = solve_egs(config, target, EnergyModel::Exact);
  } else if (problem == "regs") {
    r = solve_egs(config, target, EnergyModel::Relaxed);
  } else if (problem == "segs") {
    r = segs_shannon(config);
  } else if (problem == "segs-holevo") {
    r = segs_holevo(config);
  } else if (problem == "homodyne-egs") {
    r = solve_homodyne_egs(config, target);
  } else {
    throw std::invalid_argument("unknown problem: " + problem);
  }
  auto doc = result_json(r);
  doc["problem"] = problem;
  print_json(doc);
}

// -- sweep ------------------------------------------------------------------

struct SweepArgs {
  std::string config_path;
  std::optional<double> alpha;
  std::string lengths, segments, photons, problems, output, format;
  std::optional<int> threads;
  std::optional<double> ae_target;
  std::string ae_output;
  std::string ae_contours, se_contours, contours_output;
};

sweep::SweepSpec build_spec(const SweepArgs& a) {
  sweep::SweepSpec spec;
  if (!a.config_path.empty()) spec = sweep::load_spec(a.config_path);
  if (a.alpha) spec.alpha = *a.alpha;
  if (!a.lengths.empty()) spec.lengths_km = sweep::parse_number_list(a.lengths);
  if (!a.photons.empty()) spec.photons = sweep::parse_number_list(a.photons);
  if (!a.segments.empty()) {
    spec.segments.clear();
    for (double k : sweep::parse_number_list(a.segments)) {
      if (k != std::floor(k) || k < 1 || k > 1e9)
        throw sweep::SpecError("K values must be integers >= 1");
      spec.segments.push_back(static_cast<int>(k));
    }
  }
  if (!a.problems.empty()) {
    spec.problems.clear();
    if (a.problems != "none") {
      std::size_t pos = 0;
      while (true) {
        const auto next = a.problems.find(',', pos);
        const auto name = a.problems.substr(pos, next == std::string::npos ? next : next - pos);
        auto p = sweep::parse_problem(name);
        if (!p) throw sweep::SpecError("unknown problem: " + name);
        if (!spec.has(*p)) spec.problems.push_back(*p);
        if (next == std::string::npos) break;
        pos = next + 1;
      }
    }
  }
  if (!a.output.empty()) spec.output_path = a.output;
  if (!a.format.empty()) {
    auto f = sweep::parse_format(a.format);
    if (!f) throw sweep::SpecError("format must be csv or json");
    spec.format = *f;
  }
  if (a.threads) spec.threads = *a.threads;
  spec.validate();
  return spec;
}

void run_sweep_command(const SweepArgs& a) {
  const auto spec = build_spec(a);
  const auto table = sweep::run_sweep(spec);
  sweep::emit(table, spec.problems, spec.format, spec.output_path);

  if (a.ae_target) {
    const auto trace = sweep::ae_trace(spec.alpha, spec.segments, spec.photons, *a.ae_target);
    const auto text = sweep::render_ae_trace_csv(trace);
    if (a.ae_output.empty()) std::cerr << text;
    else sweep::write_text(text, a.ae_output);
  }

  std::vector<sweep::ContourPoint> contours;
  if (!a.ae_contours.empty()) {
    const auto levels = sweep::parse_number_list(a.ae_contours);
    auto pts = sweep::contour_crossings(table, "AE", levels);
    contours.insert(contours.end(), pts.begin(), pts.end());
  }
  if (!a.se_contours.empty()) {
    const auto levels = sweep::parse_number_list(a.se_contours);
    auto pts = sweep::contour_crossings(table, "se_shannon_op", levels);
    contours.insert(contours.end(), pts.begin(), pts.end());
  }
  if (!a.ae_contours.empty() || !a.se_contours.empty()) {
    const auto text = sweep::render_contours_csv(contours);
    if (a.contours_output.empty()) std::cerr << text;
    else sweep::write_text(text, a.contours_output);
  }
}

// -- continuous -------------------------------------------------------------

void run_continuous(double alpha, double length, double photons, const std::string& ks) {
  const auto sol = continuum::solve_onoff(alpha, length, photons);
  json doc{{"alpha", alpha},
           {"L_km", length},
           {"n0", photons},
           {"se_shannon_continuous", continuum::shannon_se_continuous(alpha, length, photons)},
           {"baseline_energy", sol.baseline_energy},
           {"onoff",
            {{"photons", sol.photons},
             {"gamma", sol.gamma},
             {"energy", sol.energy},
             {"target_se", sol.target_se},
             {"savings_pct", 100.0 * (1.0 - sol.energy / sol.baseline_energy)},
             {"used_grid_fallback", sol.used_grid_fallback}}}};
  if (!ks.empty()) {
    json rows = json::array();
    for (double k : sweep::parse_number_list(ks)) {
      if (k != std::floor(k) || k < 1) throw std::invalid_argument("K values must be integers");
      const LinkConfig c{alpha, length, static_cast<int>(k), photons};
      c.validate();
      rows.push_back({{"K", static_cast<int>(k)},
                      {"se_shannon_op", optimal_shannon_se(c)},
                      {"baseline_energy", baseline_energy(c)}});
    }
    doc["discrete"] = rows;
  }
  print_json(doc);
}

// -- baudscan ---------------------------------------------------------------

struct QuantumArgs {
  double alpha = 0.05;
  double length = 185.0;
  double power = 1e-3;
  double wavelength_nm = 1550.0;

  void attach(CLI::App* app) {
    app->add_option("--alpha", alpha, "attenuation coefficient, 1/km")->capture_default_str();
    app->add_option("-L,--length", length, "link length, km")->capture_default_str();
    app->add_option("--power", power, "launch power, W")->capture_default_str();
    app->add_option("--wavelength-nm", wavelength_nm, "wavelength, nm")->capture_default_str();
  }
  double flux() const { return units::photon_flux(power, wavelength_nm * 1e-9); }
  double tau() const { return std::exp(-alpha * length); }
};

void run_baudscan(const QuantumArgs& q, double noise, const std::string& convention,
                  double bmin, double bmax, int points, const std::string& output) {
  quantum_limit::NoiseConvention conv;
  if (convention == "per-pulse") conv = quantum_limit::NoiseConvention::PerPulse;
  else if (convention == "per-second") conv = quantum_limit::NoiseConvention::PerSecond;
  else throw std::invalid_argument("noise convention must be per-pulse or per-second");
  if (!(bmin > 0.0 && bmax > bmin)) throw std::invalid_argument("need 0 < bmin < bmax");
  if (points < 2) throw std::invalid_argument("need at least 2 points");

  const double flux = q.flux(), tau = q.tau();
  const auto bauds = quantum_limit::log_spaced(bmin, bmax, points);
  const auto scan = quantum_limit::baud_scan(flux, tau, noise, conv, bauds);

  std::string csv = "baud,rate_ossr,rate_ojdr,ossr_bound\n";
  for (std::size_t i = 0; i < bauds.size(); ++i) {
    const double nu = conv == quantum_limit::NoiseConvention::PerPulse ? noise : noise / bauds[i];
    csv += sweep::format_double(bauds[i]) + ',' + sweep::format_double(scan.rates_ossr[i]) + ',' +
           sweep::format_double(scan.rates_ojdr[i]) + ',' +
           sweep::format_double(quantum_limit::ossr_bound(flux, tau, nu)) + '\n';
  }

  json summary{{"flux", flux}, {"tau", tau}, {"noise", noise}, {"convention", convention}};
  if (conv == quantum_limit::NoiseConvention::PerPulse) {
    const auto b = quantum_limit::quantum_limit_crossover(flux, tau, noise);
    summary["ossr_bound"] = quantum_limit::ossr_bound(flux, tau, noise);
    summary["crossover_baud"] = b ? json(*b) : json(nullptr);
  }
  if (output.empty()) {
    std::cout << csv;
    std::cerr << summary.dump() << '\n';
  } else {
    sweep::write_text(csv, output);
    print_json(summary);
  }
}

// -- hadamard ---------------------------------------------------------------

void run_hadamard(const QuantumArgs& q, double baud, const std::string& orders) {
  const double flux = q.flux(), tau = q.tau();
  json rows = json::array();
  for (double k : sweep::parse_number_list(orders)) {
    if (k != std::floor(k) || k < 2 || k > 1 << 30)
      throw std::invalid_argument("Hadamard orders must be powers of two >= 2");
    const int order = static_cast<int>(k);
    rows.push_back({{"order", order},
                    {"rate_bps", quantum_limit::rate_hadamard(flux, tau, baud, order)}});
  }
  print_json({{"flux", flux},
              {"tau", tau},
              {"baud", baud},
              {"photons_per_pulse", flux / baud},
              {"rate_ossr_bps", quantum_limit::rate_ossr(flux, tau, 0.0, baud)},
              {"rate_ojdr_bps", quantum_limit::rate_ojdr(flux, tau, 0.0, baud)},
              {"hadamard", rows}});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-aware gain selection and capacity analysis for amplified optical links"};
  app.require_subcommand(1);

  LinkArgs se_link;
  std::string se_gains;
  auto* se = app.add_subcommand("se", "spectral efficiencies of one link");
  se_link.attach(se);
  se->add_option("--gains", se_gains, "gain profile a,b,...; default: full amplification");

  LinkArgs opt_link;
  std::string opt_problem;
  std::optional<double> opt_target;
  auto* opt = app.add_subcommand("optimize", "solve one gain-selection problem");
  opt->add_option("problem", opt_problem, "egs | regs | segs | segs-holevo | homodyne-egs")
      ->required()
      ->check(CLI::IsMember({"egs", "regs", "segs", "segs-holevo", "homodyne-egs"}));
  opt_link.attach(opt);
  opt->add_option("--target", opt_target, "SE target; default: optimal heterodyne SE");

  SweepArgs sw;
  auto* swc = app.add_subcommand("sweep", "evaluate an (L, K, n) grid");
  swc->add_option("-c,--config", sw.config_path, "JSON sweep description");
  swc->add_option("--alpha", sw.alpha, "attenuation coefficient, 1/km");
  swc->add_option("--lengths", sw.lengths, "L values: a,b,c or start:stop:step");
  swc->add_option("--segments", sw.segments, "K values");
  swc->add_option("--photons", sw.photons, "n values");
  swc->add_option("--problems", sw.problems, "comma list of segs,egs,regs,homodyne-egs or none");
  swc->add_option("-o,--output", sw.output, "output file; default stdout");
  swc->add_option("--format", sw.format, "csv | json");
  swc->add_option("--threads", sw.threads, "worker threads; 0 = all cores");
  swc->add_option("--ae-target", sw.ae_target, "also locate AE = target per (K, n)");
  swc->add_option("--ae-output", sw.ae_output, "AE trace file; default stderr");
  swc->add_option("--ae-contours", sw.ae_contours, "AE iso-levels");
  swc->add_option("--se-contours", sw.se_contours, "optimal heterodyne SE iso-levels");
  swc->add_option("--contours-output", sw.contours_output, "contour file; default stderr");

  double c_alpha = 0.05, c_length = 0.0, c_photons = 0.0;
  std::string c_ks;
  auto* cont = app.add_subcommand("continuous", "on-off amplification in the continuum limit");
  cont->add_option("--alpha", c_alpha, "attenuation coefficient, 1/km")->capture_default_str();
  cont->add_option("-L,--length", c_length, "link length, km")->required();
  cont->add_option("-n,--photons", c_photons, "photons per pulse")->required();
  cont->add_option("--compare-K", c_ks, "discrete segment counts to compare against");

  QuantumArgs bq;
  double b_noise = 0.0, b_min = 1e9, b_max = 1e15;
  int b_points = 200;
  std::string b_conv = "per-pulse", b_output;
  auto* bs = app.add_subcommand("baudscan", "rates versus baud-rate at fixed power");
  bq.attach(bs);
  bs->add_option("--noise", b_noise, "noise photons")->capture_default_str();
  bs->add_option("--noise-convention", b_conv, "per-pulse | per-second")->capture_default_str();
  bs->add_option("--bmin", b_min, "lowest baud-rate")->capture_default_str();
  bs->add_option("--bmax", b_max, "highest baud-rate")->capture_default_str();
  bs->add_option("--points", b_points, "log-spaced points")->capture_default_str();
  bs->add_option("-o,--output", b_output, "CSV file; default stdout");

  QuantumArgs hq;
  double h_baud = 1.8e13;
  std::string h_orders = "4,8,16,32";
  auto* had = app.add_subcommand("hadamard", "Hadamard receiver rates on a noiseless link");
  hq.attach(had);
  had->add_option("--baud", h_baud, "baud-rate")->capture_default_str();
  had->add_option("--orders", h_orders, "code orders")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalid;
  }

  try {
    if (se->parsed()) run_se(se_link, se_gains);
    else if (opt->parsed()) run_optimize(opt_link, opt_problem, opt_target);
    else if (swc->parsed()) run_sweep_command(sw);
    else if (cont->parsed()) run_continuous(c_alpha, c_length, c_photons, c_ks);
    else if (bs->parsed()) run_baudscan(bq, b_noise, b_conv, b_min, b_max, b_points, b_output);
    else if (had->parsed()) run_hadamard(hq, h_baud, h_orders);
  } catch (const sweep::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
  return 0;
}
