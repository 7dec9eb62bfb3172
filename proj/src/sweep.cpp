#include "qlink/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "qlink/gain_optimizer.hpp"
#include "qlink/spectral_efficiency.hpp"

namespace qlink::sweep {

namespace {

bool contains(std::span<const Problem> problems, Problem p) {
  return std::find(problems.begin(), problems.end(), p) != problems.end();
}

double pct(double fraction) { return 100.0 * fraction; }

}  // namespace

std::optional<Problem> parse_problem(std::string_view name) {
  if (name == "segs") return Problem::Segs;
  if (name == "egs") return Problem::Egs;
  if (name == "regs") return Problem::Regs;
  if (name == "homodyne-egs") return Problem::HomodyneEgs;
  return std::nullopt;
}

std::string to_string(Problem problem) {
  switch (problem) {
    case Problem::Segs: return "segs";
    case Problem::Egs: return "egs";
    case Problem::Regs: return "regs";
    case Problem::HomodyneEgs: return "homodyne-egs";
  }
  return "?";
}

std::optional<Format> parse_format(std::string_view name) {
  if (name == "csv") return Format::Csv;
  if (name == "json") return Format::Json;
  return std::nullopt;
}

bool SweepSpec::has(Problem p) const { return contains(problems, p); }

void SweepSpec::validate() const {
  if (!(std::isfinite(alpha) && alpha > 0.0)) throw SpecError("alpha must be positive");
  if (lengths_km.empty()) throw SpecError("L_km list is empty");
  if (segments.empty()) throw SpecError("K list is empty");
  if (photons.empty()) throw SpecError("n list is empty");
  for (double L : lengths_km)
    if (!(std::isfinite(L) && L > 0.0)) throw SpecError("L_km values must be positive");
  for (int K : segments)
    if (K < 1) throw SpecError("K values must be integers >= 1");
  for (double n : photons)
    if (!(std::isfinite(n) && n > 0.0)) throw SpecError("n values must be positive");
  if (threads < 0) throw SpecError("threads must be >= 0");
}

double amplification_enhancement(const LinkConfig& config) {
  const double noamp = spectral_efficiency(Receiver::heterodyne(),
                                           propagate(config, GainProfile::unity(config.segments)),
                                           config.photons);
  return optimal_shannon_se(config) / noamp;
}

SweepCell run_point(const LinkConfig& config, std::span<const Problem> problems) {
  config.validate();
  SweepCell cell;
  cell.length_km = config.length_km;
  cell.segments = config.segments;
  cell.photons = config.photons;

  const auto flat = propagate(config, GainProfile::unity(config.segments));
  cell.se_shannon_op = optimal_shannon_se(config);
  cell.se_shannon_noamp = spectral_efficiency(Receiver::heterodyne(), flat, config.photons);
  cell.se_holevo_noamp = spectral_efficiency(Receiver::holevo(), flat, config.photons);
  cell.ae = cell.se_shannon_op / cell.se_shannon_noamp;
  cell.e_sh = baseline_energy(config);

  try {
    if (contains(problems, Problem::Egs)) {
      const auto r = solve_egs(config, std::nullopt, EnergyModel::Exact);
      cell.e_egs = r.energy_exact;
      cell.savings_egs_pct = pct(r.savings_fraction);
      cell.egs_converged = r.converged;
    }
    if (contains(problems, Problem::Regs)) {
      const auto r = solve_egs(config, std::nullopt, EnergyModel::Relaxed);
      cell.e_regs = r.energy_exact;
      cell.savings_regs_pct = pct(r.savings_fraction);
      cell.regs_converged = r.converged;
    }
    if (contains(problems, Problem::Segs)) {
      cell.se_holevo_op = segs_holevo(config).se_achieved;
    }
    if (contains(problems, Problem::HomodyneEgs)) {
      const auto r = solve_homodyne_egs(config);
      cell.e_homodyne_egs = r.energy_exact;
      cell.savings_homodyne_pct = pct(r.savings_fraction);
      cell.homodyne_converged = r.converged;
      cell.homodyne_infeasible = r.infeasible;
    }
  } catch (const std::exception& e) {
    cell.error = e.what();
  }
  return cell;
}

std::vector<SweepCell> run_sweep(const SweepSpec& spec) {
  spec.validate();
  if (spec.problems.empty()) return {};

  std::vector<LinkConfig> configs;
  for (double L : spec.lengths_km)
    for (int K : spec.segments)
      for (double n : spec.photons) configs.push_back(LinkConfig{spec.alpha, L, K, n});

  std::vector<SweepCell> table(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        table[i] = run_point(configs[i], spec.problems);
      } catch (const std::exception& e) {
        table[i].length_km = configs[i].length_km;
        table[i].segments = configs[i].segments;
        table[i].photons = configs[i].photons;
        table[i].error = e.what();
      }
    }
  };

  unsigned threads = spec.threads > 0 ? static_cast<unsigned>(spec.threads)
                                      : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(configs.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return table;
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::vector<std::string> csv_columns(std::span<const Problem> problems) {
  std::vector<std::string> cols = {"L_km",           "K",
                                   "n",              "se_shannon_op",
                                   "se_shannon_noamp", "se_holevo_noamp",
                                   "AE",             "E_sh",
                                   "E_egs",          "E_regs",
                                   "savings_egs_pct", "savings_regs_pct",
                                   "egs_converged",  "regs_converged"};
  if (contains(problems, Problem::Segs)) cols.push_back("se_holevo_op");
  if (contains(problems, Problem::HomodyneEgs)) {
    cols.push_back("E_homodyne_egs");
    cols.push_back("savings_homodyne_pct");
    cols.push_back("homodyne_converged");
  }
  return cols;
}

std::string render_csv(std::span<const SweepCell> table, std::span<const Problem> problems) {
  const bool segs = contains(problems, Problem::Segs);
  const bool homodyne = contains(problems, Problem::HomodyneEgs);
  std::string out;
  const auto cols = csv_columns(problems);
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) out += ',';
    out += cols[i];
  }
  out += '\n';
  for (const auto& c : table) {
    std::vector<std::string> f = {format_double(c.length_km),
                                  std::to_string(c.segments),
                                  format_double(c.photons),
                                  format_double(c.se_shannon_op),
                                  format_double(c.se_shannon_noamp),
                                  format_double(c.se_holevo_noamp),
                                  format_double(c.ae),
                                  format_double(c.e_sh),
                                  format_double(c.e_egs),
                                  format_double(c.e_regs),
                                  format_double(c.savings_egs_pct),
                                  format_double(c.savings_regs_pct),
                                  c.egs_converged ? "1" : "0",
                                  c.regs_converged ? "1" : "0"};
    if (segs) f.push_back(format_double(c.se_holevo_op));
    if (homodyne) {
      f.push_back(format_double(c.e_homodyne_egs));
      f.push_back(format_double(c.savings_homodyne_pct));
      f.push_back(c.homodyne_converged ? "1" : "0");
    }
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (i) out += ',';
      out += f[i];
    }
    out += '\n';
  }
  return out;
}

nlohmann::json render_json(std::span<const SweepCell> table, std::span<const Problem> problems) {
  auto num = [](double v) -> nlohmann::json {
    if (std::isnan(v)) return nullptr;
    return v;
  };
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& c : table) {
    nlohmann::json r;
    r["L_km"] = c.length_km;
    r["K"] = c.segments;
    r["n"] = c.photons;
    r["se_shannon_op"] = num(c.se_shannon_op);
    r["se_shannon_noamp"] = num(c.se_shannon_noamp);
    r["se_holevo_noamp"] = num(c.se_holevo_noamp);
    r["AE"] = num(c.ae);
    r["E_sh"] = num(c.e_sh);
    r["E_egs"] = num(c.e_egs);
    r["E_regs"] = num(c.e_regs);
    r["savings_egs_pct"] = num(c.savings_egs_pct);
    r["savings_regs_pct"] = num(c.savings_regs_pct);
    r["egs_converged"] = c.egs_converged;
    r["regs_converged"] = c.regs_converged;
    if (contains(problems, Problem::Segs)) r["se_holevo_op"] = num(c.se_holevo_op);
    if (contains(problems, Problem::HomodyneEgs)) {
      r["E_homodyne_egs"] = num(c.e_homodyne_egs);
      r["savings_homodyne_pct"] = num(c.savings_homodyne_pct);
      r["homodyne_converged"] = c.homodyne_converged;
    }
    if (!c.error.empty()) r["error"] = c.error;
    rows.push_back(std::move(r));
  }
  return rows;
}

std::size_t write_text(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    if (!std::cout) throw IoError("failed writing to stdout");
    return text.size();
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open output file: " + path);
  os << text;
  os.flush();
  if (!os) throw IoError("failed writing output file: " + path);
  return text.size();
}

std::size_t emit(std::span<const SweepCell> table, std::span<const Problem> problems,
                 Format format, const std::string& path) {
  if (format == Format::Csv) return write_text(render_csv(table, problems), path);
  // nlohmann prints doubles round-trip exact; NaN fields are already null.
  return write_text(render_json(table, problems).dump(2) + "\n", path);
}

std::vector<double> arithmetic_range(double start, double stop, double step) {
  if (!(std::isfinite(start) && std::isfinite(stop) && std::isfinite(step)))
    throw SpecError("range bounds must be finite");
  if (!(step > 0.0)) throw SpecError("range step must be positive");
  if (stop < start) throw SpecError("range stop must not be below start");
  const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  if (count > 10'000'000) throw SpecError("range has too many points");
  std::vector<double> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(start + static_cast<double>(i) * step);
  return out;
}

std::vector<double> parse_number_list(std::string_view text) {
  auto number = [](std::string_view tok) {
    std::string t(tok);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(t, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != t.size()) throw SpecError("not a number: '" + t + "'");
    return v;
  };
  if (text.empty()) throw SpecError("empty value list");
  if (text.find(':') != std::string_view::npos) {
    std::vector<double> parts;
    std::size_t pos = 0;
    while (true) {
      const auto next = text.find(':', pos);
      parts.push_back(number(text.substr(pos, next - pos)));
      if (next == std::string_view::npos) break;
      pos = next + 1;
    }
    if (parts.size() != 3) throw SpecError("range must be start:stop:step");
    return arithmetic_range(parts[0], parts[1], parts[2]);
  }
  std::vector<double> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = text.find(',', pos);
    out.push_back(number(text.substr(pos, next - pos)));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

namespace {

std::vector<double> axis_values(const nlohmann::json& node, const char* name) {
  if (node.is_number()) return {node.get<double>()};
  if (node.is_array()) {
    std::vector<double> out;
    for (const auto& v : node) {
      if (!v.is_number()) throw SpecError(std::string("non-numeric entry in ") + name);
      out.push_back(v.get<double>());
    }
    return out;
  }
  if (node.is_object()) {
    for (const char* key : {"start", "stop", "step"})
      if (!node.contains(key) || !node[key].is_number())
        throw SpecError(std::string(name) + " range needs numeric start, stop and step");
    return arithmetic_range(node["start"].get<double>(), node["stop"].get<double>(),
                            node["step"].get<double>());
  }
  throw SpecError(std::string(name) + " must be a number, a list or a range object");
}

}  // namespace

SweepSpec spec_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw SpecError("sweep spec must be a JSON object");
  SweepSpec spec;
  if (doc.contains("alpha")) {
    if (!doc["alpha"].is_number()) throw SpecError("alpha must be a number");
    spec.alpha = doc["alpha"].get<double>();
  }
  if (doc.contains("grid")) {
    const auto& grid = doc["grid"];
    if (!grid.is_object()) throw SpecError("grid must be an object");
    if (grid.contains("L_km")) spec.lengths_km = axis_values(grid["L_km"], "L_km");
    if (grid.contains("n")) spec.photons = axis_values(grid["n"], "n");
    if (grid.contains("K")) {
      for (double k : axis_values(grid["K"], "K")) {
        if (k != std::floor(k) || k < 1 || k > 1e9) throw SpecError("K values must be integers >= 1");
        spec.segments.push_back(static_cast<int>(k));
      }
    }
  }
  if (doc.contains("problems")) {
    if (!doc["problems"].is_array()) throw SpecError("problems must be a list");
    for (const auto& p : doc["problems"]) {
      if (!p.is_string()) throw SpecError("problem names must be strings");
      auto parsed = parse_problem(p.get<std::string>());
      if (!parsed) throw SpecError("unknown problem: " + p.get<std::string>());
      if (!spec.has(*parsed)) spec.problems.push_back(*parsed);
    }
  }
  if (doc.contains("output")) {
    const auto& out = doc["output"];
    if (!out.is_object()) throw SpecError("output must be an object");
    if (out.contains("path")) {
      if (!out["path"].is_string()) throw SpecError("output.path must be a string");
      spec.output_path = out["path"].get<std::string>();
    }
    if (out.contains("format")) {
      if (!out["format"].is_string()) throw SpecError("output.format must be a string");
      auto f = parse_format(out["format"].get<std::string>());
      if (!f) throw SpecError("output.format must be csv or json");
      spec.format = *f;
    }
  }
  if (doc.contains("threads")) {
    if (!doc["threads"].is_number_integer()) throw SpecError("threads must be an integer");
    spec.threads = doc["threads"].get<int>();
  }
  return spec;
}

SweepSpec load_spec(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot read spec file: " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw SpecError("malformed spec file " + path.string() + ": " + e.what());
  }
  return spec_from_json(doc);
}

std::optional<double> length_for_ae(double alpha, int segments, double photons, double target_ae,
                                    double max_length_km) {
  if (!(target_ae >= 1.0)) throw std::invalid_argument("AE target must be >= 1");
  auto ae_at = [&](double L) {
    return amplification_enhancement(LinkConfig{alpha, L, segments, photons});
  };
  if (segments < 2) return std::nullopt;  // nothing to amplify, AE == 1
  double lo = 1e-6;
  if (ae_at(lo) >= target_ae) return lo;
  double hi = 1.0;
  while (ae_at(hi) < target_ae) {
    lo = hi;
    hi *= 2.0;
    if (hi > max_length_km) {
      hi = max_length_km;
      if (ae_at(hi) < target_ae) return std::nullopt;
      break;
    }
  }
  for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (ae_at(mid) < target_ae ? lo : hi) = mid;
  }
  return hi;
}

std::vector<AeTracePoint> ae_trace(double alpha, std::span<const int> segments,
                                   std::span<const double> photons, double target_ae) {
  const Problem both[] = {Problem::Egs, Problem::Regs};
  std::vector<AeTracePoint> out;
  for (int K : segments) {
    for (double n : photons) {
      AeTracePoint p;
      p.segments = K;
      p.photons = n;
      if (auto L = length_for_ae(alpha, K, n, target_ae)) {
        const auto cell = run_point(LinkConfig{alpha, *L, K, n}, both);
        p.found = true;
        p.length_km = *L;
        p.ae = cell.ae;
        p.savings_egs_pct = cell.savings_egs_pct;
        p.savings_regs_pct = cell.savings_regs_pct;
      }
      out.push_back(p);
    }
  }
  return out;
}

std::string render_ae_trace_csv(std::span<const AeTracePoint> trace) {
  std::ostringstream os;
  os << "K,n,found,L_km,AE,savings_egs_pct,savings_regs_pct\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& p : trace) {
    os << p.segments << ',' << format_double(p.photons) << ',' << (p.found ? 1 : 0) << ','
       << format_double(p.found ? p.length_km : nan) << ','
       << format_double(p.found ? p.ae : nan) << ','
       << format_double(p.found ? p.savings_egs_pct : nan) << ','
       << format_double(p.found ? p.savings_regs_pct : nan) << '\n';
  }
  return os.str();
}

std::vector<ContourPoint> contour_crossings(std::span<const SweepCell> table,
                                            const std::string& field,
                                            std::span<const double> levels) {
  double SweepCell::*member = nullptr;
  if (field == "AE") member = &SweepCell::ae;
  else if (field == "se_shannon_op") member = &SweepCell::se_shannon_op;
  else throw std::invalid_argument("contour field must be AE or se_shannon_op");

  // Group rows by (K, n), ordered by L.
  std::vector<const SweepCell*> rows;
  for (const auto& c : table) rows.push_back(&c);
  std::stable_sort(rows.begin(), rows.end(), [](const SweepCell* a, const SweepCell* b) {
    if (a->segments != b->segments) return a->segments < b->segments;
    if (a->photons != b->photons) return a->photons < b->photons;
    return a->length_km < b->length_km;
  });

  std::vector<ContourPoint> out;
  for (double level : levels) {
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
      const auto& a = *rows[i];
      const auto& b = *rows[i + 1];
      if (a.segments != b.segments || a.photons != b.photons) continue;
      const double va = a.*member, vb = b.*member;
      if (!std::isfinite(va) || !std::isfinite(vb)) continue;
      const bool crosses = (va - level) * (vb - level) < 0.0 || (va == level);
      if (!crosses) continue;
      const double t = va == vb ? 0.0 : (level - va) / (vb - va);
      out.push_back({field, level, a.segments, a.photons,
                     a.length_km + t * (b.length_km - a.length_km)});
    }
  }
  return out;
}

std::string render_contours_csv(std::span<const ContourPoint> points) {
  std::string out = "field,level,K,n,L_km\n";
  for (const auto& p : points) {
    out += p.field + ',' + format_double(p.level) + ',' + std::to_string(p.segments) + ',' +
           format_double(p.photons) + ',' + format_double(p.length_km) + '\n';
  }
  return out;
}

}  // namespace qlink::sweep
