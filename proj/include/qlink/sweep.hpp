#pragma once

#include <cstddef>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "qlink/link_model.hpp"

namespace qlink::sweep {

enum class Problem { Segs, Egs, Regs, HomodyneEgs };
enum class Format { Csv, Json };

std::optional<Problem> parse_problem(std::string_view name);
std::string to_string(Problem problem);
std::optional<Format> parse_format(std::string_view name);

/// Invalid user input (spec file, flags). Maps to exit code 1.
class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Unreadable or unwritable file. Maps to exit code 2.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SweepSpec {
  double alpha = 0.05;
  std::vector<double> lengths_km;
  std::vector<int> segments;
  std::vector<double> photons;
  std::vector<Problem> problems;
  std::string output_path;  // empty: stdout
  Format format = Format::Csv;
  int threads = 0;  // 0: hardware concurrency

  void validate() const;
  bool has(Problem p) const;
};

/// One (L, K, n) grid cell. Quantities of problems that were not requested
/// stay NaN.
struct SweepCell {
  double length_km = 0.0;
  int segments = 0;
  double photons = 0.0;
  double se_shannon_op = 0.0;
  double se_shannon_noamp = 0.0;
  double se_holevo_noamp = 0.0;
  double ae = 0.0;
  double e_sh = 0.0;
  double e_egs = kNaN;
  double e_regs = kNaN;
  double savings_egs_pct = kNaN;
  double savings_regs_pct = kNaN;
  bool egs_converged = false;
  bool regs_converged = false;
  // Extra columns, emitted only when the matching problem is requested.
  double se_holevo_op = kNaN;
  double e_homodyne_egs = kNaN;
  double savings_homodyne_pct = kNaN;
  bool homodyne_converged = false;
  bool homodyne_infeasible = false;
  std::string error;  // non-empty when the cell could not be evaluated

  static constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
};

/// Ratio of fully amplified to unamplified Shannon SE.
double amplification_enhancement(const LinkConfig& config);

SweepCell run_point(const LinkConfig& config, std::span<const Problem> problems);

/// Cells in lexicographic (L, K, n) order. Cells are independent and are
/// spread over `spec.threads` workers; the result order never depends on
/// scheduling. An empty problem set yields no cells.
std::vector<SweepCell> run_sweep(const SweepSpec& spec);

std::vector<std::string> csv_columns(std::span<const Problem> problems);
std::string render_csv(std::span<const SweepCell> table, std::span<const Problem> problems);
nlohmann::json render_json(std::span<const SweepCell> table, std::span<const Problem> problems);

/// Renders and writes the table; an empty path writes to stdout. Returns the
/// number of bytes written. Throws IoError naming the path on failure.
std::size_t emit(std::span<const SweepCell> table, std::span<const Problem> problems,
                 Format format, const std::string& path);

/// Writes `text` to `path` (stdout when empty); throws IoError.
std::size_t write_text(const std::string& text, const std::string& path);

/// Parses a sweep description:
///   {"alpha": 0.05,
///    "grid": {"L_km": {"start": 50, "stop": 500, "step": 25},
///             "K": [2, 3, 4], "n": [1e7]},
///    "problems": ["egs", "regs"],
///    "output": {"path": "out.csv", "format": "csv"},
///    "threads": 4}
/// Every axis accepts a list or a {start, stop, step} range.
SweepSpec spec_from_json(const nlohmann::json& doc);
SweepSpec load_spec(const std::filesystem::path& path);

/// Values of an inclusive arithmetic range. Throws SpecError for a
/// non-positive step or stop < start.
std::vector<double> arithmetic_range(double start, double stop, double step);

/// Command-line axis syntax: "a,b,c" or "start:stop:step". Throws SpecError.
std::vector<double> parse_number_list(std::string_view text);

struct AeTracePoint {
  int segments = 0;
  double photons = 0.0;
  bool found = false;
  double length_km = 0.0;
  double ae = 0.0;
  double savings_egs_pct = 0.0;
  double savings_regs_pct = 0.0;
};

/// Length at which AE reaches `target_ae` for the given K and n, searched in
/// (0, max_length_km]. AE grows with L, so the root is found by bisection.
std::optional<double> length_for_ae(double alpha, int segments, double photons, double target_ae,
                                    double max_length_km = 1e5);

/// For every (K, n): locate AE = target and report the EGS/REGS savings there.
std::vector<AeTracePoint> ae_trace(double alpha, std::span<const int> segments,
                                   std::span<const double> photons, double target_ae);
std::string render_ae_trace_csv(std::span<const AeTracePoint> trace);

struct ContourPoint {
  std::string field;
  double level = 0.0;
  int segments = 0;
  double photons = 0.0;
  double length_km = 0.0;
};

/// Iso-line crossings along the length axis: for every (K, n) row and each
/// level, the linearly interpolated L where `field` ("AE" or
/// "se_shannon_op") crosses the level.
std::vector<ContourPoint> contour_crossings(std::span<const SweepCell> table,
                                            const std::string& field,
                                            std::span<const double> levels);
std::string render_contours_csv(std::span<const ContourPoint> points);

/// printf("%.17g") rendering used by every CSV writer.
std::string format_double(double value);

}  // namespace qlink::sweep
