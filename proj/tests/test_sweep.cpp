#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "oracles.hpp"
#include "qlink/gain_optimizer.hpp"
#include "qlink/sweep.hpp"

using namespace qlink;
using namespace qlink::sweep;
using oracle::rel_err;

namespace {

const std::vector<Problem> kEgsRegs = {Problem::Egs, Problem::Regs};

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

std::vector<std::string> lines(const std::string& text) { return split(text, '\n'); }

bool same_bits(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

SweepSpec small_spec() {
  SweepSpec s;
  s.alpha = 0.05;
  s.lengths_km = {100.0, 225.0, 400.0};
  s.segments = {1, 2, 4};
  s.photons = {1e5, 1e7};
  s.problems = kEgsRegs;
  s.threads = 1;
  return s;
}

std::filesystem::path temp_dir() {
  auto d = std::filesystem::temp_directory_path() / "qlink_sweep_test";
  std::filesystem::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("problem and format names") {
  for (auto p : {Problem::Segs, Problem::Egs, Problem::Regs, Problem::HomodyneEgs})
    CHECK(parse_problem(to_string(p)) == p);
  CHECK_FALSE(parse_problem("egs2").has_value());
  CHECK(parse_format("csv") == Format::Csv);
  CHECK(parse_format("json") == Format::Json);
  CHECK_FALSE(parse_format("xml").has_value());
}

TEST_CASE("record configuration cell") {
  const auto cell = run_point(LinkConfig{0.05, 225.0, 2, 1e7}, kEgsRegs);
  CHECK(cell.error.empty());
  CHECK(cell.savings_egs_pct == doctest::Approx(55.0).epsilon(1.0 / 55.0));
  CHECK(cell.ae == doctest::Approx(2.0).epsilon(0.03));
  CHECK(rel_err(cell.ae, cell.se_shannon_op / cell.se_shannon_noamp) < 1e-15);
  CHECK(cell.se_shannon_op == doctest::Approx(14.1).epsilon(0.1 / 14.1));
  CHECK(cell.se_shannon_noamp == doctest::Approx(7.0).epsilon(0.1 / 7.0));
  CHECK(cell.se_holevo_noamp == doctest::Approx(8.5).epsilon(0.1 / 8.5));
  CHECK(cell.egs_converged);
  CHECK(rel_err(cell.savings_egs_pct, 100.0 * (1.0 - cell.e_egs / cell.e_sh)) < 1e-12);
  CHECK(std::isnan(cell.se_holevo_op));
  CHECK(std::isnan(cell.e_homodyne_egs));
}

TEST_CASE("single segment cell") {
  const auto cell = run_point(LinkConfig{0.05, 100.0, 1, 1e7}, kEgsRegs);
  CHECK(cell.e_sh == 0.0);
  CHECK(cell.savings_egs_pct == 0.0);
  CHECK(cell.savings_regs_pct == 0.0);
  CHECK(cell.ae == doctest::Approx(1.0));
}

TEST_CASE("optional problems fill only their fields") {
  const LinkConfig c{0.05, 150.0, 3, 1e7};
  const Problem segs[] = {Problem::Segs};
  const auto a = run_point(c, segs);
  CHECK(std::isnan(a.e_egs));
  CHECK(std::isnan(a.savings_regs_pct));
  CHECK(a.se_holevo_op == doctest::Approx(segs_holevo(c).se_achieved));
  const Problem hom[] = {Problem::HomodyneEgs};
  const auto b = run_point(c, hom);
  CHECK_FALSE(std::isnan(b.savings_homodyne_pct));
  CHECK(b.savings_homodyne_pct >= 0.0);
  CHECK(b.savings_homodyne_pct <= 100.0);
}

TEST_CASE("run_point is deterministic") {
  const LinkConfig c{0.05, 300.0, 5, 1e6};
  const auto a = run_point(c, kEgsRegs), b = run_point(c, kEgsRegs);
  CHECK(same_bits(a.e_egs, b.e_egs));
  CHECK(same_bits(a.e_regs, b.e_regs));
  CHECK(a.egs_converged == b.egs_converged);
}

TEST_CASE("sweep order, invariants and single-cell equivalence") {
  const auto spec = small_spec();
  const auto table = run_sweep(spec);
  REQUIRE(table.size() == 18);
  std::size_t idx = 0;
  for (double L : spec.lengths_km)
    for (int K : spec.segments)
      for (double n : spec.photons) {
        CHECK(table[idx].length_km == L);
        CHECK(table[idx].segments == K);
        CHECK(table[idx].photons == n);
        ++idx;
      }
  for (const auto& c : table) {
    CHECK(c.ae >= 1.0 - 1e-12);
    CHECK(c.savings_egs_pct >= 0.0);
    CHECK(c.savings_egs_pct <= 100.0);
    CHECK(c.savings_regs_pct >= 0.0);
    CHECK(c.savings_regs_pct <= 100.0);
    CHECK(c.savings_egs_pct >= c.savings_regs_pct - 0.5);
  }
  const auto one = run_point(LinkConfig{0.05, 225.0, 4, 1e7}, kEgsRegs);
  SweepSpec single = spec;
  single.lengths_km = {225.0};
  single.segments = {4};
  single.photons = {1e7};
  const auto t1 = run_sweep(single);
  REQUIRE(t1.size() == 1);
  CHECK(render_csv(t1, kEgsRegs) == render_csv(std::vector<SweepCell>{one}, kEgsRegs));
}

TEST_CASE("thread count does not change the output") {
  auto spec = small_spec();
  const auto serial = render_csv(run_sweep(spec), spec.problems);
  spec.threads = 4;
  const auto parallel = render_csv(run_sweep(spec), spec.problems);
  CHECK(serial == parallel);
  CHECK(render_csv(run_sweep(spec), spec.problems) == parallel);
}

TEST_CASE("CSV layout") {
  const std::string header =
      "L_km,K,n,se_shannon_op,se_shannon_noamp,se_holevo_noamp,AE,E_sh,E_egs,E_regs,"
      "savings_egs_pct,savings_regs_pct,egs_converged,regs_converged";
  SUBCASE("empty problem set is header only") {
    auto spec = small_spec();
    spec.problems.clear();
    const auto table = run_sweep(spec);
    CHECK(table.empty());
    CHECK(render_csv(table, spec.problems) == header + "\n");
  }
  SUBCASE("extra columns only on request") {
    const std::vector<Problem> all = {Problem::Egs, Problem::Segs, Problem::HomodyneEgs};
    const auto cols = csv_columns(all);
    CHECK(cols.size() == 18);
    CHECK(cols[14] == "se_holevo_op");
    CHECK(cols[17] == "homodyne_converged");
    CHECK(csv_columns(kEgsRegs).size() == 14);
  }
  SUBCASE("one-cell sweep round trips") {
    SweepSpec spec = small_spec();
    spec.lengths_km = {225.0};
    spec.segments = {2};
    spec.photons = {1e7};
    spec.problems = {Problem::Egs};
    const auto table = run_sweep(spec);
    const auto csv = render_csv(table, spec.problems);
    const auto ls = lines(csv);
    REQUIRE(ls.size() == 2);
    CHECK(ls[0] == header);
    const auto f = split(ls[1], ',');
    REQUIRE(f.size() == 14);
    const auto& c = table[0];
    CHECK(std::strtod(f[0].c_str(), nullptr) == c.length_km);
    CHECK(std::stoi(f[1]) == c.segments);
    CHECK(std::strtod(f[2].c_str(), nullptr) == c.photons);
    CHECK(std::strtod(f[3].c_str(), nullptr) == c.se_shannon_op);
    CHECK(std::strtod(f[6].c_str(), nullptr) == c.ae);
    CHECK(std::strtod(f[8].c_str(), nullptr) == c.e_egs);
    CHECK(f[9] == "nan");
    CHECK(std::strtod(f[10].c_str(), nullptr) == c.savings_egs_pct);
    CHECK(f[12] == "1");
    CHECK(f[13] == "0");
  }
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(std::nan("")) == "nan");
}

TEST_CASE("JSON mirrors the CSV fields") {
  const Problem egs[] = {Problem::Egs};
  const auto cell = run_point(LinkConfig{0.05, 225.0, 2, 1e7}, egs);
  const auto doc = render_json(std::vector<SweepCell>{cell}, egs);
  REQUIRE(doc.is_array());
  REQUIRE(doc.size() == 1);
  for (const auto& col : csv_columns(egs)) CHECK(doc[0].contains(col));
  CHECK(doc[0]["E_regs"].is_null());
  CHECK(doc[0]["savings_egs_pct"].get<double>() == cell.savings_egs_pct);
  CHECK(doc[0]["egs_converged"].get<bool>());
  const auto round = nlohmann::json::parse(doc.dump());
  CHECK(round[0]["AE"].get<double>() == cell.ae);
}

TEST_CASE("emit writes files and reports unwritable paths") {
  const auto table = run_sweep(small_spec());
  const auto path = (temp_dir() / "out.csv").string();
  const auto bytes = emit(table, kEgsRegs, Format::Csv, path);
  std::ifstream is(path, std::ios::binary);
  const std::string content((std::istreambuf_iterator<char>(is)), {});
  CHECK(bytes == content.size());
  CHECK(content == render_csv(table, kEgsRegs));

  const std::string bad = "/nonexistent-dir/qlink/out.csv";
  try {
    emit(table, kEgsRegs, Format::Json, bad);
    CHECK(false);
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find(bad) != std::string::npos);
  }
}

TEST_CASE("spec parsing") {
  const auto doc = nlohmann::json::parse(R"({
    "alpha": 0.04,
    "grid": {"L_km": {"start": 50, "stop": 500, "step": 25}, "K": [2, 3], "n": 1e7},
    "problems": ["egs", "regs", "egs"],
    "output": {"path": "x.json", "format": "json"},
    "threads": 2})");
  const auto s = spec_from_json(doc);
  CHECK(s.alpha == 0.04);
  REQUIRE(s.lengths_km.size() == 19);
  CHECK(s.lengths_km.front() == 50.0);
  CHECK(s.lengths_km.back() == 500.0);
  CHECK(s.segments == std::vector<int>{2, 3});
  CHECK(s.photons == std::vector<double>{1e7});
  CHECK(s.problems.size() == 2);
  CHECK(s.output_path == "x.json");
  CHECK(s.format == Format::Json);
  CHECK(s.threads == 2);
  CHECK_NOTHROW(s.validate());

  CHECK_THROWS_AS(spec_from_json(nlohmann::json::parse(R"({"problems": ["fast"]})")), SpecError);
  CHECK_THROWS_AS(spec_from_json(nlohmann::json::parse(R"({"grid": {"K": [1.5]}})")), SpecError);
  CHECK_THROWS_AS(spec_from_json(nlohmann::json::parse(R"({"grid": {"L_km": {"start": 5}}})")),
                  SpecError);
  CHECK_THROWS_AS(spec_from_json(nlohmann::json::parse("[1, 2]")), SpecError);
  CHECK_THROWS_AS(spec_from_json(nlohmann::json::parse(R"({"output": {"format": "xml"}})")),
                  SpecError);
  CHECK_THROWS_AS(spec_from_json(nlohmann::json::parse("{}")).validate(), SpecError);

  SweepSpec neg = small_spec();
  neg.lengths_km = {-1.0};
  CHECK_THROWS_AS(neg.validate(), SpecError);
  neg = small_spec();
  neg.segments = {0};
  CHECK_THROWS_AS(neg.validate(), SpecError);

  CHECK_THROWS_AS(load_spec(temp_dir() / "missing.json"), IoError);
  const auto broken = temp_dir() / "broken.json";
  std::ofstream(broken) << "{ not json";
  CHECK_THROWS_AS(load_spec(broken), SpecError);
}

TEST_CASE("number lists and ranges") {
  CHECK(parse_number_list("1,2.5,1e7") == std::vector<double>{1.0, 2.5, 1e7});
  CHECK(parse_number_list("2:10:1").size() == 9);
  CHECK(parse_number_list("50:500:25").back() == 500.0);
  CHECK(arithmetic_range(0.0, 1.0, 0.1).size() == 11);
  CHECK_THROWS_AS(parse_number_list(""), SpecError);
  CHECK_THROWS_AS(parse_number_list("1,,2"), SpecError);
  CHECK_THROWS_AS(parse_number_list("1:2"), SpecError);
  CHECK_THROWS_AS(parse_number_list("abc"), SpecError);
  CHECK_THROWS_AS(arithmetic_range(5.0, 1.0, 1.0), SpecError);
  CHECK_THROWS_AS(arithmetic_range(0.0, 1.0, 0.0), SpecError);
}

TEST_CASE("AE = 2 trace") {
  const std::vector<int> ks = {2};
  const std::vector<double> ns = {1e4, 1e5, 1e6, 1e7, 1e8, 1e9};
  const auto trace = ae_trace(0.05, ks, ns, 2.0);
  REQUIRE(trace.size() == ns.size());
  double prev_L = 0.0;
  for (const auto& p : trace) {
    REQUIRE(p.found);
    CHECK(p.ae == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(amplification_enhancement(LinkConfig{0.05, p.length_km * 0.99, 2, p.photons}) < 2.0);
    CHECK(p.savings_egs_pct >= p.savings_regs_pct - 0.5);
    CHECK(p.length_km > prev_L);  // more photons: AE = 2 is reached further out
    prev_L = p.length_km;
  }
  // The record configuration sits close to the AE = 2 line.
  CHECK(trace[3].length_km == doctest::Approx(225.0).epsilon(0.02));
  CHECK_FALSE(length_for_ae(0.05, 1, 1e7, 2.0).has_value());
  CHECK_FALSE(length_for_ae(0.05, 2, 1e7, 1e6, 100.0).has_value());
  const auto csv = render_ae_trace_csv(trace);
  CHECK(lines(csv).size() == ns.size() + 1);
}

TEST_CASE("contour crossings interpolate along L") {
  std::vector<SweepCell> table;
  for (double L : {100.0, 200.0, 300.0}) {
    SweepCell c;
    c.length_km = L;
    c.segments = 2;
    c.photons = 1e7;
    c.ae = L / 100.0;  // 1, 2, 3
    c.se_shannon_op = 30.0 - L / 20.0;
    table.push_back(c);
  }
  const double levels[] = {1.5, 2.5, 9.0};
  const auto pts = contour_crossings(table, "AE", levels);
  REQUIRE(pts.size() == 2);
  CHECK(pts[0].length_km == doctest::Approx(150.0));
  CHECK(pts[1].length_km == doctest::Approx(250.0));
  const double se_levels[] = {20.0};
  const auto se = contour_crossings(table, "se_shannon_op", se_levels);
  REQUIRE(se.size() == 1);
  CHECK(se[0].length_km == doctest::Approx(200.0));
  CHECK_THROWS_AS(contour_crossings(table, "bogus", se_levels), std::invalid_argument);
  CHECK(lines(render_contours_csv(pts)).size() == 3);
}
