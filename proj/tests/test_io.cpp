#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "sma/constitutive.hpp"
#include "sma/errors.hpp"
#include "sma/params.hpp"
#include "sma/scenario.hpp"
#include "sma/trajectory_io.hpp"

using namespace sma;
namespace fs = std::filesystem;

namespace {

const char* kScenario = R"(name = unit
model = hybrid
max_strain = 0.02
strain_rate_per_s = 5e-3
cycles = 1
power_W = 0.41
sample_rate_Hz = 20
)";

int error_line(const std::string& text) {
  try {
    (void)parse_scenario(text, "s.scenario");
  } catch (const ParseError& e) {
    return e.line();
  }
  return -1;
}

}  // namespace

TEST_CASE("scenario parsing and validation") {
  const Scenario s = parse_scenario(kScenario);
  CHECK(s.name == "unit");
  CHECK(s.model == ModelChoice::Hybrid);
  CHECK(s.max_strain == 0.02);
  CHECK(s.J(10.0) == 0.41);
  CHECK(s.initial_temperature() == doctest::Approx(steady_state_temperature(0.41, 298.0, s.params)));
  CHECK(s.drive().duration() == doctest::Approx(8.0).epsilon(1e-6));

  CHECK(error_line("max_strain = 0.07\nstrain_rate_per_s = 1e-3\n") == 1);
  CHECK(error_line("max_strain = 0.02\nstrain_rate_per_s = 0\n") > 0);
  CHECK(error_line("max_strain = 0.02\nstrain_rate_per_s = 1e-3\ncycles = 0\n") > 0);
  CHECK(error_line("max_strain = 0.02\nstrain_rate_per_s = 1e-3\nmodel = quantum\n") == 3);
  CHECK(error_line("max_strain = 0.02\nstrain_rate_per_s = 1e-3\nfoo = 1\n") == 3);
  CHECK(error_line("max_strain = 0.02\nstrain_rate_per_s = 1e-3\npower_W = 1\npower_schedule_W = 0, 1\n") > 0);
  CHECK(error_line("max_strain = 0.02\nstrain_rate_per_s = abc\n") == 2);
}

TEST_CASE("all bundled scenarios and grids validate") {
  int n = 0;
  for (const auto& entry : fs::directory_iterator(fs::path(SMA_DATA_DIR) / "scenarios")) {
    if (entry.path().extension() == ".scenario") CHECK_NOTHROW(load_scenario(entry.path()));
    if (entry.path().extension() == ".grid") CHECK_NOTHROW(load_sweep_grid(entry.path()));
    ++n;
  }
  CHECK(n >= 5);
}

TEST_CASE("hybrid CSV layout and determinism") {
  const Scenario s = parse_scenario(kScenario);
  const RunResult a = run_scenario(s);
  const RunResult b = run_scenario(s);
  REQUIRE(a.hybrid);
  CHECK_FALSE(a.mas);
  std::ostringstream oa, ob;
  write_hybrid_csv(oa, *a.hybrid);
  write_hybrid_csv(ob, *b.hybrid);
  CHECK(oa.str() == ob.str());
  CHECK(oa.str().rfind("t,j,eps,T,q,s,n_l,x_M,sigma,f,R,eps_eff\n", 0) == 0);
  const CsvTable t = parse_csv(oa.str());
  CHECK(t.rows() == a.hybrid->samples.size());
  std::ostringstream log;
  write_transition_log(log, *a.hybrid);
  CHECK(log.str().find("edge=g") != std::string::npos);
  CHECK(hybrid_summary(*a.hybrid).find("slack_segments = ") != std::string::npos);
}

TEST_CASE("CSV parsing diagnostics") {
  CHECK(parse_csv("t,v\n0,1\n1,2\n").column("v")[1] == 2.0);
  try {
    (void)parse_csv("t,v\n0,1\n1\n", "d.csv");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(parse_csv("t,v\n0,x\n"), ParseError);
  CHECK_THROWS_AS(parse_csv(""), ParseError);
}

TEST_CASE("drive CSV round trip") {
  const MaterialParams p;
  const DriveInput d(triangular_rate(0.02, 1e-3, 2, p.l0), Signal({0.0, 10.0}, {0.0, 0.3}), Signal(300.0));
  const fs::path path = fs::temp_directory_path() / "sma_drive_roundtrip.csv";
  std::ostringstream out;
  write_drive_csv(out, d);
  write_text(path, out.str());
  const DriveInput back = read_drive_csv(path);
  for (double t = 0.0; t < 80.0; t += 0.37) {
    CHECK(back(t).v == doctest::Approx(d(t).v));
    CHECK(back(t).J == doctest::Approx(d(t).J));
    CHECK(back(t).T_E == doctest::Approx(d(t).T_E));
  }
  fs::remove(path);
}

TEST_CASE("sweep table keeps cell order and leaves slack cells empty") {
  SweepGrid g = parse_sweep_grid("strains = 0.005, 0.02\npowers_W = 0.5e-3, 0.41\nrates_per_s = 5e-3, 1e-2\n"
                                 "cycles = 1\nsample_rate_Hz = 20\nworkers = 3\n");
  CHECK(g.cells() == 8);
  const std::vector<SweepRow> rows = run_sweep(g);
  REQUIRE(rows.size() == 8);
  CHECK(rows[0].max_strain == 0.005);
  CHECK(rows[1].rate == 1e-2);
  CHECK(rows[2].power == 0.41);
  CHECK(rows[4].max_strain == 0.02);
  CHECK(rows[0].always_slack);
  const std::string csv = format_sweep_csv(rows);
  CHECK(csv.find("0.5,0.5,5,,,,,always slack") != std::string::npos);
  std::istringstream in(csv);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) ++n;
  CHECK(n == 9);
}

TEST_CASE("manifest parsing") {
  CHECK_THROWS_AS(parse_manifest("model = hybrid\n"), ParseError);
  CHECK_THROWS_AS(parse_manifest("slow_a = missing_drive.csv, missing.csv\n"), ParseError);
}
