#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "sma/identification.hpp"
#include "sma/keyvalue.hpp"
#include "sma/params.hpp"
#include "sma/trajectory_io.hpp"

using namespace sma;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

Result smasim(const std::string& args) {
  static int counter = 0;
  const fs::path dir = fs::current_path() / "cli_io";
  fs::create_directories(dir);
  const fs::path out = dir / ("out" + std::to_string(counter) + ".txt");
  const fs::path err = dir / ("err" + std::to_string(counter++) + ".txt");
  const std::string cmd = std::string(SMASIM_EXE) + " " + args + " >" + out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream fo(out), fe(err);
  std::stringstream so, se;
  so << fo.rdbuf();
  se << fe.rdbuf();
  r.out = so.str();
  r.err = se.str();
  return r;
}

std::string read(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::current_path() / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string scenario(const std::string& name) { return std::string(SMA_SCENARIO_DIR) + "/" + name; }

}  // namespace

TEST_CASE("run: low-power scenario reports slack and writes both models") {
  const fs::path dir = fresh_dir("run_low_power");
  const Result r = smasim("run " + scenario("fig7_low_power.scenario") + " -o " + dir.string());
  REQUIRE(r.code == 0);
  for (const char* f : {"fig7_low_power_hybrid.csv", "fig7_low_power_mas.csv", "fig7_low_power_transitions.log",
                        "fig7_low_power_drive.csv", "fig7_low_power_summary.txt"})
    CHECK(fs::exists(dir / f));
  const KeyValueFile summary = KeyValueFile::load(dir / "fig7_low_power_summary.txt");
  CHECK(summary.get_double("hybrid.slack_segments") >= 1.0);
  CHECK(summary.has("comparison.fit_sigma_percent"));
  CHECK(summary.has("mas.wall_time_s"));
  CHECK(read(dir / "fig7_low_power_hybrid.csv").rfind("t,j,eps,T,q,s,n_l,x_M,sigma,f,R,eps_eff", 0) == 0);
  CHECK(read(dir / "fig7_low_power_mas.csv").rfind("t,eps,x_M,T,sigma,f,R", 0) == 0);
}

TEST_CASE("run: identical inputs give byte-identical trajectories") {
  const fs::path a = fresh_dir("run_det_a");
  const fs::path b = fresh_dir("run_det_b");
  REQUIRE(smasim("run " + scenario("fig7_410mW.scenario") + " -o " + a.string()).code == 0);
  REQUIRE(smasim("run " + scenario("fig7_410mW.scenario") + " -o " + b.string()).code == 0);
  CHECK(read(a / "fig7_410mW_hybrid.csv") == read(b / "fig7_410mW_hybrid.csv"));
  CHECK(read(a / "fig7_410mW_mas.csv") == read(b / "fig7_410mW_mas.csv"));
  CHECK(read(a / "fig7_410mW_transitions.log") == read(b / "fig7_410mW_transitions.log"));
}

TEST_CASE("run: model override keeps one model") {
  const fs::path dir = fresh_dir("run_hybrid_only");
  REQUIRE(smasim("run " + scenario("fig7_410mW.scenario") + " --model hybrid -o " + dir.string()).code == 0);
  CHECK(fs::exists(dir / "fig7_410mW_hybrid.csv"));
  CHECK_FALSE(fs::exists(dir / "fig7_410mW_mas.csv"));
}

TEST_CASE("run: malformed scenarios exit 1 with the offending line") {
  const fs::path dir = fresh_dir("run_bad");
  std::ofstream(dir / "bad.scenario") << "name = bad\nmax_strain = 0.02\nstrain_rate_per_s = fast\n";
  Result r = smasim("run " + (dir / "bad.scenario").string());
  CHECK(r.code == 1);
  CHECK(r.err.find("bad.scenario:3") != std::string::npos);
  std::ofstream(dir / "range.scenario") << "max_strain = 0.2\nstrain_rate_per_s = 1e-3\n";
  r = smasim("run " + (dir / "range.scenario").string());
  CHECK(r.code == 1);
  CHECK(r.err.find("range.scenario:1") != std::string::npos);
  CHECK(smasim("run " + (dir / "missing.scenario").string()).code == 1);
  CHECK(smasim("frobnicate").code == 1);
}

TEST_CASE("sweep: a 2x2x2 grid gives an 8-row table") {
  const fs::path dir = fresh_dir("sweep_small");
  std::ofstream(dir / "small.grid") << "strains = 0.005, 0.03\npowers_W = 0.5e-3, 0.41\nrates_per_s = 5e-3, 1e-2\n"
                                       "cycles = 1\nsample_rate_Hz = 20\n";
  const Result r = smasim("sweep " + (dir / "small.grid").string() + " -j 4 -o " + (dir / "table.csv").string());
  REQUIRE(r.code == 0);
  std::istringstream in(read(dir / "table.csv"));
  std::string line;
  int rows = -1;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 8);
  CHECK(read(dir / "table.csv").find("always slack") != std::string::npos);
}

TEST_CASE("validate") {
  const fs::path dir = fresh_dir("validate");
  std::ofstream(dir / "bad.params") << "E_A = 50e9\nE_M = -1\n";
  CHECK(smasim("validate " + scenario("fig7_low_power.scenario") + " " + scenario("table1.grid") + " " +
               bundled_params_path().string())
            .code == 0);
  const Result r = smasim("validate " + (dir / "bad.params").string());
  CHECK(r.code == 1);
  CHECK(r.err.find("E_M") != std::string::npos);
}

TEST_CASE("identify: bundled parameters pass through consistent data") {
  const fs::path dir = fresh_dir("identify");
  const MaterialParams p = identified_params();
  auto write_dataset = [&](const std::string& label, double rate) {
    const DriveInput drive(triangular_rate(0.03, rate, 1, p.l0), Signal(0.41), Signal(298.0));
    const Dataset d = synthesize_dataset(label, drive, 0.0, p, 20.0, 0.0, 1);
    std::ostringstream drive_csv, meas;
    write_drive_csv(drive_csv, drive);
    meas << "t,sigma,R\n";
    for (std::size_t i = 0; i < d.t.size(); ++i) meas << d.t[i] << ',' << d.sigma[i] << ',' << d.R[i] << '\n';
    write_text(dir / (label + "_drive.csv"), drive_csv.str());
    write_text(dir / (label + "_meas.csv"), meas.str());
  };
  write_dataset("slow", 2e-3);
  write_dataset("fast", 1e-2);
  std::ofstream(dir / "fit.manifest") << "initial_params = " << bundled_params_path().string()
                                      << "\nfree = E_A, eps_T\nmax_iterations = 20\nsample_rate_Hz = 20\n"
                                         "slow_a = slow_drive.csv, slow_meas.csv\nfast_a = fast_drive.csv, fast_meas.csv\n";
  const Result r = smasim("identify " + (dir / "fit.manifest").string() + " -o " + (dir / "result").string());
  REQUIRE(r.code == 0);
  CHECK(fs::exists(dir / "result" / "fit_report.txt"));
  CHECK(read(dir / "result" / "objective_trace.csv").rfind("stage,iteration,objective", 0) == 0);
  const MaterialParams q = load_params(dir / "result" / "identified.params");
  CHECK(q.E_A == doctest::Approx(p.E_A).epsilon(1e-9));
  CHECK(q.eps_T == doctest::Approx(p.eps_T).epsilon(1e-9));
  CHECK(q.c_V == doctest::Approx(p.c_V).epsilon(1e-9));
  CHECK(q.rho_eM0 == doctest::Approx(p.rho_eM0).epsilon(1e-4));

  std::ofstream(dir / "empty.manifest") << "initial_params = " << bundled_params_path().string() << "\n";
  CHECK(smasim("identify " + (dir / "empty.manifest").string()).code == 1);
}
