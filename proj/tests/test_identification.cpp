#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "sma/constitutive.hpp"
#include "sma/errors.hpp"
#include "sma/identification.hpp"
#include "sma/params.hpp"

using namespace sma;

namespace {

ElectricalData records(const MaterialParams& p, double x_lo, double x_hi, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ue(0.0, 0.05), ux(x_lo, x_hi), uT(298.0, 400.0);
  ElectricalData d;
  for (int i = 0; i < 300; ++i) {
    d.eps.push_back(ue(rng));
    d.x_M.push_back(ux(rng));
    d.T.push_back(uT(rng));
    d.R.push_back(resistance(d.eps.back(), d.x_M.back(), d.T.back(), p));
  }
  return d;
}

FitConfig quick_config() {
  FitConfig c;
  c.hybrid.sample_rate = 20.0;
  c.max_iterations = 25;
  c.workers = 2;
  return c;
}

Dataset slow_dataset(const MaterialParams& p, double noise) {
  const DriveInput drive(triangular_rate(0.03, 2e-3, 1, p.l0), Signal(0.41), Signal(298.0));
  return synthesize_dataset("slow", drive, 0.0, p, 20.0, noise, 11);
}

}  // namespace

TEST_CASE("electrical least squares recovers consistent data exactly") {
  MaterialParams p;
  p.alpha_A = 5e-4;
  const std::vector<ElectricalData> data{records(p, 0.0, 1.0, 1)};
  const ElectricalFit f = fit_electrical(data, p);
  CHECK(f.rho_eA0 == doctest::Approx(p.rho_eA0).epsilon(1e-9));
  CHECK(f.rho_eM0 == doctest::Approx(p.rho_eM0).epsilon(1e-9));
  CHECK(f.alpha_A == doctest::Approx(p.alpha_A).epsilon(1e-7));
  CHECK(f.alpha_M == doctest::Approx(p.alpha_M).epsilon(1e-7));
  CHECK(f.rms_residual < 1e-9);
  MaterialParams q;
  apply(f, q);
  CHECK(q.rho_eM0 == doctest::Approx(p.rho_eM0).epsilon(1e-9));
}

TEST_CASE("all-austenite records cannot identify the martensite resistivity") {
  const MaterialParams p;
  const std::vector<ElectricalData> data{records(p, 0.0, 0.0, 2)};
  CHECK_THROWS_AS(fit_electrical(data, p), RankDeficient);
}

TEST_CASE("stage guards") {
  const MaterialParams p;
  const std::vector<Dataset> none;
  CHECK_THROWS_AS(fit_mechanical(none, p, {}), Error);
  CHECK_THROWS_AS(fit_thermal_fast(none, p, {}), Error);
  const std::vector<Dataset> one{slow_dataset(p, 0.0)};
  FitConfig c = quick_config();
  c.free = {"c_V"};
  CHECK_THROWS_AS(fit_mechanical(one, p, c), Error);
  c.free = {"r0"};
  CHECK_THROWS_AS(fit_mechanical(one, p, c), Error);
}

TEST_CASE("masks") {
  const auto& fixed = fixed_parameters();
  for (const std::string& k : default_mechanical_mask()) {
    CHECK(std::find(fixed.begin(), fixed.end(), k) == fixed.end());
    CHECK(k != "c_V");
    CHECK(k != "h_M");
  }
  CHECK(thermal_mask() == std::vector<std::string>{"c_V", "h_M"});
}

TEST_CASE("synthetic data are reproducible and noisy as requested") {
  const MaterialParams p;
  const Dataset a = slow_dataset(p, 0.01);
  const Dataset b = slow_dataset(p, 0.01);
  CHECK(a.sigma == b.sigma);
  const Dataset clean = slow_dataset(p, 0.0);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < clean.sigma.size(); ++i) {
    num += std::pow(a.sigma[i] - clean.sigma[i], 2);
    den += std::pow(clean.sigma[i], 2);
  }
  CHECK(std::sqrt(num / den) == doctest::Approx(0.01).epsilon(0.3));
}

TEST_CASE("simplex keeps the generating parameters and never worsens the objective") {
  const MaterialParams p;
  const std::vector<Dataset> data{slow_dataset(p, 0.0)};
  FitConfig c = quick_config();
  c.free = {"E_A", "eps_T"};
  CHECK(stress_objective(data, p, c) == doctest::Approx(0.0).epsilon(1e-9));
  const StageResult same = fit_mechanical(data, p, c);
  CHECK(same.params == p);

  MaterialParams p0 = p;
  p0.E_A *= 1.1;
  p0.eps_T *= 0.95;
  const StageResult r = fit_mechanical(data, p0, c);
  REQUIRE_FALSE(r.report.trace.empty());
  for (std::size_t i = 1; i < r.report.trace.size(); ++i) CHECK(r.report.trace[i] <= r.report.trace[i - 1]);
  CHECK(r.report.trace.back() < stress_objective(data, p0, c));
  CHECK(r.report.fit_sigma >= 0.0);
  CHECK(r.report.fit_sigma <= 100.0);
  for (const std::string& k : fixed_parameters()) CHECK(param_value(r.params, k) == param_value(p0, k));
  CHECK(r.params.c_V == p0.c_V);
  CHECK(format_report(r.report).find("E_A") != std::string::npos);
}

TEST_CASE("identification pipeline passes consistent data through") {
  const MaterialParams p;
  const std::vector<Dataset> slow{slow_dataset(p, 0.0)};
  const DriveInput fast_drive(triangular_rate(0.03, 1e-2, 1, p.l0), Signal(0.41), Signal(298.0));
  const std::vector<Dataset> fast{synthesize_dataset("fast", fast_drive, 0.0, p, 20.0, 0.0, 5)};
  FitConfig c = quick_config();
  c.free = {"E_A"};
  const IdentificationResult res = identify(slow, fast, p, c);
  REQUIRE(res.reports.size() == 3);
  CHECK(res.params.E_A == p.E_A);
  CHECK(res.params.c_V == p.c_V);
  CHECK(res.params.rho_eA0 == doctest::Approx(p.rho_eA0).epsilon(1e-6));
}
