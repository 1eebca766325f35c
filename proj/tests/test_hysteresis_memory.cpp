#include <doctest.h>

#include <cmath>

#include "sma/constitutive.hpp"
#include "sma/errors.hpp"
#include "sma/hysteresis_memory.hpp"
#include "sma/params.hpp"

using namespace sma;

TEST_CASE("level 1 is the outer loop") {
  const MaterialParams p;
  const BranchMemory mem(p);
  CHECK(mem.level() == 1);
  CHECK(mem.top().x_lo == 0.0);
  CHECK(mem.top().x_hi == 1.0);
  for (double x = 0.0; x <= 1.0; x += 0.125) {
    CHECK(mem.branch_eval(BranchKind::A, x, 310.0) == doctest::Approx(sigma_A_outer(x, 310.0, p)));
    CHECK(mem.branch_eval(BranchKind::M, x, 310.0) == doctest::Approx(sigma_M_outer(x, 310.0, p)));
    CHECK(mem.branch_partials(BranchKind::A, x, 310.0).d_T == doctest::Approx(sigma_S(x, p)));
  }
  const double m1 = p.E_ML * std::log(1.0 + p.lambda_ML) + p.E_MC + p.sigma_MB;
  CHECK(mem.branch_eval(BranchKind::M, 1.0, p.T0) == doctest::Approx(m1));
}

TEST_CASE("branch slopes agree with central differences, also at the range ends") {
  const MaterialParams p;
  BranchMemory mem(p);
  const double h = 1e-7;
  for (double x = 0.05; x < 1.0; x += 0.1) {
    const double fd = (sigma_A_outer(x + h, 320.0, p) - sigma_A_outer(x - h, 320.0, p)) / (2 * h);
    CHECK(mem.branch_partials(BranchKind::A, x, 320.0).d_xM == doctest::Approx(fd).epsilon(1e-4));
  }
  mem.push_reversal(0.6, BranchKind::M);
  CHECK(std::isfinite(mem.branch_partials(BranchKind::M, 0.0, 320.0).d_xM));
  CHECK(std::isfinite(mem.branch_partials(BranchKind::M, 0.6, 320.0).d_xM));
}

TEST_CASE("a loading reversal opens a level whose unloading branch passes through the reversal point") {
  const MaterialParams p;
  BranchMemory mem(p);
  const double sigma_rev = mem.branch_eval(BranchKind::A, 0.5, 330.0);
  mem.push_reversal(0.5, BranchKind::M);
  CHECK(mem.level() == 2);
  CHECK(mem.top().x_lo == 0.0);
  CHECK(mem.top().x_hi == 0.5);
  CHECK(mem.branch_eval(BranchKind::M, 0.5, 330.0) == doctest::Approx(sigma_rev).epsilon(1e-9));
  // rejoins the parent at the opposite end
  CHECK(mem.branch_eval(BranchKind::M, 0.0, 330.0) == doctest::Approx(sigma_M_outer(0.0, 330.0, p)));
  CHECK_THROWS_AS(mem.branch_eval(BranchKind::M, 0.6, 330.0), RangeError);
}

TEST_CASE("reversals too close to a range end are rejected") {
  const MaterialParams p;
  BranchMemory mem(p);
  CHECK_THROWS_AS(mem.push_reversal(1.0 - 1e-9, BranchKind::M), DegenerateReversal);
  CHECK_THROWS_AS(mem.push_reversal(1e-9, BranchKind::A), DegenerateReversal);
  mem.push_reversal(0.5, BranchKind::M);
  // an immediate opposite reversal lands on the end of the new range
  CHECK_THROWS_AS(mem.push_reversal(0.5, BranchKind::A), DegenerateReversal);
  // the reversal bookkeeping undoes the level instead
  mem.reverse(0.5, BranchKind::A);
  CHECK(mem.level() == 1);
}

TEST_CASE("closure pops two levels and restores the parent branch exactly") {
  const MaterialParams p;
  BranchMemory mem(p);
  std::vector<double> before;
  for (double x = 0.0; x <= 1.0; x += 0.05) before.push_back(mem.branch_eval(BranchKind::A, x, 300.0));
  mem.push_reversal(0.7, BranchKind::M);
  mem.push_reversal(0.3, BranchKind::A);
  CHECK(mem.level() == 3);
  CHECK(mem.top().x_lo == 0.3);
  CHECK(mem.top().x_hi == 0.7);
  mem.pop_closure();
  CHECK(mem.level() == 1);
  std::size_t i = 0;
  for (double x = 0.0; x <= 1.0; x += 0.05) CHECK(mem.branch_eval(BranchKind::A, x, 300.0) == before[i++]);
}

TEST_CASE("closure stack arithmetic and underflow") {
  const MaterialParams p;
  BranchMemory mem(p);
  mem.push_reversal(0.8, BranchKind::M);
  mem.push_reversal(0.2, BranchKind::A);
  mem.push_reversal(0.7, BranchKind::M);
  mem.push_reversal(0.3, BranchKind::A);
  CHECK(mem.level() == 5);
  mem.pop_closure();
  CHECK(mem.level() == 3);
  mem.undo_reversal();
  CHECK(mem.level() == 2);
  CHECK_THROWS_AS(mem.pop_closure(), MemoryUnderflow);
  mem.reset_outer();
  CHECK(mem.level() == 1);
  CHECK_THROWS_AS(mem.undo_reversal(), MemoryUnderflow);
}

TEST_CASE("inner branches stay between the outer branches and ranges nest") {
  const MaterialParams p;
  BranchMemory mem(p);
  mem.push_reversal(0.9, BranchKind::M);
  mem.push_reversal(0.15, BranchKind::A);
  mem.push_reversal(0.6, BranchKind::M);
  const auto& recs = mem.records();
  for (std::size_t k = 1; k < recs.size(); ++k) {
    CHECK(recs[k].x_lo >= recs[k - 1].x_lo);
    CHECK(recs[k].x_hi <= recs[k - 1].x_hi);
    CHECK(recs[k].x_lo < recs[k].x_hi);
  }
  for (double x = mem.top().x_lo; x <= mem.top().x_hi; x += 0.01) {
    const double a = mem.branch_eval(BranchKind::A, x, 330.0);
    const double m = mem.branch_eval(BranchKind::M, x, 330.0);
    CHECK(sigma_M_outer(x, 330.0, p) <= m + 1e-6);
    CHECK(m <= a + 1e-6);
    CHECK(a <= sigma_A_outer(x, 330.0, p) + 1e-6);
  }
}

TEST_CASE("strain bounds of the outer loop") {
  const MaterialParams p;
  const BranchMemory mem(p);
  const StrainBounds b = mem.strain_bounds(p.T0);
  CHECK(b.eA_hi == doctest::Approx(sigma_A_outer(1.0, p.T0, p) / p.E_M + p.eps_T));
  CHECK(b.eA_lo == doctest::Approx(sigma_A_outer(0.0, p.T0, p) / p.E_A));
  CHECK(b.eA_lo <= b.eA_hi);
  CHECK(b.eM_lo <= b.eM_hi);
}

TEST_CASE("saturated unloading and dump") {
  const MaterialParams p;
  BranchMemory mem(p);
  mem.enter_saturated_unloading();
  CHECK(mem.level() == 2);
  CHECK(mem.top().x_hi == 1.0);
  CHECK(mem.top().modified == BranchKind::M);
  CHECK(mem.dump(11).find("level") != std::string::npos);
}
