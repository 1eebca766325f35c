#pragma once

#include <vector>

#include "sma/drive.hpp"
#include "sma/hysteresis_memory.hpp"
#include "sma/params.hpp"

namespace sma {

// Baseline model with thermally activated phase kinetics. Stiff; integrated
// with an implicit multistep (BDF) scheme.

struct MasState {
  double eps = 0.0;
  double x_M = 0.0;
  double T = 0.0;
};

enum class Transformation { AtoM, MtoA };

/// Energy barrier density eps_T * max(0, sigma_A^(n) - sigma) for A->M and
/// eps_T * max(0, sigma - sigma_M^(n)) for M->A, branches of the current level.
double delta_g(double sigma, double x_M, double T, const BranchMemory& mem, Transformation dir);

struct TransitionProbs {
  double p_MA = 0.0;  // [1/s]
  double p_AM = 0.0;  // [1/s]
};
TransitionProbs transition_probs(double sigma, double x_M, double T, const BranchMemory& mem);

struct MasRates {
  double eps = 0.0;
  double x_M = 0.0;
  double T = 0.0;
};
MasRates mas_rhs(const MasState& s, const DriveSample& in, const MaterialParams& p, const BranchMemory& mem);

struct MasOptions {
  double rel_tol = 1e-6;
  double abs_tol = 1e-9;
  double sample_rate = 1000.0;  // [Hz]
  double t_end = -1.0;          // negative: drive duration
  long max_steps = 20'000'000;
};

struct MasSample {
  double t = 0.0;
  double eps = 0.0;
  double x_M = 0.0;
  double T = 0.0;
  double sigma = 0.0;
  double f = 0.0;
  double R = 0.0;
  // diagnostics, not part of the CSV
  int level = 1;
  double sigma_A = 0.0;  // current-level loading branch
  double sigma_M = 0.0;  // current-level unloading branch
  double x_M_rate = 0.0;
};

struct MasTrajectory {
  std::vector<MasSample> samples;
  double wall_time = 0.0;  // [s]
  long steps = 0;
  long rejected_steps = 0;
  int reversals = 0;
  int closures = 0;
};

/// Stress gap beyond the current branch at which the baseline registers a
/// reversal of the transformation direction: 100 k_B T / (V_L eps_T).
double reversal_stress_gap(double T, const MaterialParams& p);

MasTrajectory simulate_mas(const MasState& initial, const DriveInput& drive, const MaterialParams& p,
                           const MasOptions& options = {});

}  // namespace sma
