#pragma once

#include <limits>
#include <string>
#include <vector>

#include "sma/drive.hpp"
#include "sma/hysteresis_memory.hpp"
#include "sma/params.hpp"

namespace sma {

// Hybrid reformulation of the wire model: the phase fraction is no longer a
// state but is recovered algebraically from (eps, T) and the active branch.
// The transformation direction, the slack flag and the minor-loop level form
// the discrete state.

enum class BranchType : int { AM = 1, MA = -1, M = 0 };

/// Operative modes in the order Q1..Q5.
enum class Mode { AM0, MA0, M0, MA1, AM1 };

struct DiscreteState {
  BranchType q = BranchType::AM;
  int s = 0;    // 1 while the wire is slack
  int n_l = 1;  // minor-loop level
};

struct ContinuousState {
  double eps = 0.0;
  double T = 293.15;
};

struct HybridState {
  explicit HybridState(const MaterialParams& p) : mem(p) {}
  ContinuousState xc;
  DiscreteState xd;
  BranchMemory mem;
  // Last recovered phase fraction. When set, the next recovery searches a
  // local bracket around it instead of sweeping the whole range (no
  // uniqueness check); clear it to force the full sweep.
  mutable double x_hint = std::numeric_limits<double>::quiet_NaN();
};

Mode mode_of(const DiscreteState& d);
const char* mode_name(Mode m);
/// e.g. "AM0[n=3]"
std::string describe(const DiscreteState& d);

/// Full austenite, tensioned, outer loop.
HybridState initial_hybrid_state(double eps, double T, const MaterialParams& p);

/// Strain E_M^-1 sigma_A^(1)(1, T) + eps_T above which the wire is fully martensitic.
double strain_threshold(double T, const MaterialParams& p);

/// How the phase fraction was recovered. When the mode function has no sign
/// change on the admissible range, x_M sits at the end the state lies beyond
/// (the wire responds elastically there).
enum class Pin { None, Lower, Upper };

struct PhaseSolution {
  double x_M = 0.0;
  Pin pin = Pin::None;
};

PhaseSolution solve_phase(const HybridState& st, const MaterialParams& p);

/// Strict algebraic recovery: NoRootError when the mode function has no sign
/// change on the admissible range or changes sign more than once.
double zeta_xM(const HybridState& st, const MaterialParams& p);

/// Everything the flow map and the jump predicates need at one point.
struct ModeEval {
  Mode mode = Mode::AM0;
  PhaseSolution phase;
  double sigma = 0.0;        // sigma(eps, x_M), tension not enforced
  double sigma_rate = 0.0;
  double Lambda = 0.0;       // [K/s]
  double phi_xM = 0.0;
  double T_rate = 0.0;
  double eps_rate = 0.0;
  double eps_eff = 0.0;
  double eps_eff_rate = 0.0;
  double branch = 0.0;       // active branch stress (A for AM/M, M for MA)
  double branch_rate = 0.0;
  double strain_threshold = 0.0;
  double rate_threshold = 0.0;  // E_M^-1 sigma_S(1) Lambda
  StrainBounds bounds{};
};

ModeEval evaluate_mode(const HybridState& st, const DriveSample& in, const MaterialParams& p);

double phi_xM(const HybridState& st, const DriveSample& in, const MaterialParams& p);

struct FlowRates {
  double eps = 0.0;
  double T = 0.0;
};
FlowRates flow_map(const HybridState& st, const DriveSample& in, const MaterialParams& p);

struct FlowCheck {
  bool ok = true;
  std::string violated;  // empty when ok
};
FlowCheck in_flow_set(const HybridState& st, const DriveSample& in, const MaterialParams& p);

/// Indices m in 1..16 of all active jump sets D_m, ascending.
std::vector<int> jump_check(const HybridState& st, const DriveSample& in, const MaterialParams& p);
std::vector<int> jump_check(const HybridState& st, const ModeEval& ev, const DriveSample& in,
                            const MaterialParams& p);

/// Deterministic choice among simultaneously active jumps: slack transitions
/// first, then mode changes, then loop closures; ties by lowest index.
int select_jump(const std::vector<int>& active);

/// Name of the predicate behind jump m, for the transition log.
const char* jump_trigger(int m);

/// Applies g_m. The continuous state is unchanged.
HybridState jump_map(const HybridState& st, int m, const MaterialParams& p);

struct EffectiveStrain {
  double value = 0.0;
  double rate = 0.0;
};
EffectiveStrain effective_strain(const HybridState& st, const DriveSample& in, const MaterialParams& p);

struct HybridOutputs {
  double x_M = 0.0;
  double sigma = 0.0;  // exactly 0 while slack
  double f = 0.0;
  double R = 0.0;
  double eps_eff = 0.0;
};
HybridOutputs hybrid_outputs(const HybridState& st, const MaterialParams& p);

}  // namespace sma
